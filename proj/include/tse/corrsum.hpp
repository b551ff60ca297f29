#pragma once

#include <cstdint>
#include <vector>

#include "tse/curves.hpp"
#include "tse/errors.hpp"
#include "tse/paircount.hpp"
#include "tse/series.hpp"

namespace tse {

// Correlation sums C2_m(eps) for every order m = 1..cloud.dim, where the
// order-m distance is the max norm over the first m coordinates of each
// point. For clouds built by delay_embed this is exactly the correlation sum
// of the order-m embedding restricted to the common index range, which makes
// the families nested: C2_{m+1} <= C2_m at every radius.
//
// C2 = (admissible ordered-once pairs with distance < eps) / (admissible
// pairs); the inequality is strict, so exact ties at eps do not count and
// duplicate points count at every positive radius. Entries whose pair count
// is zero are undefined (NaN) and stay undefined through derived curves.
// Theiler exclusion is on the index distance within the cloud; delay_embed
// produces consecutive origin indices, so this equals the sample-time
// separation.
inline CurveFamily correlation_sums(const PointCloud& cloud, const EpsGrid& grid,
                                    const PairCountConfig& cfg) {
  detail::PairCounts pc = detail::count_pairs_nested(cloud, grid, cfg);
  CurveFamily fam;
  fam.quantity = Quantity::C2;
  fam.grid = grid;
  const std::size_t ns = grid.size();
  for (std::size_t mi = 0; mi < cloud.dim; ++mi) {
    fam.orders.push_back(static_cast<int>(mi + 1));
    std::vector<double> row(ns, kUndefined);
    for (std::size_t s = 0; s < ns; ++s) {
      if (pc.num[mi][s] > 0)
        row[s] = static_cast<double>(pc.num[mi][s]) /
                 static_cast<double>(pc.denom[mi][s]);
    }
    fam.values.push_back(std::move(row));
    fam.counts.push_back(std::move(pc.num[mi]));
    fam.denoms.push_back(std::move(pc.denom[mi]));
  }
  return fam;
}

// Single-order correlation sum of the cloud's full dimension.
inline CurveFamily correlation_sum(const PointCloud& cloud, const EpsGrid& grid,
                                   const PairCountConfig& cfg) {
  CurveFamily all = correlation_sums(cloud, grid, cfg);
  CurveFamily fam;
  fam.quantity = Quantity::C2;
  fam.grid = grid;
  const std::size_t mi = cloud.dim - 1;
  fam.orders.push_back(static_cast<int>(cloud.dim));
  fam.values.push_back(std::move(all.values[mi]));
  fam.counts.push_back(std::move(all.counts[mi]));
  fam.denoms.push_back(std::move(all.denoms[mi]));
  return fam;
}

// Recomputes a correlation-sum family on the first half of the cloud;
// |full - half| on derived quantities serves as an error indicator.
inline CurveFamily correlation_sums_half(const PointCloud& cloud,
                                         const EpsGrid& grid,
                                         const PairCountConfig& cfg) {
  return correlation_sums(first_half(cloud), grid, cfg);
}

// The complete correlation-entropy curve set of one embedded series.
struct EntropyCurveSet {
  CurveFamily c2;       // correlation sums, orders 1..M
  CurveFamily h2;       // block correlation entropies, orders 1..M
  CurveFamily cond;     // conditional entropies h_m, orders 0..M-1
  CurveFamily delta_h;  // delta h_m, orders 1..M-1
  CurveFamily d2;       // scale-dependent correlation dimension
  CurveFamily e2;       // excess entropies, orders 1..M
};

inline EntropyCurveSet entropy_curve_set(const PointCloud& cloud,
                                         const EpsGrid& grid,
                                         const PairCountConfig& cfg,
                                         std::size_t delta_steps = 1) {
  EntropyCurveSet set;
  set.c2 = correlation_sums(cloud, grid, cfg);
  set.h2 = entropy_curves(set.c2);
  set.cond = conditional_entropy_curves(set.h2);
  set.delta_h = delta_h_curves(set.cond);
  set.d2 = dimension_curve(set.c2, delta_steps);
  set.e2 = excess_entropy_curves(set.h2, set.cond);
  return set;
}

}  // namespace tse
