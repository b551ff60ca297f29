#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "tse/curves.hpp"
#include "tse/errors.hpp"
#include "tse/kdtree.hpp"
#include "tse/rng.hpp"
#include "tse/series.hpp"
#include "tse/util.hpp"

namespace tse {

// psi(x) for x > 0: downward recurrence into the asymptotic region, then the
// Bernoulli series. Absolute error below 1e-12 over the arguments used here.
inline double digamma(double x) {
  if (!(x > 0.0)) throw UsageError("digamma requires a positive argument");
  double result = 0.0;
  while (x < 10.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  result += std::log(x) - 0.5 * inv -
            inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 -
                    inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0)))));
  return result;
}

struct KsgConfig {
  std::size_t k = 4;     // neighbors for the local estimate
  double eta = 0.0;      // amplitude of U[0, eta] noise applied to coordinates
  std::uint64_t seed = 0;
};

struct MiEstimate {
  double value = 0.0;            // nats
  double half_data_value = 0.0;  // same estimate on the first half
  std::size_t n_used = 0;        // joint points entering the estimate
  std::size_t degenerate = 0;    // points whose k had to be enlarged locally
};

namespace detail {

// Marginal counter: sorted scan for one dimension, kd-tree otherwise.
class MarginalCounter {
public:
  MarginalCounter(const double* pts, std::size_t n, std::size_t dim)
      : dim_(dim) {
    if (dim_ == 1) {
      sorted_.assign(pts, pts + n);
      std::sort(sorted_.begin(), sorted_.end());
    } else {
      tree_.emplace(pts, n, dim);
    }
  }

  std::size_t count_within(const double* pts, std::size_t i, double r) const {
    if (!(r > 0.0)) return 0;
    if (dim_ == 1) {
      const double q = pts[i];
      auto lo = std::upper_bound(sorted_.begin(), sorted_.end(), q - r);
      auto hi = std::lower_bound(sorted_.begin(), sorted_.end(), q + r);
      return static_cast<std::size_t>(hi - lo) - 1;  // minus the point itself
    }
    return tree_->count_within(i, r);
  }

private:
  std::size_t dim_;
  std::vector<double> sorted_;
  std::optional<KdTree> tree_;
};

struct KsgTerms {
  double mi = 0.0;
  std::size_t degenerate = 0;
};

inline KsgTerms ksg_estimate(const std::vector<double>& joint,
                             const std::vector<double>& xs,
                             const std::vector<double>& ys, std::size_t n,
                             std::size_t dx, std::size_t dy, std::size_t k) {
  if (n <= k) throw TooFewPoints("KSG needs more points than neighbors");
  const std::size_t dj = dx + dy;
  KdTree joint_tree(joint.data(), n, dj);
  MarginalCounter x_counter(xs.data(), n, dx);
  MarginalCounter y_counter(ys.data(), n, dy);

  std::vector<double> terms(n, 0.0);
  std::vector<std::uint8_t> degen(n, 0);
  parallel_for(n, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      auto [eps, k_used] = joint_tree.knn_distance_positive(i, k);
      if (k_used != k) degen[i] = 1;
      const std::size_t nx = x_counter.count_within(xs.data(), i, eps);
      const std::size_t ny = y_counter.count_within(ys.data(), i, eps);
      terms[i] = digamma(static_cast<double>(k_used)) -
                 digamma(static_cast<double>(nx + 1)) -
                 digamma(static_cast<double>(ny + 1));
    }
  });
  KsgTerms out;
  out.mi = pairwise_mean(terms) + digamma(static_cast<double>(n));
  for (auto d : degen) out.degenerate += d;
  return out;
}

}  // namespace detail

// Kraskov-Stoegbauer-Grassberger mutual information, variant 1, in nats:
// I = psi(k) + psi(N) - < psi(n_x + 1) + psi(n_y + 1) >, with the k-th
// neighbor distance taken in the joint space under the max norm and the
// marginal counts strict. Estimates can be slightly negative; they are never
// NaN. If eta > 0, an independent U[0, eta] draw is added to every
// coordinate first (per point, per coordinate). When duplicate points make
// the k-th neighbor distance zero, k is enlarged for that point until the
// distance is positive and the point is reported in `degenerate`.
inline MiEstimate ksg_mi(const PointCloud& x, const PointCloud& y,
                         const KsgConfig& cfg) {
  if (cfg.k < 1) throw UsageError("KSG needs k >= 1");
  if (x.size() != y.size())
    throw MisalignedClouds("x and y clouds differ in size");
  if (x.origin_indices != y.origin_indices)
    throw MisalignedClouds("x and y clouds have different origin indices");
  const std::size_t n = x.size();
  if (n <= cfg.k) throw TooFewPoints("KSG needs more points than neighbors");

  std::vector<double> xs = x.coords;
  std::vector<double> ys = y.coords;
  if (cfg.eta > 0.0) {
    SplitMix64 gx(derive_seed(cfg.seed, 1));
    SplitMix64 gy(derive_seed(cfg.seed, 2));
    for (double& v : xs) v += gx.uniform(cfg.eta);
    for (double& v : ys) v += gy.uniform(cfg.eta);
  } else if (cfg.eta < 0.0) {
    throw NegativeEta(cfg.eta);
  }

  const std::size_t dx = x.dim, dy = y.dim;
  std::vector<double> joint(n * (dx + dy));
  for (std::size_t i = 0; i < n; ++i) {
    std::copy_n(xs.data() + i * dx, dx, joint.data() + i * (dx + dy));
    std::copy_n(ys.data() + i * dy, dy, joint.data() + i * (dx + dy) + dx);
  }

  MiEstimate est;
  est.n_used = n;
  detail::KsgTerms full = detail::ksg_estimate(joint, xs, ys, n, dx, dy, cfg.k);
  est.value = full.mi;
  est.degenerate = full.degenerate;

  const std::size_t nh = n / 2;
  if (nh > cfg.k) {
    std::vector<double> jh(joint.begin(),
                           joint.begin() + static_cast<std::ptrdiff_t>(nh * (dx + dy)));
    std::vector<double> xh(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(nh * dx));
    std::vector<double> yh(ys.begin(), ys.begin() + static_cast<std::ptrdiff_t>(nh * dy));
    est.half_data_value = detail::ksg_estimate(jh, xh, yh, nh, dx, dy, cfg.k).mi;
  } else {
    est.half_data_value = est.value;
  }
  return est;
}

// Past and future blocks of a delay embedding: past (x_t, x_{t-tau}, ...,
// x_{t-(m-1)tau}), future (x_{t+tau}, ..., x_{t+m tau}); both are the two
// halves of one order-2m embedding, so they stay aligned by construction.
struct PastFutureBlocks {
  PointCloud past;
  PointCloud future;
};

inline PastFutureBlocks past_future_blocks(const ScalarSeries& s, int m, int tau) {
  PointCloud both = delay_embed(s, {2 * m, tau});
  PastFutureBlocks out;
  const std::size_t n = both.size();
  const auto md = static_cast<std::size_t>(m);
  out.past.dim = md;
  out.future.dim = md;
  out.past.coords.resize(n * md);
  out.future.coords.resize(n * md);
  out.past.origin_indices = both.origin_indices;
  out.future.origin_indices = both.origin_indices;
  for (std::size_t i = 0; i < n; ++i) {
    const double* p = both.coords.data() + i * both.dim;
    // coords are newest first: p[0..m-1] is the future block, p[m..2m-1] the past
    std::copy_n(p + m, md, out.past.coords.data() + i * md);
    std::copy_n(p, md, out.future.coords.data() + i * md);
  }
  return out;
}

// PI_m(eta): mutual information between m-step past and m-step future blocks
// after adding U[0, eta] observation noise to the series, one independent
// noise stream per eta (derived from the base seed and the grid index).
inline CurveFamily predictive_information(const ScalarSeries& series, int m,
                                          int tau, const KsgConfig& cfg,
                                          const std::vector<double>& etas) {
  if (etas.empty()) throw EmptyGrid();
  for (std::size_t i = 0; i < etas.size(); ++i) {
    if (etas[i] < 0.0) throw NegativeEta(etas[i]);
    if (i > 0 && !(etas[i] > etas[i - 1]))
      throw UsageError("eta grid must be strictly increasing");
  }
  CurveFamily fam;
  fam.quantity = Quantity::PI;
  fam.grid = EpsGrid::from_values(etas);
  fam.orders = {m};
  fam.values.assign(1, std::vector<double>(etas.size(), kUndefined));
  fam.half_values.assign(1, std::vector<double>(etas.size(), kUndefined));
  for (std::size_t ei = 0; ei < etas.size(); ++ei) {
    ScalarSeries noisy =
        add_uniform_noise(series, etas[ei], derive_seed(cfg.seed, ei));
    PastFutureBlocks blocks = past_future_blocks(noisy, m, tau);
    KsgConfig point_cfg = cfg;
    point_cfg.eta = 0.0;  // noise already applied at series level
    MiEstimate est = ksg_mi(blocks.past, blocks.future, point_cfg);
    fam.values[0][ei] = est.value;
    fam.half_values[0][ei] = est.half_data_value;
  }
  return fam;
}

}  // namespace tse
