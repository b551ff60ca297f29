#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "tse/curves.hpp"
#include "tse/errors.hpp"
#include "tse/series.hpp"

namespace tse {

// theiler: pairs of points whose indices differ by <= theiler samples are
// excluded from the statistics. max_pairs: 0 counts every admissible pair;
// a positive value freezes a scale once at least max_pairs pairs (and
// min_reference_points reference points) back its count, so abundant large
// radii are settled early while rare small-radius pairs keep accumulating
// over the whole cloud. Reference points scan the full cloud in index order
// and all counting is integer, so results are exactly reproducible; with
// max_pairs = 0 every point is a reference point and the counts equal the
// naive double loop bit for bit.
struct PairCountConfig {
  std::size_t theiler = 0;
  std::uint64_t max_pairs = 0;
  std::size_t min_reference_points = 128;
};

namespace detail {

// num[mi][s] / denom[mi][s]: ordered pairs with max-norm distance < eps[s]
// over the reference points processed while (m, s) was live; m = mi + m_lo
// coordinates. Ratios are unbiased for the correlation sum; in exhaustive
// mode both entries are exactly twice the unordered-pair counts.
struct PairCounts {
  std::vector<std::vector<std::uint64_t>> num;
  std::vector<std::vector<std::uint64_t>> denom;
};

inline std::uint64_t admissible_pair_total(std::size_t n, std::size_t w) {
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (i > w) total += static_cast<std::uint64_t>(i - w);
  return total;
}

// One counting pass serving embedding orders [m_lo, m_hi] of the nested
// point matrix, with a hashed box grid on the first one or two coordinates
// (one for m_lo = 1, since the order-1 distance ignores later coordinates).
// Cells have the side length of the largest still-live radius; the 3x3 cell
// neighborhood of a reference point then contains every candidate partner,
// and hash collisions only add candidates that the distance test rejects.
class BoxCountPass {
public:
  BoxCountPass(const double* pts, std::size_t n, std::size_t dim,
               std::size_t m_lo, std::size_t m_hi,
               const std::vector<double>& eps, const PairCountConfig& cfg)
      : pts_(pts), n_(n), dim_(dim), m_lo_(m_lo), m_hi_(m_hi), eps_(eps),
        theiler_(cfg.theiler), cap_(cfg.max_pairs),
        min_refs_(std::max<std::size_t>(cfg.min_reference_points, 1)),
        box_dims_(m_lo >= 2 ? 2u : 1u),
        bits_(m_lo >= 2 ? 9u : 16u),
        mask_((std::size_t(1) << bits_) - 1u) {
    const std::size_t nm = m_hi_ - m_lo_ + 1;
    const std::size_t ns = eps_.size();
    hist_.assign(nm, std::vector<std::uint64_t>(ns + 1, 0));
    num_.assign(nm, std::vector<std::uint64_t>(ns, 0));
    den_.assign(nm, std::vector<std::uint64_t>(ns, 0));
    live_top_.assign(nm, ns);  // one past the largest live scale, per order
    order_top_.assign(nm, eps_.back());
    head_.assign(std::size_t(1) << (bits_ * box_dims_), -1);
    nxt_.assign(n_, -1);
    rebuild(eps_.back());
    active_top_ = eps_.back();
  }

  PairCounts run() {
    // Golden-ratio stride through the reference points: every prefix of the
    // visit order samples the whole series nearly uniformly, so scales that
    // freeze early are still backed by ergodic statistics.
    std::size_t stride = std::max<std::size_t>(
        1, static_cast<std::size_t>(0.6180339887498949 * static_cast<double>(n_)));
    while (std::gcd(stride, n_) != 1) ++stride;
    std::uint64_t partners_prefix = 0;
    std::size_t ref = 0;
    for (std::size_t k = 0; k < n_; ++k) {
      scan(ref);
      partners_prefix += partners_of(ref);
      ref += stride;
      if (ref >= n_) ref -= n_;
      // check often while single reference points are expensive, sparsely
      // once the boxes have shrunk
      const bool check = k < 512 || (k % 128) == 127 || k + 1 == n_;
      if (check && freeze_check(k + 1, partners_prefix)) break;
    }
    PairCounts out;
    out.num = std::move(num_);
    out.denom = std::move(den_);
    return out;
  }

private:
  std::uint64_t partners_of(std::size_t i) const {
    const std::size_t before = std::min(i, theiler_);
    const std::size_t after = std::min(n_ - 1 - i, theiler_);
    return static_cast<std::uint64_t>(n_ - 1 - before - after);
  }

  std::size_t hash_cell(double v) const {
    return static_cast<std::size_t>(
               static_cast<std::int64_t>(std::floor(v / cell_))) & mask_;
  }

  void rebuild(double cell) {
    cell_ = cell;
    std::fill(head_.begin(), head_.end(), -1);
    for (std::size_t j = 0; j < n_; ++j) {
      const double* p = pts_ + j * dim_;
      std::size_t c = hash_cell(p[0]);
      if (box_dims_ == 2) c = (c << bits_) | hash_cell(p[1]);
      nxt_[j] = head_[c];
      head_[c] = static_cast<std::int32_t>(j);
    }
  }

  void scan(std::size_t i) {
    const double* pi = pts_ + i * dim_;
    const std::int64_t cx =
        static_cast<std::int64_t>(std::floor(pi[0] / cell_));
    const std::int64_t cy =
        box_dims_ == 2 ? static_cast<std::int64_t>(std::floor(pi[1] / cell_)) : 0;
    const std::int64_t dy_max = box_dims_ == 2 ? 1 : 0;
    const std::size_t lo_skip = i - std::min(i, theiler_);
    const std::size_t hi_skip = i + std::min(n_ - 1 - i, theiler_);
    for (std::int64_t dx = -1; dx <= 1; ++dx) {
      const std::size_t hx = static_cast<std::size_t>(cx + dx) & mask_;
      for (std::int64_t dy = -dy_max; dy <= dy_max; ++dy) {
        std::size_t c = hx;
        if (box_dims_ == 2)
          c = (hx << bits_) | (static_cast<std::size_t>(cy + dy) & mask_);
        for (std::int32_t jj = head_[c]; jj >= 0; jj = nxt_[jj]) {
          const auto j = static_cast<std::size_t>(jj);
          if (j >= lo_skip && j <= hi_skip) continue;  // self and Theiler band
          tally(pi, j);
        }
      }
    }
  }

  void tally(const double* pi, std::size_t j) {
    const double* pj = pts_ + j * dim_;
    double d = 0.0;
    std::size_t bin = 0;
    bool have_bin = false;
    for (std::size_t m = 1; m <= m_hi_; ++m) {
      d = std::max(d, std::abs(pi[m - 1] - pj[m - 1]));
      if (m < m_lo_) continue;
      if (d >= active_top_) return;  // beyond every live scale at all orders
      const std::size_t mi = m - m_lo_;
      if (d >= order_top_[mi]) continue;  // this order's live scales are smaller
      // the nested distance never shrinks with m, so the bin only moves up
      if (have_bin) {
        while (eps_[bin] <= d) ++bin;
      } else {
        bin = static_cast<std::size_t>(
            std::upper_bound(eps_.begin(), eps_.end(), d) - eps_.begin());
        have_bin = true;
      }
      ++hist_[mi][bin];
    }
  }

  // Settles counters, freezes scales whose statistics suffice and shrinks
  // the box grid once the largest live scale has dropped enough. Returns
  // true when no scale is live any more.
  //
  // Besides the pair-count cap, a scale is settled early when it has become
  // statistically hopeless (count < 8*cap*(refs/n)^3): its projected
  // end-of-pass count is then so far below the cap that the remaining
  // reference points would shrink its error by less than half. This keeps
  // rare-pair scales from pinning the box grid at large cells for the whole
  // pass.
  bool freeze_check(std::size_t refs_done, std::uint64_t partners_prefix) {
    const double frac = static_cast<double>(refs_done) / static_cast<double>(n_);
    const auto hopeless = static_cast<std::uint64_t>(
        8.0 * static_cast<double>(cap_) * frac * frac * frac);
    double new_top = 0.0;
    bool any_live = false;
    for (std::size_t mi = 0; mi < hist_.size(); ++mi) {
      std::uint64_t cum = 0;
      std::size_t live_hi = 0;
      for (std::size_t s = 0; s < live_top_[mi]; ++s) {
        cum += hist_[mi][s];
        num_[mi][s] = cum;
        den_[mi][s] = partners_prefix;
        const bool settled = cap_ > 0 && refs_done >= min_refs_ &&
                             (cum >= cap_ || cum < hopeless);
        if (!settled) live_hi = s + 1;
      }
      live_top_[mi] = live_hi;
      order_top_[mi] = live_hi > 0 ? eps_[live_hi - 1] : 0.0;
      if (live_hi > 0) {
        any_live = true;
        new_top = std::max(new_top, eps_[live_hi - 1]);
      }
    }
    if (!any_live) return true;
    if (new_top < 0.5 * cell_) rebuild(new_top);
    active_top_ = new_top;
    return false;
  }

  const double* pts_;
  std::size_t n_, dim_, m_lo_, m_hi_;
  const std::vector<double>& eps_;
  std::size_t theiler_;
  std::uint64_t cap_;
  std::size_t min_refs_;
  unsigned box_dims_, bits_;
  std::size_t mask_;
  double cell_ = 0.0;
  double active_top_ = 0.0;
  std::vector<std::vector<std::uint64_t>> hist_, num_, den_;
  std::vector<std::size_t> live_top_;
  std::vector<double> order_top_;
  std::vector<std::int32_t> head_;
  std::vector<std::int32_t> nxt_;
};

// Counts for all orders 1..dim of the nested prefix distances.
inline PairCounts count_pairs_nested(const PointCloud& cloud, const EpsGrid& grid,
                                     const PairCountConfig& cfg) {
  if (grid.values.empty()) throw EmptyGrid();
  require_geometric(grid);
  const std::size_t n = cloud.size();
  if (n < 2 || admissible_pair_total(n, cfg.theiler) == 0)
    throw TooFewPoints("need at least one admissible pair after the Theiler "
                       "exclusion");
  const std::size_t M = cloud.dim;
  PairCounts all;
  all.num.resize(M);
  all.denom.resize(M);
  {
    BoxCountPass pass(cloud.coords.data(), n, M, 1, 1, grid.values, cfg);
    PairCounts r = pass.run();
    all.num[0] = std::move(r.num[0]);
    all.denom[0] = std::move(r.denom[0]);
  }
  if (M >= 2) {
    BoxCountPass pass(cloud.coords.data(), n, M, 2, M, grid.values, cfg);
    PairCounts r = pass.run();
    for (std::size_t mi = 1; mi < M; ++mi) {
      all.num[mi] = std::move(r.num[mi - 1]);
      all.denom[mi] = std::move(r.denom[mi - 1]);
    }
  }
  return all;
}

}  // namespace detail

}  // namespace tse
