#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "tse/curves.hpp"
#include "tse/errors.hpp"

namespace tse {

// Log-linear segment: value ~ offset - slope * ln(eps) over the inclusive
// grid-index range [lo, hi]. q is the sum of squared residuals.
struct SegmentFit {
  int m = 0;
  std::size_t lo = 0, hi = 0;
  double offset = 0.0;
  double slope = 0.0;
  double q = 0.0;

  std::size_t length() const { return hi - lo + 1; }
  double value_at(double eps) const { return offset - slope * std::log(eps); }
};

namespace detail {

// Least squares of v against ln(eps) over [lo, hi]; requires every value
// defined there.
inline SegmentFit fit_segment(const std::vector<double>& values,
                              const EpsGrid& grid, std::size_t lo,
                              std::size_t hi, int m) {
  const std::size_t n = hi - lo + 1;
  double sx = 0.0, sv = 0.0;
  for (std::size_t i = lo; i <= hi; ++i) {
    sx += std::log(grid[i]);
    sv += values[i];
  }
  const double mx = sx / static_cast<double>(n);
  const double mv = sv / static_cast<double>(n);
  double sxx = 0.0, sxv = 0.0;
  for (std::size_t i = lo; i <= hi; ++i) {
    const double dx = std::log(grid[i]) - mx;
    sxx += dx * dx;
    sxv += dx * (values[i] - mv);
  }
  const double b = sxv / sxx;  // d value / d ln(eps)
  SegmentFit fit;
  fit.m = m;
  fit.lo = lo;
  fit.hi = hi;
  fit.slope = -b;
  fit.offset = mv - b * mx;
  double q = 0.0;
  for (std::size_t i = lo; i <= hi; ++i) {
    const double r = values[i] - (fit.offset - fit.slope * std::log(grid[i]));
    q += r * r;
  }
  fit.q = q;
  return fit;
}

}  // namespace detail

// All fits over contiguous windows of `window` defined grid points. Windows
// containing an undefined value are skipped entirely.
inline std::vector<SegmentFit> candidate_fits(const std::vector<double>& values,
                                              const EpsGrid& grid, int m,
                                              std::size_t window = 10) {
  if (window < 3) throw UsageError("fit window must span at least 3 points");
  if (values.size() != grid.size())
    throw UsageError("curve and grid sizes differ");
  std::vector<SegmentFit> fits;
  if (values.size() < window)
    throw CurveTooShort("curve shorter than the fit window");
  for (std::size_t lo = 0; lo + window <= values.size(); ++lo) {
    bool ok = true;
    for (std::size_t i = lo; i < lo + window; ++i)
      if (!is_defined(values[i])) { ok = false; break; }
    if (ok) fits.push_back(detail::fit_segment(values, grid, lo, lo + window - 1, m));
  }
  if (fits.empty())
    throw CurveTooShort("no window of " + std::to_string(window) +
                        " consecutive defined points");
  return fits;
}

// q_max = 25% percentile of the candidate residuals plus a tenth of their
// population standard deviation. The percentile picks a level among the good
// fits; the standard-deviation term lifts it above the plateau they form.
inline double quality_threshold(const std::vector<SegmentFit>& fits) {
  if (fits.size() < 4) throw TooFewFits(fits.size());
  std::vector<double> qs;
  qs.reserve(fits.size());
  for (const auto& f : fits) qs.push_back(f.q);
  std::sort(qs.begin(), qs.end());
  const double pos = 0.25 * static_cast<double>(qs.size() - 1);
  const auto k = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(k);
  const double p25 =
      k + 1 < qs.size() ? qs[k] + frac * (qs[k + 1] - qs[k]) : qs[k];
  double mean = 0.0;
  for (double q : qs) mean += q;
  mean /= static_cast<double>(qs.size());
  double var = 0.0;
  for (double q : qs) var += (q - mean) * (q - mean);
  var /= static_cast<double>(qs.size());
  return p25 + 0.1 * std::sqrt(var);
}

// Keeps fits with q < q_max, extends each one's upper range index as far as
// the refitted quality stays below the threshold (extension stops at
// undefined values), then discards the shorter fit of every pair overlapping
// more than 30% of the shorter one. Ties discard the higher-q fit, then the
// one starting higher.
inline std::vector<SegmentFit> extend_and_prune(const std::vector<SegmentFit>& fits,
                                                double q_max,
                                                const std::vector<double>& values,
                                                const EpsGrid& grid) {
  std::vector<SegmentFit> good;
  for (const auto& f : fits) {
    if (!(f.q < q_max)) continue;
    std::size_t best_hi = f.hi;
    for (std::size_t k = f.hi + 1; k < values.size(); ++k) {
      if (!is_defined(values[k])) break;
      if (detail::fit_segment(values, grid, f.lo, k, f.m).q < q_max) best_hi = k;
    }
    good.push_back(best_hi == f.hi ? f
                                   : detail::fit_segment(values, grid, f.lo,
                                                         best_hi, f.m));
  }
  std::sort(good.begin(), good.end(), [](const SegmentFit& a, const SegmentFit& b) {
    if (a.lo != b.lo) return a.lo < b.lo;
    if (a.hi != b.hi) return a.hi < b.hi;
    return a.q < b.q;
  });
  good.erase(std::unique(good.begin(), good.end(),
                         [](const SegmentFit& a, const SegmentFit& b) {
                           return a.lo == b.lo && a.hi == b.hi;
                         }),
             good.end());

  auto overlap_fraction = [](const SegmentFit& a, const SegmentFit& b) {
    const std::size_t lo = std::max(a.lo, b.lo);
    const std::size_t hi = std::min(a.hi, b.hi);
    if (hi < lo) return 0.0;
    return static_cast<double>(hi - lo + 1) /
           static_cast<double>(std::min(a.length(), b.length()));
  };

  bool changed = true;
  while (changed && good.size() > 1) {
    changed = false;
    double worst = 0.3;
    std::size_t wa = 0, wb = 0;
    for (std::size_t a = 0; a < good.size(); ++a) {
      for (std::size_t b = a + 1; b < good.size(); ++b) {
        const double f = overlap_fraction(good[a], good[b]);
        if (f > worst) {
          worst = f;
          wa = a;
          wb = b;
          changed = true;
        }
      }
    }
    if (!changed) break;
    const SegmentFit& A = good[wa];
    const SegmentFit& B = good[wb];
    std::size_t drop;
    if (A.length() != B.length()) drop = A.length() < B.length() ? wa : wb;
    else if (A.q != B.q) drop = A.q > B.q ? wa : wb;
    else drop = A.lo >= B.lo ? wa : wb;
    good.erase(good.begin() + static_cast<std::ptrdiff_t>(drop));
  }
  return good;
}

enum class PointFlag : std::uint8_t { missing, raw, from_fit, extrapolated };

// delta-h curves after fit substitution and extrapolation, with the slope
// field s^(m, eps) = d(delta h)/d(-ln eps) and per-point provenance flags.
struct PreprocessedCurves {
  CurveFamily delta_h;
  std::vector<std::vector<SegmentFit>> fits;      // per order index
  std::vector<std::vector<double>> slope_field;   // [mi][ei], NaN undefined
  std::vector<std::vector<PointFlag>> flags;      // [mi][ei]
};

namespace detail {

// Centered five-point least-squares slope against -ln eps, shrinking at the
// boundaries and skipping undefined neighbors.
inline double local_slope(const std::vector<double>& values, const EpsGrid& grid,
                          std::size_t e) {
  const std::size_t lo = e >= 2 ? e - 2 : 0;
  const std::size_t hi = std::min(values.size() - 1, e + 2);
  double sx = 0.0, sv = 0.0;
  std::size_t n = 0;
  for (std::size_t i = lo; i <= hi; ++i) {
    if (!is_defined(values[i])) continue;
    sx += -std::log(grid[i]);
    sv += values[i];
    ++n;
  }
  if (n < 2) return kUndefined;
  const double mx = sx / static_cast<double>(n);
  const double mv = sv / static_cast<double>(n);
  double sxx = 0.0, sxv = 0.0;
  for (std::size_t i = lo; i <= hi; ++i) {
    if (!is_defined(values[i])) continue;
    const double dx = -std::log(grid[i]) - mx;
    sxx += dx * dx;
    sxv += dx * (values[i] - mv);
  }
  if (!(sxx > 0.0)) return kUndefined;
  return sxv / sxx;
}

}  // namespace detail

// Fit pipeline per order: candidates, threshold, extension, pruning; then
// the data is substituted by the fits on their ranges and extrapolated below
// the lowest fit. The slope field uses the covering fit's slope where one
// exists and the local five-point slope of the processed data elsewhere;
// slopes in (-0.02, 0) are snapped to 0 so that fit noise cannot produce
// spurious negative stochasticity contributions (the fits themselves keep
// their value).
inline PreprocessedCurves preprocess(const CurveFamily& delta_h,
                                     std::size_t window = 10) {
  if (delta_h.quantity != Quantity::deltaH)
    throw UsageError("preprocess expects a deltaH family");
  require_geometric(delta_h.grid);
  const std::size_t ne = delta_h.grid.size();
  const std::size_t nm = delta_h.orders.size();

  PreprocessedCurves out;
  out.delta_h = delta_h;
  out.fits.resize(nm);
  out.slope_field.assign(nm, std::vector<double>(ne, kUndefined));
  out.flags.assign(nm, std::vector<PointFlag>(ne, PointFlag::missing));

  for (std::size_t mi = 0; mi < nm; ++mi) {
    const std::vector<double>& raw = delta_h.values[mi];
    std::vector<SegmentFit> fits;
    try {
      std::vector<SegmentFit> cands =
          candidate_fits(raw, delta_h.grid, delta_h.orders[mi], window);
      if (cands.size() >= 4)
        fits = extend_and_prune(cands, quality_threshold(cands), raw, delta_h.grid);
    } catch (const CurveTooShort&) {
      // no fit pipeline for this order; raw values pass through
    }

    // per-point covering fit: lowest q wins, then the lower range start
    std::vector<int> cover(ne, -1);
    for (std::size_t fi = 0; fi < fits.size(); ++fi) {
      for (std::size_t e = fits[fi].lo; e <= fits[fi].hi; ++e) {
        if (cover[e] < 0) { cover[e] = static_cast<int>(fi); continue; }
        const SegmentFit& have = fits[static_cast<std::size_t>(cover[e])];
        if (fits[fi].q < have.q ||
            (fits[fi].q == have.q && fits[fi].lo < have.lo))
          cover[e] = static_cast<int>(fi);
      }
    }
    const SegmentFit* lowest =
        fits.empty() ? nullptr
                     : &*std::min_element(fits.begin(), fits.end(),
                                          [](const SegmentFit& a, const SegmentFit& b) {
                                            return a.lo < b.lo;
                                          });

    std::vector<double>& vals = out.delta_h.values[mi];
    for (std::size_t e = 0; e < ne; ++e) {
      if (cover[e] >= 0) {
        const SegmentFit& f = fits[static_cast<std::size_t>(cover[e])];
        vals[e] = f.value_at(delta_h.grid[e]);
        out.flags[mi][e] = PointFlag::from_fit;
        out.slope_field[mi][e] = f.slope;
      } else if (lowest && e < lowest->lo) {
        vals[e] = lowest->value_at(delta_h.grid[e]);
        out.flags[mi][e] = PointFlag::extrapolated;
        out.slope_field[mi][e] = lowest->slope;
      } else if (is_defined(raw[e])) {
        out.flags[mi][e] = PointFlag::raw;
      }
    }
    for (std::size_t e = 0; e < ne; ++e)
      if (out.flags[mi][e] == PointFlag::raw)
        out.slope_field[mi][e] = detail::local_slope(vals, delta_h.grid, e);
    for (double& s : out.slope_field[mi])
      if (is_defined(s) && s < 0.0 && s > -0.02) s = 0.0;
    out.fits[mi] = std::move(fits);
  }
  return out;
}

}  // namespace tse
