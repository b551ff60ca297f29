#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "tse/curves.hpp"
#include "tse/errors.hpp"
#include "tse/scalefit.hpp"

namespace tse {

struct DecompConfig {
  double s_min = 0.1;      // minimal slope for a middle-term order
  double kappa_max = 0.5;  // stochasticity cutoff for range inheritance
  int m_max = 2;           // highest delta-h order entering the sums
};

inline void validate(const DecompConfig& cfg) {
  if (!(cfg.s_min > 0.0) || !(cfg.s_min < 1.0))
    throw UsageError("s_min must lie in (0, 1)");
  if (!(cfg.kappa_max > 0.0) || !(cfg.kappa_max <= 1.0))
    throw UsageError("kappa_max must lie in (0, 1]");
  if (cfg.m_max < 2) throw UsageError("m_max must be >= 2");
}

// Middle-term range at one radius: orders [m_l, m_u] whose slope exceeds
// s_min. An empty range is encoded as (1, 0). kappa = 1 - sum of the range's
// slopes, clamped to [0, 1] (kappa_raw keeps the unclamped value); kappa = 1
// when the range is empty. stochastic marks radii whose own kappa reached
// kappa_max; their range is inherited from the next larger radius that is
// deterministic, when one exists.
struct MtRange {
  int m_l = 1, m_u = 0;
  double kappa = 1.0;
  double kappa_raw = 1.0;
  bool stochastic = false;

  bool empty() const { return m_u < m_l; }
};

inline std::vector<MtRange> mt_range(const PreprocessedCurves& pre,
                                     const DecompConfig& cfg) {
  validate(cfg);
  const std::size_t ne = pre.delta_h.grid.size();
  std::vector<std::size_t> order_idx;
  for (int k = 1; k <= cfg.m_max; ++k)
    order_idx.push_back(pre.delta_h.order_index(k));

  std::vector<MtRange> ranges(ne);
  for (std::size_t e = 0; e < ne; ++e) {
    // maximal run of orders with slope above s_min; ties prefer the larger
    // total slope, then the lower starting order
    int best_l = 1, best_u = 0;
    double best_sum = 0.0;
    int k = 1;
    while (k <= cfg.m_max) {
      const double s = pre.slope_field[order_idx[static_cast<std::size_t>(k - 1)]][e];
      if (!is_defined(s) || !(s > cfg.s_min)) { ++k; continue; }
      int run_end = k;
      double run_sum = 0.0;
      while (run_end <= cfg.m_max) {
        const double rs =
            pre.slope_field[order_idx[static_cast<std::size_t>(run_end - 1)]][e];
        if (!is_defined(rs) || !(rs > cfg.s_min)) break;
        run_sum += rs;
        ++run_end;
      }
      const int run_len = run_end - k;
      const int best_len = best_u - best_l + 1;
      if (run_len > best_len || (run_len == best_len && run_sum > best_sum)) {
        best_l = k;
        best_u = run_end - 1;
        best_sum = run_sum;
      }
      k = run_end;
    }
    MtRange& r = ranges[e];
    if (best_u >= best_l) {
      r.m_l = best_l;
      r.m_u = best_u;
      r.kappa_raw = 1.0 - best_sum;
      r.kappa = std::clamp(r.kappa_raw, 0.0, 1.0);
    }
  }

  // inherit the split from the next larger deterministic radius
  std::vector<MtRange> out = ranges;
  for (std::size_t e = 0; e < ne; ++e) {
    if (ranges[e].kappa < cfg.kappa_max) continue;
    out[e].stochastic = true;
    for (std::size_t j = e + 1; j < ne; ++j) {
      if (ranges[j].kappa < cfg.kappa_max) {
        out[e].m_l = ranges[j].m_l;
        out[e].m_u = ranges[j].m_u;
        break;
      }
    }
    // no deterministic radius above: the empty range and flag remain
  }
  return out;
}

// Plateau constants c_m^MT(eps) = min of delta h_m over (eps, eps*], where
// eps* is the smallest larger radius with near-zero slope (below s_min);
// 0 when no such radius exists. Floored at 0.
inline std::vector<std::vector<double>> mt_constants(const PreprocessedCurves& pre,
                                                     const DecompConfig& cfg) {
  validate(cfg);
  const std::size_t ne = pre.delta_h.grid.size();
  std::vector<std::vector<double>> c(static_cast<std::size_t>(cfg.m_max),
                                     std::vector<double>(ne, 0.0));
  for (int k = 1; k <= cfg.m_max; ++k) {
    const std::size_t mi = pre.delta_h.order_index(k);
    const auto& slopes = pre.slope_field[mi];
    const auto& vals = pre.delta_h.values[mi];
    for (std::size_t e = 0; e < ne; ++e) {
      std::size_t star = ne;
      for (std::size_t j = e + 1; j < ne; ++j) {
        if (is_defined(slopes[j]) && slopes[j] < cfg.s_min) { star = j; break; }
      }
      if (star == ne) continue;
      double lowest = kUndefined;
      for (std::size_t j = e + 1; j <= star; ++j) {
        if (!is_defined(vals[j])) continue;
        if (!is_defined(lowest) || vals[j] < lowest) lowest = vals[j];
      }
      if (is_defined(lowest))
        c[static_cast<std::size_t>(k - 1)][e] = std::max(0.0, lowest);
    }
  }
  return c;
}

struct EpsRecord {
  double epsilon = 0.0;
  double e_state = 0.0, e_eps = 0.0, e_mem = 0.0, e_total = 0.0;
  int m_l = 1, m_u = 0;
  double kappa = 1.0, kappa_raw = 1.0;
  bool stochastic = false;
};

struct QualityRecord {
  double epsilon = 0.0;
  double kappa = 1.0;
  double negative = 0.0;      // fraction of delta h below zero
  double no_fit = 0.0;        // fraction not backed by a valid fit
  double extrapolated = 0.0;  // fraction filled by extrapolation
};

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

struct WindowSummary {
  double eps_lo = 0.0, eps_hi = 0.0;
  MeanStd e_state, e_mem, e_core;
  double dimension = 0.0;  // slope of E_total against -ln eps in the window
  double offset = 0.0;     // E_total at eps = 1 by that fit
};

struct DecompositionReport {
  DecompConfig config;
  EpsGrid grid;
  std::vector<EpsRecord> per_eps;
  std::vector<QualityRecord> quality;
  std::vector<WindowSummary> windows;
};

// Splits E_total = sum k*delta h_k into the state, eps-dependent and memory
// parts using the middle-term range and plateau constants. Undefined delta-h
// entries contribute to no term, so the three parts sum to E_total exactly
// at every radius. An empty range puts the whole sum into E_mem.
inline DecompositionReport decompose(const PreprocessedCurves& pre,
                                     const std::vector<MtRange>& mt,
                                     const std::vector<std::vector<double>>& c_mt,
                                     const DecompConfig& cfg) {
  validate(cfg);
  const std::size_t ne = pre.delta_h.grid.size();
  if (mt.size() != ne) throw UsageError("mt ranges and grid size differ");

  DecompositionReport report;
  report.config = cfg;
  report.grid = pre.delta_h.grid;
  report.per_eps.resize(ne);
  report.quality.resize(ne);

  std::vector<std::size_t> order_idx;
  for (int k = 1; k <= cfg.m_max; ++k)
    order_idx.push_back(pre.delta_h.order_index(k));

  for (std::size_t e = 0; e < ne; ++e) {
    EpsRecord& rec = report.per_eps[e];
    rec.epsilon = pre.delta_h.grid[e];
    rec.m_l = mt[e].m_l;
    rec.m_u = mt[e].m_u;
    rec.kappa = mt[e].kappa;
    rec.kappa_raw = mt[e].kappa_raw;
    rec.stochastic = mt[e].stochastic;

    QualityRecord& qual = report.quality[e];
    qual.epsilon = rec.epsilon;
    qual.kappa = mt[e].kappa;

    const double im = 1.0 / static_cast<double>(cfg.m_max);
    for (int k = 1; k <= cfg.m_max; ++k) {
      const std::size_t mi = order_idx[static_cast<std::size_t>(k - 1)];
      const double dh = pre.delta_h.values[mi][e];
      const PointFlag flag = pre.flags[mi][e];
      if (flag != PointFlag::from_fit) qual.no_fit += im;
      if (flag == PointFlag::extrapolated) qual.extrapolated += im;
      if (!is_defined(dh)) continue;
      if (dh < 0.0) qual.negative += im;
      const double kd = static_cast<double>(k);
      const double term = kd * dh;
      rec.e_total += term;
      if (k < rec.m_l) {
        rec.e_state += term;
      } else if (k <= rec.m_u) {
        const double kc = kd * c_mt[static_cast<std::size_t>(k - 1)][e];
        rec.e_state += kc;
        rec.e_eps += term - kc;
      } else {
        rec.e_mem += term;
      }
    }
  }
  return report;
}

inline QualityRecord quality_report(const DecompositionReport& report,
                                    std::size_t eps_index) {
  return report.quality.at(eps_index);
}

// Mean and population standard deviation of the complexity parts over the
// grid points inside [eps_lo, eps_hi], plus the (dimension, offset) fit of
// E_total against -ln eps there.
inline WindowSummary summarize_window(const DecompositionReport& report,
                                      double eps_lo, double eps_hi) {
  std::vector<std::size_t> idx;
  for (std::size_t e = 0; e < report.grid.size(); ++e)
    if (report.grid[e] >= eps_lo && report.grid[e] <= eps_hi) idx.push_back(e);
  if (idx.size() < 3)
    throw WindowTooSmall("window [" + std::to_string(eps_lo) + ", " +
                         std::to_string(eps_hi) + "] covers fewer than 3 grid points");

  auto mean_std = [&](auto value_of) {
    MeanStd ms;
    for (std::size_t e : idx) ms.mean += value_of(report.per_eps[e]);
    ms.mean /= static_cast<double>(idx.size());
    for (std::size_t e : idx) {
      const double d = value_of(report.per_eps[e]) - ms.mean;
      ms.std += d * d;
    }
    ms.std = std::sqrt(ms.std / static_cast<double>(idx.size()));
    return ms;
  };

  WindowSummary w;
  w.eps_lo = eps_lo;
  w.eps_hi = eps_hi;
  w.e_state = mean_std([](const EpsRecord& r) { return r.e_state; });
  w.e_mem = mean_std([](const EpsRecord& r) { return r.e_mem; });
  w.e_core = mean_std([](const EpsRecord& r) { return r.e_state + r.e_mem; });

  double sx = 0.0, sv = 0.0;
  for (std::size_t e : idx) {
    sx += -std::log(report.grid[e]);
    sv += report.per_eps[e].e_total;
  }
  const double mx = sx / static_cast<double>(idx.size());
  const double mv = sv / static_cast<double>(idx.size());
  double sxx = 0.0, sxv = 0.0;
  for (std::size_t e : idx) {
    const double dx = -std::log(report.grid[e]) - mx;
    sxx += dx * dx;
    sxv += dx * (report.per_eps[e].e_total - mv);
  }
  w.dimension = sxv / sxx;
  w.offset = mv - w.dimension * mx;
  return w;
}

// Crossover radius between the stochastic and deterministic scaling ranges
// of a conditional-entropy curve h_m(eps): with a unit-slope segment
// h ~ h_c - ln eps at small radii and a plateau h ~ h_KS above it,
// eps* = exp(h_c - h_KS). Throws NoUnitSlopeRange / NoPlateau when the curve
// does not show the corresponding segment.
inline double crossover_scale(const CurveFamily& cond, int m,
                              double s_min = 0.1, std::size_t window = 10) {
  if (cond.quantity != Quantity::h2)
    throw UsageError("crossover_scale expects an h2 family");
  const std::size_t mi = cond.order_index(m);
  const std::vector<double>& values = cond.values[mi];
  std::vector<SegmentFit> cands = candidate_fits(values, cond.grid, m, window);
  if (cands.size() < 4) throw CurveTooShort("too few candidate windows");
  std::vector<SegmentFit> fits =
      extend_and_prune(cands, quality_threshold(cands), values, cond.grid);

  const SegmentFit* unit = nullptr;
  for (const auto& f : fits)
    if (std::abs(f.slope - 1.0) < 0.2 && (!unit || f.lo < unit->lo)) unit = &f;
  if (!unit)
    throw NoUnitSlopeRange("h_" + std::to_string(m) +
                           " has no segment of slope near 1");
  const SegmentFit* plateau = nullptr;
  for (const auto& f : fits)
    if (std::abs(f.slope) < s_min && f.lo > unit->hi &&
        (!plateau || f.lo < plateau->lo))
      plateau = &f;
  if (!plateau)
    throw NoPlateau("h_" + std::to_string(m) +
                    " has no plateau above the unit-slope range");

  double h_c = 0.0;
  for (std::size_t e = unit->lo; e <= unit->hi; ++e)
    h_c += unit->value_at(cond.grid[e]) + std::log(cond.grid[e]);
  h_c /= static_cast<double>(unit->length());
  double h_ks = 0.0;
  for (std::size_t e = plateau->lo; e <= plateau->hi; ++e)
    h_ks += plateau->value_at(cond.grid[e]);
  h_ks /= static_cast<double>(plateau->length());
  return std::exp(h_c - h_ks);
}

}  // namespace tse
