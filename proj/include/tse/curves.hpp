#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "tse/errors.hpp"

namespace tse {

constexpr double kUndefined = std::numeric_limits<double>::quiet_NaN();

inline bool is_defined(double v) { return !std::isnan(v); }

// Logarithmic radius grid. The geometric factory spaces n values so that the
// ratio between consecutive entries is constant.
struct EpsGrid {
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }

  static EpsGrid geometric(double lo, double hi, std::size_t n) {
    if (!(lo > 0.0) || !(hi > lo) || n < 2)
      throw UsageError("geometric grid needs 0 < lo < hi and n >= 2");
    EpsGrid g;
    g.values.resize(n);
    const double step = std::log(hi / lo) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i)
      g.values[i] = lo * std::exp(step * static_cast<double>(i));
    g.values.front() = lo;
    g.values.back() = hi;
    return g;
  }

  static EpsGrid from_values(std::vector<double> vals) {
    EpsGrid g;
    g.values = std::move(vals);
    for (std::size_t i = 0; i < g.values.size(); ++i) {
      if (!(g.values[i] >= 0.0) || !std::isfinite(g.values[i]))
        throw UsageError("grid values must be finite and non-negative");
      if (i > 0 && !(g.values[i] > g.values[i - 1]))
        throw UsageError("grid values must be strictly increasing");
    }
    return g;
  }
};

inline void require_geometric(const EpsGrid& g) {
  if (g.values.empty()) throw EmptyGrid();
  if (g.values.size() < 2) return;
  for (double v : g.values)
    if (!(v > 0.0)) throw UsageError("geometric grid values must be positive");
  const double r0 = g.values[1] / g.values[0];
  for (std::size_t i = 1; i + 1 < g.values.size(); ++i) {
    const double r = g.values[i + 1] / g.values[i];
    if (std::abs(r / r0 - 1.0) > 1e-12)
      throw UsageError("grid is not geometric (ratio drifts at index " +
                       std::to_string(i) + ")");
  }
}

enum class Quantity { C2, H2, h2, deltaH, D2, E2, PI };

inline const char* quantity_name(Quantity q) {
  switch (q) {
    case Quantity::C2: return "C2";
    case Quantity::H2: return "H2";
    case Quantity::h2: return "h2";
    case Quantity::deltaH: return "deltaH";
    case Quantity::D2: return "D2";
    case Quantity::E2: return "E2";
    case Quantity::PI: return "PI";
  }
  return "?";
}

// One quantity evaluated over (embedding order, radius). values[mi][ei];
// NaN marks an undefined entry (e.g. empty correlation sum) and propagates
// through derived curves. counts/denoms optionally back correlation sums
// with the raw integer pair statistics; half_values carries half-data
// estimates where an operation produces them.
struct CurveFamily {
  Quantity quantity = Quantity::C2;
  std::vector<int> orders;
  EpsGrid grid;
  std::vector<std::vector<double>> values;
  std::vector<std::vector<std::uint64_t>> counts;
  std::vector<std::vector<std::uint64_t>> denoms;
  std::vector<std::vector<double>> half_values;

  std::size_t order_index(int m) const {
    for (std::size_t i = 0; i < orders.size(); ++i)
      if (orders[i] == m) return i;
    throw MissingOrder(m);
  }
  bool has_order(int m) const {
    return std::find(orders.begin(), orders.end(), m) != orders.end();
  }
  double at(int m, std::size_t ei) const { return values[order_index(m)][ei]; }
};

// H2_m = -ln C2_m, undefined where the correlation sum is zero.
inline CurveFamily entropy_curves(const CurveFamily& c2) {
  if (c2.quantity != Quantity::C2)
    throw UsageError("entropy_curves expects a C2 family");
  CurveFamily h = c2;
  h.quantity = Quantity::H2;
  for (auto& row : h.values)
    for (auto& v : row)
      v = (is_defined(v) && v > 0.0) ? -std::log(v) : kUndefined;
  return h;
}

// h2_m = H2_{m+1} - H2_m for the orders where both are present; h2_0 = H2_1.
inline CurveFamily conditional_entropy_curves(const CurveFamily& h2) {
  if (h2.quantity != Quantity::H2)
    throw UsageError("conditional_entropy_curves expects an H2 family");
  CurveFamily out;
  out.quantity = Quantity::h2;
  out.grid = h2.grid;
  const std::size_t ne = h2.grid.size();
  if (h2.has_order(1)) {
    out.orders.push_back(0);
    out.values.push_back(h2.values[h2.order_index(1)]);
  }
  for (int m : h2.orders) {
    if (!h2.has_order(m + 1)) continue;
    const auto& lo = h2.values[h2.order_index(m)];
    const auto& hi = h2.values[h2.order_index(m + 1)];
    std::vector<double> row(ne, kUndefined);
    for (std::size_t e = 0; e < ne; ++e)
      if (is_defined(lo[e]) && is_defined(hi[e])) row[e] = hi[e] - lo[e];
    out.orders.push_back(m);
    out.values.push_back(std::move(row));
  }
  if (out.orders.empty()) throw MissingOrder(1);
  return out;
}

// delta_h_m = h_{m-1} - h_m for m >= 1.
inline CurveFamily delta_h_curves(const CurveFamily& h2) {
  if (h2.quantity != Quantity::h2)
    throw UsageError("delta_h_curves expects an h2 family");
  CurveFamily out;
  out.quantity = Quantity::deltaH;
  out.grid = h2.grid;
  const std::size_t ne = h2.grid.size();
  for (int m : h2.orders) {
    if (m < 1 || !h2.has_order(m - 1)) continue;
    const auto& prev = h2.values[h2.order_index(m - 1)];
    const auto& cur = h2.values[h2.order_index(m)];
    std::vector<double> row(ne, kUndefined);
    for (std::size_t e = 0; e < ne; ++e)
      if (is_defined(prev[e]) && is_defined(cur[e])) row[e] = prev[e] - cur[e];
    out.orders.push_back(m);
    out.values.push_back(std::move(row));
  }
  if (out.orders.empty()) throw MissingOrder(1);
  return out;
}

// Scale-dependent correlation dimension: two-point difference quotient of
// ln C2 against ln eps, delta_steps grid steps apart.
inline CurveFamily dimension_curve(const CurveFamily& c2, std::size_t delta_steps = 1) {
  if (c2.quantity != Quantity::C2)
    throw UsageError("dimension_curve expects a C2 family");
  const std::size_t ne = c2.grid.size();
  if (delta_steps < 1 || ne < delta_steps + 1)
    throw GridTooSmall("dimension_curve needs at least delta_steps+1 grid points");
  CurveFamily out;
  out.quantity = Quantity::D2;
  out.grid = c2.grid;
  out.orders = c2.orders;
  out.values.assign(c2.orders.size(), std::vector<double>(ne, kUndefined));
  for (std::size_t mi = 0; mi < c2.orders.size(); ++mi) {
    for (std::size_t e = 0; e + delta_steps < ne; ++e) {
      const double a = c2.values[mi][e];
      const double b = c2.values[mi][e + delta_steps];
      if (!is_defined(a) || !is_defined(b) || a <= 0.0 || b <= 0.0) continue;
      out.values[mi][e] =
          std::log(b / a) / std::log(c2.grid[e + delta_steps] / c2.grid[e]);
    }
  }
  return out;
}

// E2_m = H2_m - m*h2_{m-1}. The telescoping identity
// E2_m = sum_{k=1}^{m-1} k*(h_{k-1}-h_k) must agree to 1e-9 nats; a larger
// discrepancy means the inputs were not built from one family.
inline CurveFamily excess_entropy_curves(const CurveFamily& h2full,
                                         const CurveFamily& h2cond) {
  if (h2full.quantity != Quantity::H2 || h2cond.quantity != Quantity::h2)
    throw UsageError("excess_entropy_curves expects (H2, h2) families");
  CurveFamily out;
  out.quantity = Quantity::E2;
  out.grid = h2full.grid;
  const std::size_t ne = out.grid.size();
  for (int m : h2full.orders) {
    if (!h2cond.has_order(m - 1)) continue;
    const auto& hm = h2full.values[h2full.order_index(m)];
    const auto& cond = h2cond.values[h2cond.order_index(m - 1)];
    std::vector<double> row(ne, kUndefined);
    for (std::size_t e = 0; e < ne; ++e) {
      if (!is_defined(hm[e]) || !is_defined(cond[e])) continue;
      row[e] = hm[e] - static_cast<double>(m) * cond[e];
      // identity check against the delta-h sum when every term is available
      double sum = 0.0;
      bool all = true;
      for (int k = 1; k < m && all; ++k) {
        if (!h2cond.has_order(k - 1) || !h2cond.has_order(k)) { all = false; break; }
        const double a = h2cond.values[h2cond.order_index(k - 1)][e];
        const double b = h2cond.values[h2cond.order_index(k)][e];
        if (!is_defined(a) || !is_defined(b)) { all = false; break; }
        sum += static_cast<double>(k) * (a - b);
      }
      if (all && std::abs(sum - row[e]) > 1e-9)
        throw NumericalError("excess entropy identity violated: |" +
                             std::to_string(sum) + " - " + std::to_string(row[e]) +
                             "| > 1e-9");
    }
    out.orders.push_back(m);
    out.values.push_back(std::move(row));
  }
  if (out.orders.empty()) throw MissingOrder(1);
  return out;
}

}  // namespace tse
