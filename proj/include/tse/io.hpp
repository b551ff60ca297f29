#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "tse/curves.hpp"
#include "tse/decomp.hpp"
#include "tse/errors.hpp"
#include "tse/scalefit.hpp"

namespace tse {

namespace detail {
inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}
inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  return out;
}
}  // namespace detail

// Long-format curve CSV: one row per (m, epsilon); undefined values are
// empty fields. `scale` converts the value column (1/ln 2 for bits).
inline void write_curves(const std::string& path, const CurveFamily& fam,
                         const std::vector<std::string>& comments = {},
                         double scale = 1.0) {
  auto out = detail::open_out(path);
  for (const auto& c : comments) out << "# " << c << "\n";
  out << "# quantity=" << quantity_name(fam.quantity) << "\n";
  out << "m,epsilon,value,count\n";
  for (std::size_t mi = 0; mi < fam.orders.size(); ++mi) {
    for (std::size_t e = 0; e < fam.grid.size(); ++e) {
      out << fam.orders[mi] << ',' << detail::fmt(fam.grid[e]) << ',';
      const double v = fam.values[mi][e];
      if (is_defined(v)) out << detail::fmt(v * scale);
      out << ',';
      if (!fam.counts.empty()) out << fam.counts[mi][e];
      out << '\n';
    }
  }
  if (!out) throw DataError("write failed: " + path);
}

// Predictive-information CSV over the noise grid, with half-data values.
inline void write_pi(const std::string& path, const CurveFamily& fam,
                     const std::vector<std::string>& comments = {},
                     double scale = 1.0) {
  if (fam.quantity != Quantity::PI)
    throw UsageError("write_pi expects a PI family");
  auto out = detail::open_out(path);
  for (const auto& c : comments) out << "# " << c << "\n";
  out << "m,eta,pi_nats,pi_half_nats\n";
  for (std::size_t mi = 0; mi < fam.orders.size(); ++mi) {
    for (std::size_t e = 0; e < fam.grid.size(); ++e) {
      out << fam.orders[mi] << ',' << detail::fmt(fam.grid[e]) << ',';
      if (is_defined(fam.values[mi][e]))
        out << detail::fmt(fam.values[mi][e] * scale);
      out << ',';
      if (!fam.half_values.empty() && is_defined(fam.half_values[mi][e]))
        out << detail::fmt(fam.half_values[mi][e] * scale);
      out << '\n';
    }
  }
  if (!out) throw DataError("write failed: " + path);
}

inline void write_fits(const std::string& path, const PreprocessedCurves& pre,
                       const std::vector<std::string>& comments = {}) {
  auto out = detail::open_out(path);
  for (const auto& c : comments) out << "# " << c << "\n";
  out << "m,i_l,i_u,eps_l,eps_u,offset,slope,q\n";
  for (const auto& fits : pre.fits) {
    for (const auto& f : fits) {
      out << f.m << ',' << f.lo << ',' << f.hi << ','
          << detail::fmt(pre.delta_h.grid[f.lo]) << ','
          << detail::fmt(pre.delta_h.grid[f.hi]) << ','
          << detail::fmt(f.offset) << ',' << detail::fmt(f.slope) << ','
          << detail::fmt(f.q) << '\n';
    }
  }
  if (!out) throw DataError("write failed: " + path);
}

inline nlohmann::json report_to_json(const DecompositionReport& report,
                                     double scale = 1.0) {
  nlohmann::json j;
  j["config"] = {{"s_min", report.config.s_min},
                 {"kappa_max", report.config.kappa_max},
                 {"m_max", report.config.m_max}};
  j["per_eps"] = nlohmann::json::array();
  for (const auto& r : report.per_eps) {
    j["per_eps"].push_back({{"epsilon", r.epsilon},
                            {"E_state", r.e_state * scale},
                            {"E_eps", r.e_eps * scale},
                            {"E_mem", r.e_mem * scale},
                            {"E_total", r.e_total * scale},
                            {"m_l", r.m_l},
                            {"m_u", r.m_u},
                            {"kappa", r.kappa},
                            {"kappa_raw", r.kappa_raw},
                            {"stochastic", r.stochastic}});
  }
  j["quality"] = nlohmann::json::array();
  for (const auto& q : report.quality) {
    j["quality"].push_back({{"epsilon", q.epsilon},
                            {"kappa", q.kappa},
                            {"negative", q.negative},
                            {"no_fit", q.no_fit},
                            {"extrapolated", q.extrapolated}});
  }
  j["windows"] = nlohmann::json::array();
  for (const auto& w : report.windows) {
    j["windows"].push_back({{"eps_lo", w.eps_lo},
                            {"eps_hi", w.eps_hi},
                            {"E_state_mean", w.e_state.mean * scale},
                            {"E_state_std", w.e_state.std * scale},
                            {"E_mem_mean", w.e_mem.mean * scale},
                            {"E_mem_std", w.e_mem.std * scale},
                            {"E_core_mean", w.e_core.mean * scale},
                            {"E_core_std", w.e_core.std * scale},
                            {"D", w.dimension},
                            {"const", w.offset * scale}});
  }
  return j;
}

inline void write_report_json(const std::string& path,
                              const DecompositionReport& report,
                              const nlohmann::json& config_echo,
                              double scale = 1.0) {
  auto out = detail::open_out(path);
  nlohmann::json j = report_to_json(report, scale);
  j["cli_config"] = config_echo;
  out << j.dump(2) << "\n";
  if (!out) throw DataError("write failed: " + path);
}

inline void write_report_csv(const std::string& path,
                             const DecompositionReport& report,
                             const std::vector<std::string>& comments = {},
                             double scale = 1.0) {
  auto out = detail::open_out(path);
  for (const auto& c : comments) out << "# " << c << "\n";
  out << "epsilon,E_state,E_eps,E_mem,E_total,m_l,m_u,kappa,stochastic,neg,"
         "nofit,extrap\n";
  for (std::size_t e = 0; e < report.per_eps.size(); ++e) {
    const auto& r = report.per_eps[e];
    const auto& q = report.quality[e];
    out << detail::fmt(r.epsilon) << ',' << detail::fmt(r.e_state * scale)
        << ',' << detail::fmt(r.e_eps * scale) << ','
        << detail::fmt(r.e_mem * scale) << ',' << detail::fmt(r.e_total * scale)
        << ',' << r.m_l << ',' << r.m_u << ',' << detail::fmt(r.kappa) << ','
        << (r.stochastic ? 1 : 0) << ',' << detail::fmt(q.negative) << ','
        << detail::fmt(q.no_fit) << ',' << detail::fmt(q.extrapolated) << '\n';
  }
  if (!out) throw DataError("write failed: " + path);
}

}  // namespace tse
