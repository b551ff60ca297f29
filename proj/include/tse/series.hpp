#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tse/errors.hpp"
#include "tse/rng.hpp"

namespace tse {

// Uniformly sampled scalar time series. dt is informational (the analysis
// operates in sample units); label records provenance.
struct ScalarSeries {
  std::vector<double> samples;
  double dt = 1.0;
  std::string label;

  std::size_t size() const { return samples.size(); }
};

inline void validate_series(const ScalarSeries& s) {
  if (s.samples.size() < 2) throw EmptySeries();
  if (!(s.dt > 0.0) || !std::isfinite(s.dt))
    throw DataError("sampling interval dt must be positive and finite");
  for (double v : s.samples)
    if (!std::isfinite(v)) throw DataError("series contains a non-finite sample");
}

// Delay-embedding parameters: m coordinates spaced tau samples apart.
struct EmbeddingSpec {
  int m = 1;
  int tau = 1;
};

// Set of m-dimensional delay vectors, row-major. origin_indices[i] is the
// sample index of point i's most recent coordinate; coordinate 0 is the most
// recent sample and coordinate c is the sample tau*c steps earlier.
struct PointCloud {
  std::size_t dim = 0;
  std::vector<double> coords;                 // size() * dim, row-major
  std::vector<std::size_t> origin_indices;

  std::size_t size() const { return origin_indices.size(); }
  std::span<const double> point(std::size_t i) const {
    return {coords.data() + i * dim, dim};
  }
};

inline ScalarSeries rescale(const ScalarSeries& s, double factor) {
  if (!(factor > 0.0) || !std::isfinite(factor)) throw InvalidFactor(factor);
  ScalarSeries out = s;
  for (double& v : out.samples) v *= factor;
  return out;
}

inline PointCloud delay_embed(const ScalarSeries& s, const EmbeddingSpec& spec) {
  if (spec.m < 1 || spec.tau < 1)
    throw UsageError("embedding requires m >= 1 and tau >= 1");
  const std::size_t n = s.samples.size();
  const std::size_t span = static_cast<std::size_t>(spec.m - 1) *
                           static_cast<std::size_t>(spec.tau);
  if (n < span + 2)
    throw SeriesTooShort("series of length " + std::to_string(n) +
                         " yields fewer than 2 points at m=" +
                         std::to_string(spec.m) + ", tau=" + std::to_string(spec.tau));
  const std::size_t count = n - span;
  PointCloud cloud;
  cloud.dim = static_cast<std::size_t>(spec.m);
  cloud.coords.resize(count * cloud.dim);
  cloud.origin_indices.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t t = span + i;
    cloud.origin_indices[i] = t;
    for (std::size_t c = 0; c < cloud.dim; ++c)
      cloud.coords[i * cloud.dim + c] =
          s.samples[t - c * static_cast<std::size_t>(spec.tau)];
  }
  return cloud;
}

// First half of a point cloud; used for half-data error indicators.
inline PointCloud first_half(const PointCloud& cloud) {
  const std::size_t n = cloud.size() / 2;
  if (n < 2) throw TooFewPoints("half cloud has fewer than 2 points");
  PointCloud out;
  out.dim = cloud.dim;
  out.coords.assign(cloud.coords.begin(),
                    cloud.coords.begin() + static_cast<std::ptrdiff_t>(n * cloud.dim));
  out.origin_indices.assign(cloud.origin_indices.begin(),
                            cloud.origin_indices.begin() + static_cast<std::ptrdiff_t>(n));
  return out;
}

// Adds an independent U[0, eta] draw to every sample. Each sample receives
// one draw, shared by all delay vectors that contain it.
inline ScalarSeries add_uniform_noise(const ScalarSeries& s, double eta,
                                      std::uint64_t seed) {
  if (eta < 0.0 || !std::isfinite(eta)) throw NegativeEta(eta);
  if (eta == 0.0) return s;
  ScalarSeries out = s;
  SplitMix64 rng(seed);
  for (double& v : out.samples) v += rng.uniform(eta);
  return out;
}

inline double peak_to_peak(const ScalarSeries& s) {
  double lo = s.samples[0], hi = s.samples[0];
  for (double v : s.samples) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return hi - lo;
}

namespace detail {
inline bool parse_double(std::string_view sv, double& out) {
  const char* b = sv.data();
  const char* e = sv.data() + sv.size();
  while (b < e && (*b == ' ' || *b == '\t')) ++b;
  while (e > b && (*(e - 1) == ' ' || *(e - 1) == '\t' || *(e - 1) == '\r')) --e;
  auto [p, ec] = std::from_chars(b, e, out);
  return ec == std::errc() && p == e && b != e;
}
}  // namespace detail

// Reads one column of a comma-separated file, one sample per row. Lines
// starting with '#' are comments; the directive `# dt=<float>` sets the
// sampling interval (default 1.0). Blank lines are skipped.
inline ScalarSeries load_series(const std::string& path, std::size_t column = 0) {
  std::ifstream in(path);
  if (!in) throw FileNotFound(path);
  ScalarSeries series;
  series.label = path;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string_view sv(line);
    while (!sv.empty() && (sv.front() == ' ' || sv.front() == '\t')) sv.remove_prefix(1);
    if (sv.empty()) continue;
    if (sv.front() == '#') {
      auto eq = sv.find("dt=");
      if (eq != std::string_view::npos) {
        double dt;
        auto rest = sv.substr(eq + 3);
        auto end = rest.find_first_of(" \t,");
        if (detail::parse_double(rest.substr(0, end), dt) && dt > 0.0)
          series.dt = dt;
      }
      continue;
    }
    // select the requested column
    std::size_t col = 0;
    std::string_view cell = sv;
    while (col < column) {
      auto comma = cell.find(',');
      if (comma == std::string_view::npos)
        throw ParseError(lineno, column, "row has too few columns");
      cell.remove_prefix(comma + 1);
      ++col;
    }
    auto comma = cell.find(',');
    if (comma != std::string_view::npos) cell = cell.substr(0, comma);
    double v;
    if (!detail::parse_double(cell, v) || !std::isfinite(v))
      throw ParseError(lineno, column, "cell '" + std::string(cell) +
                                           "' is not a finite number");
    series.samples.push_back(v);
  }
  if (series.samples.size() < 2) throw EmptySeries();
  return series;
}

// Writes a series in the format load_series reads, with optional comment
// lines (written verbatim after a '# ' prefix) and the dt directive.
inline void write_series(const std::string& path, const ScalarSeries& s,
                         const std::vector<std::string>& comments = {}) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  for (const auto& c : comments) out << "# " << c << "\n";
  out << "# dt=" << s.dt << "\n";
  char buf[32];
  for (double v : s.samples) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf << "\n";
  }
  if (!out) throw DataError("write failed: " + path);
}

}  // namespace tse
