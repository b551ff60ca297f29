#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "tse/errors.hpp"
#include "tse/rng.hpp"
#include "tse/series.hpp"

namespace tse {

// Lorenz system with the standard chaotic parameters, integrated with
// fixed-step fourth-order Runge-Kutta. noise_amp > 0 adds dynamic noise:
// an independent centered uniform draw with root-mean-square amplitude
// noise_amp (i.e. uniform on [-sqrt(3)*noise_amp, +sqrt(3)*noise_amp]) to
// each state component before every integration step, during the transient
// as well.
struct LorenzParams {
  double s = 10.0;
  double r = 28.0;
  double b = 8.0 / 3.0;
  double integration_step = 5e-4;
  double sampling_dt = 0.01;
  double noise_amp = 0.0;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
  std::array<double, 3> initial_state{1.0, 1.0, 1.0};
  std::size_t transient_steps = 10000;
};

struct LorenzResult {
  ScalarSeries x, y, z;
};

namespace detail {
inline std::array<double, 3> lorenz_rhs(const std::array<double, 3>& u,
                                        double s, double r, double b) {
  return {s * (u[1] - u[0]), r * u[0] - u[0] * u[2] - u[1],
          u[0] * u[1] - b * u[2]};
}
}  // namespace detail

inline LorenzResult lorenz_generate(const LorenzParams& p) {
  if (!(p.integration_step > 0.0))
    throw InvalidParams("integration_step must be positive");
  if (p.n_samples < 2) throw InvalidParams("n_samples must be >= 2");
  if (p.noise_amp < 0.0) throw InvalidParams("noise_amp must be >= 0");
  const double ratio = p.sampling_dt / p.integration_step;
  const auto steps_per_sample = static_cast<std::size_t>(std::llround(ratio));
  if (steps_per_sample < 1 ||
      std::abs(ratio - static_cast<double>(steps_per_sample)) > 1e-9 * ratio)
    throw InvalidParams("sampling_dt must be a positive integer multiple of "
                        "integration_step");

  SplitMix64 rng(p.seed);
  std::array<double, 3> u = p.initial_state;
  const double h = p.integration_step;

  const double noise_halfwidth = 1.7320508075688772 * p.noise_amp;
  auto step = [&]() {
    if (p.noise_amp > 0.0)
      for (double& c : u) c += rng.uniform(-noise_halfwidth, noise_halfwidth);
    const auto k1 = detail::lorenz_rhs(u, p.s, p.r, p.b);
    std::array<double, 3> t;
    for (int i = 0; i < 3; ++i) t[i] = u[i] + 0.5 * h * k1[i];
    const auto k2 = detail::lorenz_rhs(t, p.s, p.r, p.b);
    for (int i = 0; i < 3; ++i) t[i] = u[i] + 0.5 * h * k2[i];
    const auto k3 = detail::lorenz_rhs(t, p.s, p.r, p.b);
    for (int i = 0; i < 3; ++i) t[i] = u[i] + h * k3[i];
    const auto k4 = detail::lorenz_rhs(t, p.s, p.r, p.b);
    for (int i = 0; i < 3; ++i)
      u[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    for (double c : u)
      if (!std::isfinite(c) || std::abs(c) > 1e6)
        throw NumericalBlowup("Lorenz state left the attractor region");
  };

  for (std::size_t i = 0; i < p.transient_steps; ++i) step();

  LorenzResult out;
  out.x.dt = out.y.dt = out.z.dt = p.sampling_dt;
  out.x.label = "lorenz-x";
  out.y.label = "lorenz-y";
  out.z.label = "lorenz-z";
  out.x.samples.reserve(p.n_samples);
  out.y.samples.reserve(p.n_samples);
  out.z.samples.reserve(p.n_samples);
  for (std::size_t n = 0; n < p.n_samples; ++n) {
    out.x.samples.push_back(u[0]);
    out.y.samples.push_back(u[1]);
    out.z.samples.push_back(u[2]);
    if (n + 1 == p.n_samples) break;
    for (std::size_t sstep = 0; sstep < steps_per_sample; ++sstep) step();
  }
  return out;
}

// x_{n+1} = a1 x_n + a2 x_{n-1} + xi_n with iid Gaussian xi of standard
// deviation sigma. The stationarity triangle a2 > -1, a1 + a2 < 1,
// a2 - a1 < 1 is required.
struct Ar2Params {
  double a1 = 0.0;
  double a2 = 0.0;
  double sigma = 1.0;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
  std::size_t transient_steps = 1000;
};

inline void validate(const Ar2Params& p) {
  if (!(p.a2 > -1.0) || !(p.a1 + p.a2 < 1.0) || !(p.a2 - p.a1 < 1.0))
    throw NonStationaryParams("AR2 parameters (a1=" + std::to_string(p.a1) +
                              ", a2=" + std::to_string(p.a2) +
                              ") violate the stationarity triangle");
  if (!(p.sigma > 0.0)) throw InvalidParams("sigma must be positive");
}

inline ScalarSeries ar2_generate(const Ar2Params& p) {
  validate(p);
  if (p.n_samples < 2) throw InvalidParams("n_samples must be >= 2");
  SplitMix64 rng(p.seed);
  double prev = 0.0, cur = 0.0;
  for (std::size_t i = 0; i < p.transient_steps; ++i) {
    const double next = p.a1 * cur + p.a2 * prev + p.sigma * rng.gaussian();
    prev = cur;
    cur = next;
  }
  ScalarSeries out;
  out.label = "ar2";
  out.samples.reserve(p.n_samples);
  for (std::size_t i = 0; i < p.n_samples; ++i) {
    out.samples.push_back(cur);
    const double next = p.a1 * cur + p.a2 * prev + p.sigma * rng.gaussian();
    prev = cur;
    cur = next;
  }
  return out;
}

// Differential entropy of an n-dimensional Gaussian with the given
// covariance: (1/2) ln((2 pi e)^n det K), in nats. cov is row-major n x n.
inline double gaussian_block_entropy(const std::vector<double>& cov,
                                     std::size_t n) {
  if (cov.size() != n * n || n == 0)
    throw UsageError("covariance must be a non-empty square matrix");
  std::vector<double> chol(cov);
  double logdet = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double sum = chol[i * n + j];
      for (std::size_t k = 0; k < j; ++k)
        sum -= chol[i * n + k] * chol[j * n + k];
      if (i == j) {
        if (!(sum > 0.0))
          throw NotPositiveDefinite("covariance matrix is not positive definite");
        chol[i * n + i] = std::sqrt(sum);
        logdet += std::log(chol[i * n + i]);
      } else {
        chol[i * n + j] = sum / chol[j * n + j];
      }
    }
  }
  constexpr double ln_2pi_e = 2.8378770664093454835606594728112;  // ln(2*pi*e)
  return 0.5 * static_cast<double>(n) * ln_2pi_e + logdet;
}

// Exact second-order statistics and information values of the AR2 process.
// Everything is derived from the autocorrelation sequence r_k, which obeys
// r_k = a1 r_{k-1} + a2 r_{k-2} with r_0 = 1, r_1 = a1/(1 - a2); the
// recursion runs in extended precision so that delayed observations (which
// need r up to 3*tau) stay accurate.
class Ar2Oracle {
public:
  explicit Ar2Oracle(const Ar2Params& params) : p_(params) { validate(p_); }

  const Ar2Params& params() const { return p_; }

  double autocorr(int k) const {
    if (k < 0) throw UsageError("autocorrelation lag must be >= 0");
    if (k == 0) return 1.0;
    long double prev = 1.0L;
    long double cur = static_cast<long double>(p_.a1) /
                      (1.0L - static_cast<long double>(p_.a2));
    for (int i = 2; i <= k; ++i) {
      const long double next = static_cast<long double>(p_.a1) * cur +
                               static_cast<long double>(p_.a2) * prev;
      prev = cur;
      cur = next;
    }
    return static_cast<double>(cur);
  }

  // Stationary variance by the Yule-Walker relations. (Not used by the
  // information values below, where the variance cancels.)
  double variance() const {
    const double a1 = p_.a1, a2 = p_.a2;
    return p_.sigma * p_.sigma * (1.0 - a2) /
           ((1.0 + a2) * ((1.0 - a2) * (1.0 - a2) - a1 * a1));
  }

  // I(X_{n+1} : X_n) for the process observed every tau steps.
  double one_step_mi(int tau = 1) const {
    const double r = autocorr(tau);
    const double v = 1.0 - r * r;
    if (!(v > 0.0)) throw NumericalError("autocorrelation reached unity");
    return std::max(0.0, -0.5 * std::log(v));
  }

  // I(X_{n+1} X_n : X_{n-1} X_{n-2}) for the process observed every tau
  // steps, as a difference of Gaussian block entropies; the variance scale
  // cancels, so correlation matrices suffice.
  double two_step_mi(int tau = 1) const {
    const double r1 = autocorr(tau);
    const double r2 = autocorr(2 * tau);
    const double r3 = autocorr(3 * tau);
    const std::vector<double> k2{1.0, r1, r1, 1.0};
    const std::vector<double> k4{1.0, r1, r2, r3, r1, 1.0, r1, r2,
                                 r2, r1, 1.0, r1, r3, r2, r1, 1.0};
    return std::max(0.0, 2.0 * gaussian_block_entropy(k2, 2) -
                             gaussian_block_entropy(k4, 4));
  }

  // Theoretical predictive information and excess entropy: the process is
  // Markov of order 2, so both saturate after two steps.
  struct Theory {
    double pi_1 = 0.0;
    double pi_inf = 0.0;
    double e_1 = 0.0;
    double e_2 = 0.0;
    double e_inf = 0.0;
  };

  Theory theoretical(int tau = 1) const {
    Theory t;
    t.pi_1 = one_step_mi(tau);
    t.pi_inf = two_step_mi(tau);
    t.e_1 = 0.0;
    t.e_2 = t.pi_1;
    t.e_inf = t.pi_inf;
    return t;
  }

private:
  Ar2Params p_;
};

}  // namespace tse
