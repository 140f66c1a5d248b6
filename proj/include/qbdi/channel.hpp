// Bit-rate limited Gaussian channel between encoder and decoder.
//
// Scalar rate-distortion of a Gaussian component with variance s2:
//     R(D) = 1/2 log2(s2 / D) for 0 < D <= s2, else 0;   D(R) = s2 * 2^(-2R).
// Bits are handed out greedily (one bit quarters the chosen component's residual),
// and a rate-R component is transmitted through the forward test channel
//     z_d ~ N(mu_d, s2_d),  mu_d = z_e + 2^(-2R) (mu_e - z_e),  s2_d = 2^(-4R) (2^(2R) - 1) s2_e.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "qbdi/errors.hpp"

namespace qbdi {

/// Rates at or above this many bits are treated as infinite (z_d = z_e).
inline constexpr double kInfiniteRateBits = 64.0;

inline double rate_of_distortion(double variance, double distortion) {
  if (!(distortion > 0.0)) throw InputError("rate_of_distortion: distortion must be > 0");
  if (variance < 0.0) throw InputError("rate_of_distortion: variance must be >= 0");
  if (distortion >= variance) return 0.0;
  return 0.5 * std::log2(variance / distortion);
}

inline double distortion_of_rate(double variance, double rate) {
  if (rate < 0.0) throw InputError("distortion_of_rate: rate must be >= 0");
  if (variance < 0.0) throw InputError("distortion_of_rate: variance must be >= 0");
  return variance * std::exp2(-2.0 * rate);
}

struct BitAllocation {
  std::vector<int> rates;         ///< bits per component
  long budget = 0;
  std::vector<double> variances;  ///< variances the allocation was computed from
  std::vector<double> residual;   ///< variances[i] * 4^(-rates[i])

  double total_residual() const {
    double s = 0.0;
    for (double r : residual) s += r;
    return s;
  }
  long total_bits() const {
    long s = 0;
    for (int r : rates) s += r;
    return s;
  }
};

/// Greedy reverse water-filling: each of `budget` bits goes to the component with the
/// largest residual (lowest index on ties), whose residual is then divided by four.
inline BitAllocation allocate_bits(std::span<const double> variances, long budget) {
  if (budget < 0) throw InputError("allocate_bits: budget must be >= 0");
  for (double v : variances) {
    if (!(v >= 0.0)) throw InputError("allocate_bits: variances must be >= 0");
  }
  BitAllocation a;
  a.budget = budget;
  a.variances.assign(variances.begin(), variances.end());
  a.residual = a.variances;
  a.rates.assign(variances.size(), 0);
  if (variances.empty()) {
    if (budget > 0) throw InputError("allocate_bits: no components to allocate to");
    return a;
  }
  for (long b = 0; b < budget; ++b) {
    const auto best = std::max_element(a.residual.begin(), a.residual.end());
    const auto i = static_cast<std::size_t>(best - a.residual.begin());
    ++a.rates[i];
    a.residual[i] = std::ldexp(a.variances[i], -2 * a.rates[i]);
  }
  return a;
}

struct WaterFilling {
  double water_level = 0.0;   ///< lambda: every active component ends with distortion lambda
  std::vector<double> rates;  ///< real-valued bits per component

  double total_rate() const {
    double s = 0.0;
    for (double r : rates) s += r;
    return s;
  }
  /// sum_i min(lambda, variance_i): the continuous distortion bound.
  double total_distortion(std::span<const double> variances) const {
    double s = 0.0;
    for (double v : variances) s += std::min(water_level, v);
    return s;
  }
};

/// Classical reverse water-filling with real-valued rates. Bisection on log2(lambda)
/// locates the active set; lambda is then solved in closed form on that set.
inline WaterFilling waterfill_continuous(std::span<const double> variances, double total_rate) {
  if (!(total_rate >= 0.0)) throw InputError("waterfill_continuous: total rate must be >= 0");
  double top = 0.0;
  for (double v : variances) {
    if (!(v >= 0.0)) throw InputError("waterfill_continuous: variances must be >= 0");
    top = std::max(top, v);
  }
  WaterFilling w;
  w.rates.assign(variances.size(), 0.0);
  if (total_rate == 0.0) {
    w.water_level = top;
    return w;
  }
  if (top == 0.0) throw InputError("waterfill_continuous: all variances are zero but rate > 0");

  auto rate_sum = [&](double log_level) {
    double s = 0.0;
    for (double v : variances)
      if (v > 0.0) s += std::max(0.0, 0.5 * (std::log2(v) - log_level));
    return s;
  };
  // rate_sum is non-increasing in the level; bracket: one component alone reaches total_rate.
  double hi = std::log2(top);
  double lo = hi - 2.0 * total_rate;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (rate_sum(mid) > total_rate) lo = mid; else hi = mid;
  }
  // Closed form on the active set {v > lambda}: log2(lambda) = (sum log2 v - 2R) / k.
  double level = 0.5 * (lo + hi);
  for (int refine = 0; refine < 4; ++refine) {
    double sum_log = 0.0;
    int active = 0;
    for (double v : variances) {
      if (v > 0.0 && std::log2(v) > level) {
        sum_log += std::log2(v);
        ++active;
      }
    }
    if (active == 0) break;
    const double next = (sum_log - 2.0 * total_rate) / active;
    if (next == level) break;
    level = next;
  }
  w.water_level = std::exp2(level);
  for (std::size_t i = 0; i < variances.size(); ++i) {
    if (variances[i] > 0.0) w.rates[i] = std::max(0.0, 0.5 * (std::log2(variances[i]) - level));
  }
  return w;
}

/// Per-component reference statistics and rates of the forward test channel.
struct ChannelParams {
  std::vector<double> mean;      ///< mu_e
  std::vector<double> variance;  ///< sigma_e^2
  std::vector<double> rate;      ///< R_i, bits

  std::size_t size() const noexcept { return mean.size(); }
};

/// Conditional moments (mu_d, sigma_d^2) of the test channel for one component.
struct ChannelMoments {
  double mean;
  double variance;
};

inline ChannelMoments channel_moments(double z_e, double mu_e, double var_e, double rate) {
  if (rate <= 0.0) return {mu_e, 0.0};
  if (rate >= kInfiniteRateBits) return {z_e, 0.0};
  const double a = std::exp2(-2.0 * rate);  // 2^(-2R)
  return {z_e + a * (mu_e - z_e), a * a * (std::exp2(2.0 * rate) - 1.0) * var_e};
}

/// Draws z_d for every component. One standard normal is consumed per component
/// regardless of its rate, so streams stay aligned across bit budgets.
inline std::vector<double> transmit(std::span<const double> z_e, const ChannelParams& params,
                                    std::mt19937_64& rng) {
  const std::size_t n = z_e.size();
  if (params.mean.size() != n || params.variance.size() != n || params.rate.size() != n) {
    throw InputError("transmit: vector lengths do not match (" + std::to_string(n) + " latent values)");
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> z_d(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (params.variance[i] < 0.0 || params.rate[i] < 0.0) {
      throw InputError("transmit: negative variance or rate at component " + std::to_string(i));
    }
    const double eps = normal(rng);
    const double r = params.rate[i];
    if (r <= 0.0) {
      z_d[i] = params.mean[i];
    } else if (r >= kInfiniteRateBits) {
      z_d[i] = z_e[i];
    } else {
      const ChannelMoments m = channel_moments(z_e[i], params.mean[i], params.variance[i], r);
      z_d[i] = m.mean + std::sqrt(m.variance) * eps;
    }
  }
  return z_d;
}

}  // namespace qbdi
