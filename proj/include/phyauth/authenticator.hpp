// SPDX-License-Identifier: Apache-2.0
//
// phyauth - physical-layer authentication simulator
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

// Channel-response authentication test.
//
// Bob keeps a noisy snapshot of Alice's response and compares a claimant's
// noisy response against it after removing the best common phase rotation:
//
//   L = min_phi (1/sigma2) sum_m |Ht_m - Href_m e^{j phi}|^2
//
// The claimant is accepted when L < k with k the (1-alpha) quantile of a
// chi-square with 2M degrees of freedom. Each measurement carries circular
// complex noise of total variance sigma2 per tone, so the per-component
// variance of a difference of two measurements is sigma2.

#pragma once

#include "errors.hpp"
#include "propagation.hpp"
#include "special_functions.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <random>

namespace phyauth {

// ---------------------------------------------------------------------------
// Noise budget

/// Transmit power against receiver noise per tone. All powers in mW.
class NoiseBudget {
public:
  static constexpr double kDefaultThermalDensity = 4.0e-18; // mW/Hz, about -174 dBm/Hz
  static constexpr double kDefaultNoiseFigure = 10.0;
  static constexpr double kDefaultToneBandwidth = 2.5e6;    // Hz

  explicit NoiseBudget(double tx_power_mw, double thermal_density = kDefaultThermalDensity,
                       double noise_figure = kDefaultNoiseFigure, double tone_bandwidth_hz = kDefaultToneBandwidth)
      : tx_power_(tx_power_mw), kt_(thermal_density), nf_(noise_figure), b_(tone_bandwidth_hz) {
    if (!(tx_power_ > 0.0 && kt_ > 0.0 && nf_ > 0.0 && b_ > 0.0))
      throw DomainError("noise budget entries must be strictly positive");
  }

  /// Budget whose transmit power realizes the given Gamma with the other entries fixed.
  static NoiseBudget from_gamma_db(double gamma_db, double thermal_density = kDefaultThermalDensity,
                                   double noise_figure = kDefaultNoiseFigure,
                                   double tone_bandwidth_hz = kDefaultToneBandwidth) {
    const double pn = thermal_density * noise_figure * tone_bandwidth_hz;
    return NoiseBudget(std::pow(10.0, gamma_db / 10.0) * pn, thermal_density, noise_figure, tone_bandwidth_hz);
  }

  double tx_power() const noexcept { return tx_power_; }
  double thermal_density() const noexcept { return kt_; }
  double noise_figure() const noexcept { return nf_; }
  double tone_bandwidth() const noexcept { return b_; }

  double noise_power() const noexcept { return kt_ * nf_ * b_; }
  double gamma() const noexcept { return tx_power_ / noise_power(); }
  double gamma_db() const noexcept { return 10.0 * std::log10(gamma()); }

  friend bool operator==(const NoiseBudget&, const NoiseBudget&) = default;

private:
  double tx_power_;
  double kt_;
  double nf_;
  double b_;
};

inline double gamma_from_db(double db) { return std::pow(10.0, db / 10.0); }

/// Per-measurement noise variance: noise power per tone over transmit power per tone, M / Gamma.
inline double noise_variance(const NoiseBudget& budget, int tones) {
  if (tones < 1) throw DomainError("noise_variance: tone count must be >= 1");
  return tones / budget.gamma();
}

inline double noise_variance_db(double gamma_db, int tones) {
  if (tones < 1) throw DomainError("noise_variance: tone count must be >= 1");
  return tones / gamma_from_db(gamma_db);
}

// ---------------------------------------------------------------------------
// Measurement model

struct Measurement {
  FrequencyResponse response;
  double lo_phase; // the common rotation applied to every tone
};

/// Rotate H by a uniform random LO phase and add circular complex Gaussian
/// noise of total variance sigma2 per tone.
template <std::uniform_random_bit_generator Rng>
Measurement measure(const FrequencyResponse& truth, double sigma2, Rng& rng) {
  if (!(sigma2 >= 0.0)) throw DomainError("simulate_measurement: sigma2 must be nonnegative");
  std::uniform_real_distribution<double> phase_dist(0.0, 2.0 * std::numbers::pi);
  const double phase = phase_dist(rng);
  const std::complex<double> rotation = std::polar(1.0, phase);

  std::normal_distribution<double> noise(0.0, std::sqrt(0.5 * sigma2));
  std::vector<std::complex<double>> out(truth.size());
  for (std::size_t m = 0; m < truth.size(); ++m) {
    out[m] = truth[m] * rotation;
    if (sigma2 > 0.0) {
      const double re = noise(rng);
      const double im = noise(rng);
      out[m] += std::complex<double>(re, im);
    }
  }
  return {FrequencyResponse(truth.probe(), std::move(out)), phase};
}

template <std::uniform_random_bit_generator Rng>
FrequencyResponse simulate_measurement(const FrequencyResponse& truth, double sigma2, Rng& rng) {
  return measure(truth, sigma2, rng).response;
}

// ---------------------------------------------------------------------------
// Test statistic

inline std::complex<double> inner_product(const FrequencyResponse& a, const FrequencyResponse& b) {
  require_same_probe(a, b);
  std::complex<double> acc{0.0, 0.0};
  for (std::size_t m = 0; m < a.size(); ++m) acc += a[m] * std::conj(b[m]);
  return acc;
}

/// Arg of sum_m Ht_m conj(Href_m) in [0, 2 pi); 0 when the inner product vanishes.
inline double optimal_phase(const FrequencyResponse& claimant, const FrequencyResponse& reference) {
  const auto ip = inner_product(claimant, reference);
  if (std::abs(ip) < 1e-300) return 0.0;
  double phi = std::arg(ip);
  if (phi < 0.0) phi += 2.0 * std::numbers::pi;
  if (phi >= 2.0 * std::numbers::pi) phi = 0.0;
  return phi;
}

/// sum_m |Ht_m - Href_m e^{j phi}|^2, unnormalized.
inline double aligned_distance(const FrequencyResponse& claimant, const FrequencyResponse& reference, double phi) {
  require_same_probe(claimant, reference);
  const auto rot = std::polar(1.0, phi);
  double acc = 0.0;
  for (std::size_t m = 0; m < claimant.size(); ++m) acc += std::norm(claimant[m] - reference[m] * rot);
  return acc;
}

inline double aligned_distance(const FrequencyResponse& claimant, const FrequencyResponse& reference) {
  return aligned_distance(claimant, reference, optimal_phase(claimant, reference));
}

struct Statistic {
  double value;     // L
  double phi_star;  // minimizing rotation
};

inline Statistic test_statistic(const FrequencyResponse& claimant, const FrequencyResponse& reference, double sigma2) {
  require_same_probe(claimant, reference);
  if (!(sigma2 > 0.0)) throw DomainError("test_statistic: sigma2 must be positive");
  const double phi = optimal_phase(claimant, reference);
  return {aligned_distance(claimant, reference, phi) / sigma2, phi};
}

/// k = F^{-1}_{chi2_{2M}}(1 - alpha)
inline double decision_threshold(double alpha, int tones) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0,1)");
  if (tones < 1) throw DomainError("tone count must be >= 1");
  return chi2_quantile(1.0 - alpha, 2 * tones);
}

/// mu_L between the true Eve and Alice responses, aligned with the noiseless phi*.
inline double noncentrality(const FrequencyResponse& eve, const FrequencyResponse& alice, double sigma2) {
  require_same_probe(eve, alice);
  if (!(sigma2 > 0.0)) throw DomainError("noncentrality: sigma2 must be positive");
  return aligned_distance(eve, alice) / sigma2;
}

struct ErrorRates {
  double threshold; // k
  double beta;      // miss rate
};

/// beta = F_{chi2_{2M, mu}}(k)
inline ErrorRates analytic_rates(double mu, int tones, double alpha) {
  const double k = decision_threshold(alpha, tones);
  return {k, noncentral_chi2_cdf(k, 2 * tones, mu)};
}

// ---------------------------------------------------------------------------
// Decision

class TestConfig {
public:
  TestConfig(ProbeConfig probe, double alpha, NoiseBudget noise)
      : probe_(probe), alpha_(alpha), noise_(noise), sigma2_(noise_variance(noise, probe.tones())),
        threshold_(decision_threshold(alpha, probe.tones())) {}

  const ProbeConfig& probe() const noexcept { return probe_; }
  double alpha() const noexcept { return alpha_; }
  const NoiseBudget& noise() const noexcept { return noise_; }
  double sigma2() const noexcept { return sigma2_; }
  double threshold() const noexcept { return threshold_; }

private:
  ProbeConfig probe_;
  double alpha_;
  NoiseBudget noise_;
  double sigma2_;
  double threshold_;
};

/// Noiseless responses behind a test, when the simulation knows them.
struct ChannelTruth {
  FrequencyResponse claimant;
  FrequencyResponse reference;
};

struct TestOutcome {
  double statistic = 0.0;   // L
  double threshold = 0.0;   // k
  double phi_star = 0.0;
  bool accept = false;      // H0 accepted, i.e. L < k
  std::optional<double> mu_L;
  std::optional<double> beta;
};

namespace detail {

inline void require_config_probe(const FrequencyResponse& r, const TestConfig& config) {
  if (!(r.probe() == config.probe())) throw ProbeMismatchError("response probe does not match the test configuration");
}

inline TestOutcome decide(double statistic, double phi, double threshold, const TestConfig& config,
                          const std::optional<ChannelTruth>& truth) {
  TestOutcome out;
  out.statistic = statistic;
  out.threshold = threshold;
  out.phi_star = phi;
  out.accept = statistic < threshold; // L == k falls in the rejection region
  if (truth) {
    out.mu_L = noncentrality(truth->claimant, truth->reference, config.sigma2());
    out.beta = noncentral_chi2_cdf(threshold, 2 * config.probe().tones(), *out.mu_L);
  }
  return out;
}

} // namespace detail

inline TestOutcome authenticate(const FrequencyResponse& claimant, const FrequencyResponse& reference,
                                const TestConfig& config, const std::optional<ChannelTruth>& truth = std::nullopt) {
  detail::require_config_probe(claimant, config);
  detail::require_config_probe(reference, config);
  const auto stat = test_statistic(claimant, reference, config.sigma2());
  return detail::decide(stat.value, stat.phi_star, config.threshold(), config, truth);
}

/// Same decision with the statistic evaluated at a supplied rotation rather
/// than the minimizer of the measured data (the noiseless-phi* model).
inline TestOutcome authenticate_at_phase(const FrequencyResponse& claimant, const FrequencyResponse& reference,
                                         double phi, const TestConfig& config,
                                         const std::optional<ChannelTruth>& truth = std::nullopt) {
  detail::require_config_probe(claimant, config);
  detail::require_config_probe(reference, config);
  const double sigma2 = config.sigma2();
  return detail::decide(aligned_distance(claimant, reference, phi) / sigma2, phi, config.threshold(), config, truth);
}

} // namespace phyauth
