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

#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"

#include <phyauth/authenticator.hpp>
#include <phyauth/experiment.hpp>

#include <cmath>
#include <numbers>
#include <random>

using namespace phyauth;
using cd = std::complex<double>;

namespace {

const double kPi = std::numbers::pi;

FrequencyResponse make(std::vector<cd> v, double w = 1e8) {
  const int m = static_cast<int>(v.size());
  return {ProbeConfig(5e9, w, m), std::move(v)};
}

FrequencyResponse random_response(std::mt19937_64& rng, int m, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  std::vector<cd> v(static_cast<std::size_t>(m));
  for (auto& x : v) x = {n(rng), n(rng)};
  return make(std::move(v));
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

} // namespace

TEST_CASE("noise variance") {
  CHECK(rel(noise_variance_db(120.0, 5), 5e-12) < 1e-12);
  CHECK(rel(noise_variance_db(90.0, 1), 1e-9) < 1e-12);

  const NoiseBudget budget(100.0, 4.0e-18, 10.0, 2.5e6);
  CHECK(rel(budget.gamma(), 1e12) < 1e-12);
  CHECK(std::abs(budget.gamma_db() - 120.0) < 1e-9);
  CHECK(rel(noise_variance(budget, 5), 5e-12) < 1e-12);
  CHECK(rel(NoiseBudget::from_gamma_db(110.0).gamma_db(), 110.0) < 1e-12);

  CHECK_THROWS_AS(NoiseBudget(0.0), DomainError);
  CHECK_THROWS_AS(NoiseBudget(1.0, -1.0), DomainError);
  CHECK_THROWS_AS(noise_variance(budget, 0), DomainError);
}

TEST_CASE("simulate_measurement") {
  std::mt19937_64 rng(1);
  const auto h = random_response(rng, 5, 1e-3);

  SECTION("noiseless measurement is a pure rotation") {
    std::mt19937_64 r(9);
    const auto meas = measure(h, 0.0, r);
    CHECK(meas.lo_phase >= 0.0);
    CHECK(meas.lo_phase < 2.0 * kPi);
    const auto rot = std::polar(1.0, meas.lo_phase);
    for (std::size_t m = 0; m < 5; ++m) {
      CHECK(std::abs(meas.response[m] - h[m] * rot) < 1e-18);
      CHECK(rel(std::abs(meas.response[m]), std::abs(h[m])) < 1e-14);
    }
  }
  SECTION("same seed, same output") {
    std::mt19937_64 a(42);
    std::mt19937_64 b(42);
    CHECK(simulate_measurement(h, 1e-8, a) == simulate_measurement(h, 1e-8, b));
  }
  SECTION("per-tone noise has total variance sigma2, split evenly") {
    const double sigma2 = 2e-7;
    std::mt19937_64 r(3);
    double total = 0.0;
    double real_part = 0.0;
    std::size_t count = 0;
    for (int t = 0; t < 100000; ++t) {
      const auto meas = measure(h, sigma2, r);
      const auto rot = std::polar(1.0, meas.lo_phase);
      for (std::size_t m = 0; m < 5; ++m) {
        const cd n = meas.response[m] - h[m] * rot;
        total += std::norm(n);
        real_part += n.real() * n.real();
        ++count;
      }
    }
    CHECK(std::abs(total / static_cast<double>(count) / sigma2 - 1.0) < 0.02);
    CHECK(std::abs(real_part / static_cast<double>(count) / (0.5 * sigma2) - 1.0) < 0.02);
  }
  CHECK_THROWS_AS(simulate_measurement(h, -1.0, rng), DomainError);
}

TEST_CASE("optimal_phase") {
  std::mt19937_64 rng(2);
  const auto h = random_response(rng, 6);
  CHECK(optimal_phase(h, h) == 0.0);
  CHECK(std::abs(optimal_phase(h.scaled(std::polar(1.0, kPi / 3.0)), h) - kPi / 3.0) < 1e-12);
  // lands in [0, 2pi)
  const double phi = optimal_phase(h.scaled(std::polar(1.0, -0.5)), h);
  CHECK(std::abs(phi - (2.0 * kPi - 0.5)) < 1e-12);

  CHECK(optimal_phase(make({1.0, -1.0}), make({1.0, 1.0})) == 0.0);
  CHECK_THROWS_AS(optimal_phase(make({1.0, 1.0}), make({1.0, 1.0}, 2e8)), ProbeMismatchError);
}

TEST_CASE("test_statistic") {
  std::mt19937_64 rng(4);
  const auto h = random_response(rng, 5);
  for (double theta : {0.0, 0.7, 2.0, -3.1}) {
    const auto s = test_statistic(h.scaled(std::polar(1.0, theta)), h, 1e-3);
    CHECK(s.value <= 1e-9 * h.energy() / 1e-3);
  }

  const auto hand = test_statistic(make({2.0}), make({1.0}), 0.5);
  CHECK(hand.phi_star == 0.0);
  CHECK(std::abs(hand.value - 2.0) < 1e-15);

  // exact minimizer never loses to a brute-force phase grid
  for (int t = 0; t < 200; ++t) {
    const auto a = random_response(rng, 5);
    const auto b = random_response(rng, 5);
    const auto s = test_statistic(a, b, 1.0);
    CHECK(s.value >= 0.0);
    CHECK(s.value <= oracle::grid_min_distance(a.samples(), b.samples()) + 1e-9);
  }

  CHECK_THROWS_AS(test_statistic(h, h, 0.0), DomainError);
  CHECK_THROWS_AS(test_statistic(make({1.0}), make({1.0}, 2e8), 1.0), ProbeMismatchError);
}

TEST_CASE("decision_threshold") {
  CHECK(std::abs(decision_threshold(0.01, 5) - 23.2093) < 1e-3);
  CHECK(std::abs(decision_threshold(0.5, 1) - 2.0 * std::log(2.0)) < 1e-12);
  CHECK(decision_threshold(0.001, 5) > decision_threshold(0.01, 5));
  CHECK_THROWS_AS(decision_threshold(0.0, 5), DomainError);
  CHECK_THROWS_AS(decision_threshold(1.0, 5), DomainError);
}

TEST_CASE("noncentrality") {
  std::mt19937_64 rng(8);
  const auto h = random_response(rng, 5);
  CHECK(noncentrality(h, h, 1.0) == 0.0);
  CHECK(std::abs(noncentrality(make({cd(0.0, 2.0)}), make({1.0}), 1.0) - 1.0) < 1e-15);
  CHECK(std::abs(noncentrality(make({1.0, -1.0}), make({1.0, 1.0}), 1.0) - 4.0) < 1e-15);
  CHECK_THROWS_AS(noncentrality(h, h, -1.0), DomainError);
}

TEST_CASE("analytic_rates") {
  const auto zero = analytic_rates(0.0, 5, 0.01);
  CHECK(std::abs(zero.beta - 0.99) < 1e-12);
  CHECK(std::abs(zero.threshold - 23.2093) < 1e-3);
  CHECK(analytic_rates(1e6, 5, 0.01).beta < 1e-10);

  // noncentral chi2_10 with mu = 10: ten unit-variance normals with mean 1 each
  const double beta = analytic_rates(10.0, 5, 0.01).beta;
  const std::vector<double> means(10, 1.0);
  constexpr std::size_t draws = 10'000'000;
  const double sampled = oracle::sampled_noncentral_cdf(decision_threshold(0.01, 5), means, draws, 23);
  CHECK(std::abs(sampled - beta) < 3.0 * oracle::binomial_sigma(beta, draws));

  double prev = 1.0;
  for (double mu = 0.0; mu < 200.0; mu += 2.5) {
    const double b = analytic_rates(mu, 5, 0.01).beta;
    CHECK(b <= prev);
    prev = b;
  }
  // larger alpha means a smaller threshold, hence fewer misses
  CHECK(analytic_rates(20.0, 5, 0.05).beta < analytic_rates(20.0, 5, 0.01).beta);
}

TEST_CASE("authenticate") {
  const ProbeConfig probe(5e9, 1e8, 5);
  const TestConfig config(probe, 0.01, NoiseBudget::from_gamma_db(120.0));
  std::mt19937_64 rng(10);
  std::normal_distribution<double> n(0.0, 1e-4);
  std::vector<cd> v(5);
  for (auto& x : v) x = {n(rng), n(rng)};
  const FrequencyResponse alice(probe, v);

  SECTION("identical measurements accept") {
    const auto out = authenticate(alice, alice, config);
    CHECK(out.statistic == 0.0);
    CHECK(out.accept);
    CHECK(std::abs(out.threshold - 23.2093) < 1e-3);
    CHECK_FALSE(out.mu_L.has_value());
  }
  SECTION("known truth reports mu and beta") {
    const auto out = authenticate(alice, alice, config, ChannelTruth{alice, alice});
    REQUIRE(out.mu_L);
    CHECK(*out.mu_L == 0.0);
    CHECK(std::abs(*out.beta - 0.99) < 1e-12);
  }
  SECTION("ties reject") {
    const auto out = detail::decide(config.threshold(), 0.0, config.threshold(), config, std::nullopt);
    CHECK_FALSE(out.accept);
  }
  SECTION("an impostor with mu_L = 100 is rejected") {
    // a real gain c > 1 keeps phi* = 0, so mu_L = (c-1)^2 E / sigma2
    const double c = 1.0 + std::sqrt(100.0 * config.sigma2() / alice.energy());
    const auto eve = alice.scaled(c);
    REQUIRE(std::abs(noncentrality(eve, alice, config.sigma2()) - 100.0) < 1e-9);
    CHECK(analytic_rates(100.0, 5, 0.01).beta < 1e-3);

    std::size_t rejected = 0;
    constexpr std::size_t trials = 10'000;
    for (std::size_t t = 0; t < trials; ++t) {
      std::mt19937_64 r(derive_seed(77, t));
      const auto ref = simulate_measurement(alice, config.sigma2(), r);
      const auto claim = simulate_measurement(eve, config.sigma2(), r);
      rejected += !authenticate(claim, ref, config).accept;
    }
    CHECK(static_cast<double>(rejected) / trials >= 0.999);
  }
  CHECK_THROWS_AS(authenticate(make({1.0, 1.0, 1.0, 1.0, 1.0}, 2e8), alice, config), ProbeMismatchError);
}

TEST_CASE("scale and phase invariance of L") {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 100; ++t) {
    const auto a = random_response(rng, 5);
    const auto b = random_response(rng, 5);
    const double base = test_statistic(a, b, 0.3).value;
    const cd factor = std::polar(2.7, 1.1);
    CHECK(rel(test_statistic(a.scaled(factor), b.scaled(factor), 0.3 * std::norm(factor)).value, base) < 1e-9);
    CHECK(rel(test_statistic(a.scaled(std::polar(1.0, 0.1 * t)), b, 0.3).value, base) < 1e-9);
  }
}

TEST_CASE("false alarm rate under H0") {
  const ProbeConfig probe(5e9, 1e8, 5);
  const TestConfig config(probe, 0.01, NoiseBudget::from_gamma_db(120.0));
  std::mt19937_64 rng(14);
  std::normal_distribution<double> n(0.0, 1e-4);
  std::vector<cd> v(5);
  for (auto& x : v) x = {n(rng), n(rng)};
  const FrequencyResponse alice(probe, v);
  constexpr std::size_t trials = 100'000;

  // With phi* fixed at its noiseless value, L is exactly chi2_{2M} under H0.
  const auto ideal = monte_carlo_rates(alice, alice, config, trials, 5, {PhaseAlignment::noiseless, 1});
  CHECK(std::abs(ideal.alpha_hat - 0.01) <= 0.003);

  // Minimizing over phi on the noisy data absorbs one real noise dimension,
  // so the rejection rate follows the chi2_{2M-1} tail at high SNR.
  const auto measured = monte_carlo_rates(alice, alice, config, trials, 5, {PhaseAlignment::measured, 1});
  const double tail = 1.0 - chi2_cdf(config.threshold(), 9);
  INFO("measured alpha_hat " << measured.alpha_hat << " vs chi2_9 tail " << tail);
  CHECK(std::abs(measured.alpha_hat - tail) < 4.0 * oracle::binomial_sigma(tail, trials));
}
