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

#include <phyauth/propagation.hpp>
#include <phyauth/scenario.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

using namespace phyauth;

namespace {

constexpr double kF0 = 5e9;
const double kPi = std::numbers::pi;

Surface partition(std::string id, int axis, double pos, std::array<double, 2> s0, std::array<double, 2> s1,
                  double rho = 0.6, double tau = 0.4) {
  Surface s;
  s.id = std::move(id);
  s.axis = axis;
  s.position = pos;
  s.span = {s0, s1};
  s.reflection = rho;
  s.transmission = tau;
  return s;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

} // namespace

TEST_CASE("free space gives one line-of-sight ray") {
  const Scene scene = Scene::free_space({10.0, 10.0, 4.0});
  const Vec3 tx{2.0, 5.0, 2.0};
  const Vec3 rx{5.0, 5.0, 2.0};
  const auto paths = trace_paths(scene, tx, rx, 3, kF0);
  REQUIRE(paths.size() == 1);

  const double lambda0 = kSpeedOfLight / kF0;
  CHECK(std::abs(lambda0 - 0.0599585) < 1e-7);
  CHECK(rel(paths[0].amplitude, lambda0 / (4.0 * kPi * 3.0)) < 1e-12);
  CHECK(std::abs(paths[0].amplitude - 1.5905e-3) < 1e-7);
  CHECK(rel(paths[0].delay, 3.0 / kSpeedOfLight) < 1e-12);
  CHECK(std::abs(paths[0].delay - 1.00069e-8) < 1e-13);
  CHECK(paths[0].bounce_count == 0);
}

TEST_CASE("floor image") {
  ShellMaterials shell = ShellMaterials::uniform(0.0);
  shell.reflection[4] = 1.0; // z_min
  const Scene scene(Vec3{20.0, 20.0, 10.0}, shell);
  const double h = 1.5;
  const double d = 4.0;
  const auto paths = trace_paths(scene, {3.0, 7.0, h}, {3.0 + d, 7.0, h}, 1, kF0);
  REQUIRE(paths.size() == 2);
  CHECK(paths[0].bounce_count == 0);
  CHECK(paths[1].bounce_count == 1);
  CHECK(std::abs(paths[1].path_length - std::sqrt(d * d + 4.0 * h * h)) < 1e-12);
  CHECK(rel(paths[1].amplitude, kSpeedOfLight / kF0 / (4.0 * kPi * paths[1].path_length)) < 1e-12);
}

TEST_CASE("order zero is line of sight only") {
  const Scene scene(Vec3{10.0, 8.0, 3.0});
  const auto paths = trace_paths(scene, {1.0, 2.0, 1.0}, {7.0, 5.0, 2.0}, 0, kF0);
  REQUIRE(paths.size() == 1);
  CHECK(paths[0].bounce_count == 0);
}

TEST_CASE("path invariants in a furnished room") {
  const Scene scene(Vec3{12.0, 9.0, 3.0}, ShellMaterials::uniform(0.7),
                    {partition("wall", 0, 5.0, {0.0, 6.0}, {0.0, 3.0}), partition("pillar", 1, 4.0, {7.0, 9.0}, {0.5, 2.5})});
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  for (int trial = 0; trial < 20; ++trial) {
    const Vec3 tx{12.0 * u(rng), 9.0 * u(rng), 3.0 * u(rng)};
    const Vec3 rx{12.0 * u(rng), 9.0 * u(rng), 3.0 * u(rng)};
    const auto paths = trace_paths(scene, tx, rx, 3, kF0);
    REQUIRE_FALSE(paths.empty());
    const double lambda0 = kSpeedOfLight / kF0;
    const double los = lambda0 / (4.0 * kPi * distance(tx, rx));
    for (std::size_t i = 0; i < paths.size(); ++i) {
      const auto& p = paths[i];
      CHECK(p.amplitude <= lambda0 / (4.0 * kPi * p.path_length) * (1.0 + 1e-15));
      CHECK(p.amplitude >= 1e-12 * los);
      CHECK(rel(p.delay, p.path_length / kSpeedOfLight) < 1e-15);
      CHECK(p.path_length >= distance(tx, rx) - 1e-12);
      CHECK(p.bounce_count <= 3);
      if (i > 0) CHECK(paths[i - 1].delay <= p.delay);
    }
  }
}

TEST_CASE("reciprocity") {
  const auto scenario = load_scenario(PHYAUTH_REFERENCE_SCENARIO);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> ux(0.2, 119.8);
  std::uniform_real_distribution<double> uy(0.2, 13.8);
  std::uniform_real_distribution<double> uz(0.2, 3.8);
  for (int trial = 0; trial < 10; ++trial) {
    const Vec3 a{ux(rng), uy(rng), uz(rng)};
    const Vec3 b{ux(rng), uy(rng), uz(rng)};
    const auto fwd = trace_paths(scenario.scene, a, b, 3, kF0);
    const auto rev = trace_paths(scenario.scene, b, a, 3, kF0);
    REQUIRE(fwd.size() == rev.size());
    // multiset match: near-equal delays may sort differently in each direction
    std::vector<bool> used(rev.size(), false);
    std::size_t matched = 0;
    for (const auto& p : fwd) {
      for (std::size_t j = 0; j < rev.size(); ++j) {
        if (used[j] || rel(rev[j].delay, p.delay) >= 1e-12 || rel(rev[j].amplitude, p.amplitude) >= 1e-12) continue;
        used[j] = true;
        ++matched;
        break;
      }
    }
    CHECK(matched == fwd.size());
  }
}

namespace {

// Compare image-method lengths with the Fermat-principle oracle.
void check_against_oracle(const Scene& scene, int max_order, std::uint64_t seed, int trials) {
  const auto& surfaces = scene.surfaces();
  const auto usable = [&](int s) { return surfaces[static_cast<std::size_t>(s)].reflection > 0.0; };
  const Vec3 size = scene.size();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.03, 0.97);
  for (int t = 0; t < trials; ++t) {
    const Vec3 tx{size.x * u(rng), size.y * u(rng), size.z * u(rng)};
    const Vec3 rx{size.x * u(rng), size.y * u(rng), size.z * u(rng)};
    const auto traced = trace_paths(scene, tx, rx, max_order, kF0);
    const auto expected = oracle::exhaustive_paths(surfaces, tx, rx, max_order, usable);
    std::vector<double> got;
    for (const auto& p : traced) got.push_back(p.path_length);
    std::vector<double> want;
    for (const auto& p : expected) want.push_back(p.length);
    std::sort(got.begin(), got.end());
    std::sort(want.begin(), want.end());
    INFO("trial " << t);
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(std::abs(got[i] - want[i]) < 1e-12);
  }
}

} // namespace

TEST_CASE("image method matches the Fermat oracle on two-surface scenes") {
  SECTION("floor and ceiling") {
    ShellMaterials shell = ShellMaterials::uniform(0.0);
    shell.reflection[4] = 0.9;
    shell.reflection[5] = 0.5;
    check_against_oracle(Scene(Vec3{8.0, 6.0, 3.0}, shell), 2, 1, 25);
  }
  SECTION("side wall and a partial partition") {
    ShellMaterials shell = ShellMaterials::uniform(0.0);
    shell.reflection[0] = 0.6;
    const Scene scene(Vec3{10.0, 8.0, 3.0}, shell, {partition("p", 1, 3.5, {2.0, 7.0}, {0.0, 2.2})});
    check_against_oracle(scene, 2, 2, 25);
  }
  SECTION("two crossing partitions") {
    const Scene scene(Vec3{10.0, 10.0, 3.0}, ShellMaterials::uniform(0.0),
                      {partition("a", 0, 4.0, {1.0, 9.0}, {0.0, 3.0}), partition("b", 1, 6.0, {0.0, 8.0}, {0.5, 2.5})});
    check_against_oracle(scene, 2, 3, 25);
  }
}

TEST_CASE("partition penetration attenuates by tau") {
  const Scene scene(Vec3{10.0, 10.0, 3.0}, ShellMaterials::uniform(0.0),
                    {partition("w", 0, 5.0, {0.0, 10.0}, {0.0, 3.0}, 0.0, 0.25)});
  const auto paths = trace_paths(scene, {2.0, 5.0, 1.5}, {8.0, 5.0, 1.5}, 2, kF0);
  REQUIRE(paths.size() == 1);
  CHECK(paths[0].penetrations == 1);
  CHECK(rel(paths[0].amplitude, 0.25 * kSpeedOfLight / kF0 / (4.0 * kPi * 6.0)) < 1e-12);
}

TEST_CASE("probe tone frequencies") {
  const ProbeConfig probe(5e9, 1e8, 5);
  const std::vector<double> expected{4.97e9, 4.99e9, 5.01e9, 5.03e9, 5.05e9};
  const auto f = probe.frequencies();
  REQUIRE(f.size() == 5);
  for (std::size_t m = 0; m < 5; ++m) CHECK(std::abs(f[m] - expected[m]) < 1e-3);
  CHECK(probe.spacing() * probe.tones() == probe.bandwidth());

  CHECK_THROWS_AS(ProbeConfig(5e9, 0.0, 5), DomainError);
  CHECK_THROWS_AS(ProbeConfig(5e9, 1e8, 0), DomainError);
  CHECK_THROWS_AS(ProbeConfig(1e8, 3e8, 5), DomainError);
}

TEST_CASE("frequency response phase model") {
  const ProbeConfig probe(5e9, 1e8, 5);

  SECTION("integer cycle count leaves the amplitude real") {
    PathComponent p;
    p.amplitude = 0.37;
    p.delay = 3.0 / probe.tone_frequency(1);
    const auto h = frequency_response(std::vector{p}, probe);
    CHECK(std::abs(h[0] - std::complex<double>(0.37, 0.0)) < 1e-12 * 0.37);
  }
  SECTION("half-cycle offset cancels") {
    for (int m = 1; m <= 5; ++m) {
      PathComponent a;
      a.amplitude = 1e-3;
      a.delay = 0.0;
      PathComponent b = a;
      b.delay = 1.0 / (2.0 * probe.tone_frequency(m));
      const auto h = frequency_response(std::vector{a, b}, probe);
      CHECK(std::abs(h[static_cast<std::size_t>(m - 1)]) <= 1e-15 * 1e-3);
    }
  }
  SECTION("matches direct evaluation") {
    std::vector<PathComponent> paths(3);
    paths[0].amplitude = 1e-3, paths[0].delay = 2.1e-8;
    paths[1].amplitude = 4e-4, paths[1].delay = 3.7e-8;
    paths[2].amplitude = 1e-4, paths[2].delay = 9.3e-8;
    const auto h = frequency_response(paths, probe);
    for (int m = 1; m <= 5; ++m) {
      std::complex<double> acc{};
      for (const auto& p : paths) acc += p.amplitude * std::exp(std::complex<double>(0.0, -2.0 * kPi * probe.tone_frequency(m) * p.delay));
      CHECK(std::abs(h[static_cast<std::size_t>(m - 1)] - acc) < 1e-12 * 1e-3);
    }
  }
  CHECK_THROWS_AS(frequency_response(std::vector<PathComponent>{}, probe), DomainError);
  CHECK_THROWS_AS(FrequencyResponse(probe, std::vector<std::complex<double>>(4)), ProbeMismatchError);
}

TEST_CASE("spatial decorrelation in the reference building") {
  const auto scenario = load_scenario(PHYAUTH_REFERENCE_SCENARIO);
  const ProbeConfig probe(5e9, 1e8, 5);
  const double lambda0 = probe.wavelength();

  std::mt19937_64 rng(2007);
  std::uniform_real_distribution<double> ux(1.0, 119.0);
  std::uniform_real_distribution<double> uy(1.0, 13.0);
  std::uniform_real_distribution<double> ang(0.0, 2.0 * kPi);
  const auto response = [&](const Vec3& p) {
    return frequency_response(trace_paths(scenario.scene, p, scenario.bob, 3, probe.center()), probe);
  };
  const auto coherence = [](const FrequencyResponse& a, const FrequencyResponse& b) {
    std::complex<double> ip{};
    for (std::size_t m = 0; m < a.size(); ++m) ip += a[m] * std::conj(b[m]);
    return std::abs(ip) / std::sqrt(a.energy() * b.energy());
  };

  std::vector<double> near;
  std::vector<double> far;
  for (int i = 0; i < 100; ++i) {
    const Vec3 anchor{ux(rng), uy(rng), 2.0};
    const double theta = ang(rng);
    const Vec3 dir{std::cos(theta), std::sin(theta), 0.0};
    const auto h0 = response(anchor);
    near.push_back(coherence(h0, response(anchor + (lambda0 / 10.0) * dir)));
    far.push_back(coherence(h0, response(anchor + (2.0 * lambda0) * dir)));
  }
  const auto median = [](std::vector<double> v) {
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2), v.end());
    return v[v.size() / 2];
  };
  INFO("median near " << median(near) << " far " << median(far));
  CHECK(median(far) < median(near));
}

TEST_CASE("geometry errors") {
  const Scene scene(Vec3{10.0, 10.0, 3.0});
  CHECK_THROWS_AS(trace_paths(scene, {1, 1, 1}, {1, 1, 1}, 2, kF0), GeometryError);
  CHECK_THROWS_AS(trace_paths(scene, {-1, 1, 1}, {2, 2, 2}, 2, kF0), GeometryError);
  CHECK_THROWS_AS(trace_paths(scene, {1, 1, 1}, {2, 2, 3.0}, 2, kF0), GeometryError);
  CHECK_THROWS_AS(trace_paths(scene, {1, 1, 1}, {2, 2, 2}, 7, kF0), DomainError);

  CHECK_THROWS_AS(Scene(Vec3{0.0, 1.0, 1.0}), GeometryError);
  CHECK_THROWS_AS(Scene(Vec3{5, 5, 3}, ShellMaterials::uniform(1.2)), GeometryError);
  CHECK_THROWS_AS(Scene(Vec3{5, 5, 3}, {}, {partition("bad", 0, 6.0, {0, 5}, {0, 3})}), GeometryError);
  CHECK_THROWS_AS(Scene(Vec3{5, 5, 3}, {}, {partition("bad", 0, 2.0, {0, 5}, {0, 3}, 0.5, -0.1)}), GeometryError);
}
