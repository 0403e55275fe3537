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

// Room-level experiments: Alice and Eve on a horizontal grid inside one room,
// Bob fixed elsewhere in the building, miss rate averaged over every
// Alice-Eve pair for each (bandwidth, tones, Gamma) combination.

#pragma once

#include "authenticator.hpp"
#include "errors.hpp"
#include "propagation.hpp"
#include "special_functions.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace phyauth {

// ---------------------------------------------------------------------------
// Parallel helpers

/// Split [0, n) into contiguous chunks, one per worker. `fn(begin, end)` must
/// only write state owned by its own indices.
template <typename Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (workers == 1) {
    fn(std::size_t{0}, n);
    return;
  }
  const std::size_t chunk = (n + workers - 1) / workers;
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t begin = std::min(n, w * chunk);
    const std::size_t end = std::min(n, begin + chunk);
    if (begin == end) break;
    pool.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
}

inline unsigned default_parallelism() { return std::max(1u, std::thread::hardware_concurrency()); }

/// SplitMix64 finalizer; turns (master seed, stream index) into independent seeds.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// ---------------------------------------------------------------------------
// Room grids

struct RoomGridSpec {
  std::string id;
  std::array<double, 2> x{0.0, 0.0}; // horizontal extent, m
  std::array<double, 2> y{0.0, 0.0};
  double spacing = 0.2;
  double height = 2.0;
  double margin = 0.1;

  friend bool operator==(const RoomGridSpec&, const RoomGridSpec&) = default;
};

struct RoomGrid {
  RoomGridSpec spec;
  std::size_t nx = 0;
  std::size_t ny = 0;
  std::vector<Vec3> positions; // row-major, x fastest

  std::size_t size() const noexcept { return positions.size(); }
};

inline RoomGrid build_room_grid(const RoomGridSpec& spec) {
  if (!(spec.spacing > 0.0)) throw DomainError("room " + spec.id + ": spacing must be positive");
  if (!(spec.margin >= 0.0)) throw DomainError("room " + spec.id + ": margin must be nonnegative");
  const double ux = spec.x[1] - spec.x[0] - 2.0 * spec.margin;
  const double uy = spec.y[1] - spec.y[0] - 2.0 * spec.margin;
  if (!(ux > 0.0 && uy > 0.0)) throw GeometryError("room " + spec.id + ": extent must exceed twice the wall margin");

  // small slack so an extent that is an exact multiple of the spacing keeps its last point
  const auto count = [&](double usable) { return static_cast<std::size_t>(std::floor(usable / spec.spacing + 1e-9)) + 1; };
  RoomGrid grid{spec, count(ux), count(uy), {}};
  grid.positions.reserve(grid.nx * grid.ny);
  for (std::size_t j = 0; j < grid.ny; ++j)
    for (std::size_t i = 0; i < grid.nx; ++i)
      grid.positions.push_back({spec.x[0] + spec.margin + static_cast<double>(i) * spec.spacing,
                                spec.y[0] + spec.margin + static_cast<double>(j) * spec.spacing, spec.height});
  return grid;
}

// ---------------------------------------------------------------------------
// Pair enumeration

using PositionPair = std::pair<std::uint32_t, std::uint32_t>; // (alice, eve), alice < eve

inline std::size_t pair_count(std::size_t n) { return n < 2 ? 0 : n * (n - 1) / 2; }

/// All unordered pairs when `cap` is absent or covers the population, else a
/// uniform sample of `cap` pairs without replacement (selection sampling),
/// returned in enumeration order.
inline std::vector<PositionPair> select_pairs(std::size_t n, std::optional<std::size_t> cap, std::uint64_t seed) {
  const std::size_t total = pair_count(n);
  const std::size_t wanted = cap ? std::min(*cap, total) : total;
  std::vector<PositionPair> out;
  out.reserve(wanted);

  std::mt19937_64 rng(seed);
  std::size_t seen = 0;
  for (std::uint32_t i = 0; i < n && out.size() < wanted; ++i) {
    for (std::uint32_t j = i + 1; j < n && out.size() < wanted; ++j, ++seen) {
      if (wanted == total) {
        out.emplace_back(i, j);
        continue;
      }
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      if (static_cast<double>(total - seen) * u < static_cast<double>(wanted - out.size())) out.emplace_back(i, j);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Path cache

/// Rays from every grid position to Bob, traced once. Rays depend on the probe
/// only through the center frequency, so one trace serves every (W, M).
class PathCache {
public:
  PathCache(const Scene& scene, const Vec3& bob, std::vector<Vec3> positions, double center_hz, int max_order,
            unsigned parallelism = 1)
      : positions_(std::move(positions)), paths_(positions_.size()), center_(center_hz) {
    parallel_for(positions_.size(), parallelism, [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        paths_[i] = trace_paths(scene, positions_[i], bob, max_order, center_hz);
        traces_.fetch_add(1, std::memory_order_relaxed);
      }
    });
  }

  std::size_t size() const noexcept { return positions_.size(); }
  const std::vector<Vec3>& positions() const noexcept { return positions_; }
  const std::vector<PathComponent>& paths(std::size_t i) const { return paths_.at(i); }
  double center_frequency() const noexcept { return center_; }

  /// Number of trace_paths calls made while filling the cache.
  std::size_t trace_count() const noexcept { return traces_.load(); }

  std::vector<FrequencyResponse> responses(const ProbeConfig& probe, unsigned parallelism = 1) const {
    if (probe.center() != center_) throw ProbeMismatchError("probe center differs from the traced center frequency");
    std::vector<std::optional<FrequencyResponse>> tmp(paths_.size());
    parallel_for(paths_.size(), parallelism, [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) tmp[i].emplace(frequency_response(paths_[i], probe));
    });
    std::vector<FrequencyResponse> out;
    out.reserve(tmp.size());
    for (auto& r : tmp) out.push_back(std::move(*r));
    return out;
  }

private:
  std::vector<Vec3> positions_;
  std::vector<std::vector<PathComponent>> paths_;
  double center_;
  std::atomic<std::size_t> traces_{0};
};

// ---------------------------------------------------------------------------
// Sweeps

struct SweepSpec {
  std::vector<double> bandwidths{1e8};   // Hz
  std::vector<int> tones{5};
  std::vector<double> gammas_db{90.0, 100.0, 110.0, 120.0};
  double alpha = 0.01;
  double center_hz = 5e9;
  int max_order = 3;
  std::optional<std::size_t> pair_cap;

  void validate() const {
    if (bandwidths.empty() || tones.empty() || gammas_db.empty()) throw DomainError("sweep value lists must be nonempty");
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("sweep alpha must lie in (0,1)");
    if (pair_cap && *pair_cap < 1) throw DomainError("pair_cap must be >= 1");
    for (double w : bandwidths) (void)ProbeConfig(center_hz, w, 1);
    for (int m : tones)
      if (m < 1) throw DomainError("tone counts must be >= 1");
  }

  friend bool operator==(const SweepSpec&, const SweepSpec&) = default;
};

struct SweepRow {
  std::string room;
  double bandwidth = 0.0; // Hz
  int tones = 0;
  double gamma_db = 0.0;
  double mean_beta = 0.0;
  double std_beta = 0.0;  // population standard deviation over pairs
  std::size_t n_pairs = 0;

  friend bool operator==(const SweepRow&, const SweepRow&) = default;
};

struct SweepOptions {
  std::uint64_t seed = 1;   // drives the pair subsample
  unsigned parallelism = 1;
};

/// Analytic miss rate for one Alice/Eve placement.
inline double evaluate_pair(const Scene& scene, const Vec3& bob, const Vec3& alice, const Vec3& eve,
                            const ProbeConfig& probe, double alpha, double gamma_db, int max_order) {
  const auto h_ab = frequency_response(trace_paths(scene, alice, bob, max_order, probe.center()), probe);
  const auto h_eb = frequency_response(trace_paths(scene, eve, bob, max_order, probe.center()), probe);
  const double mu = noncentrality(h_eb, h_ab, noise_variance_db(gamma_db, probe.tones()));
  return analytic_rates(mu, probe.tones(), alpha).beta;
}

namespace detail {

inline SweepRow summarize(std::string room, double w, int m, double gamma_db, const std::vector<double>& betas) {
  // fixed summation order keeps the result independent of scheduling
  double sum = 0.0;
  for (double b : betas) sum += b;
  const double mean = sum / static_cast<double>(betas.size());
  double ss = 0.0;
  for (double b : betas) ss += (b - mean) * (b - mean);
  return {std::move(room), w, m, gamma_db, mean, std::sqrt(ss / static_cast<double>(betas.size())), betas.size()};
}

} // namespace detail

/// Sweep over a prepared path cache. Rows come out ordered by bandwidth, then tones, then Gamma.
inline std::vector<SweepRow> room_sweep(const PathCache& cache, const std::string& room, const SweepSpec& sweep,
                                        const SweepOptions& options = {}) {
  sweep.validate();
  const auto pairs = select_pairs(cache.size(), sweep.pair_cap, options.seed);
  if (pairs.empty()) throw GeometryError("room " + room + " has fewer than two grid positions");

  std::vector<SweepRow> rows;
  std::vector<double> distance2(pairs.size());
  std::vector<double> betas(pairs.size());
  for (double w : sweep.bandwidths) {
    for (int m : sweep.tones) {
      const ProbeConfig probe(sweep.center_hz, w, m);
      const auto responses = cache.responses(probe, options.parallelism);
      parallel_for(pairs.size(), options.parallelism, [&](std::size_t begin, std::size_t end) {
        for (std::size_t p = begin; p < end; ++p)
          distance2[p] = aligned_distance(responses[pairs[p].second], responses[pairs[p].first]);
      });
      const double k = decision_threshold(sweep.alpha, m);
      for (double g : sweep.gammas_db) {
        const double sigma2 = noise_variance_db(g, m);
        parallel_for(pairs.size(), options.parallelism, [&](std::size_t begin, std::size_t end) {
          for (std::size_t p = begin; p < end; ++p) betas[p] = noncentral_chi2_cdf(k, 2 * m, distance2[p] / sigma2);
        });
        rows.push_back(detail::summarize(room, w, m, g, betas));
      }
    }
  }
  return rows;
}

inline std::vector<SweepRow> room_sweep(const Scene& scene, const Vec3& bob, const RoomGrid& grid,
                                        const SweepSpec& sweep, const SweepOptions& options = {}) {
  sweep.validate();
  const PathCache cache(scene, bob, grid.positions, sweep.center_hz, sweep.max_order, options.parallelism);
  return room_sweep(cache, grid.spec.id, sweep, options);
}

// ---------------------------------------------------------------------------
// Monte Carlo validation of the analytic rates

enum class PhaseAlignment {
  measured,  // phi* from the noisy measurements, as a receiver would compute it
  noiseless, // phi* from the true rotated channels, the model behind the chi-square law
};

struct EmpiricalRates {
  double alpha_hat = 0.0; // false rejections of the true transmitter
  double beta_hat = 0.0;  // acceptances of the impostor
  std::size_t trials = 0;
};

struct MonteCarloOptions {
  PhaseAlignment alignment = PhaseAlignment::measured;
  unsigned parallelism = 1;
};

namespace detail {

template <typename Rng>
bool trial_accepts(const FrequencyResponse& reference_truth, const FrequencyResponse& claimant_truth,
                   const TestConfig& config, PhaseAlignment alignment, Rng& rng) {
  const double sigma2 = config.sigma2();
  const auto ref = measure(reference_truth, sigma2, rng);
  const auto claim = measure(claimant_truth, sigma2, rng);
  if (alignment == PhaseAlignment::measured)
    return authenticate(claim.response, ref.response, config).accept;
  const double phi = optimal_phase(claimant_truth, reference_truth) + claim.lo_phase - ref.lo_phase;
  return authenticate_at_phase(claim.response, ref.response, phi, config).accept;
}

} // namespace detail

/// Each trial draws its own reference and claimant measurements from a stream
/// seeded by (seed, trial index), so results do not depend on parallelism.
inline EmpiricalRates monte_carlo_rates(const FrequencyResponse& alice, const FrequencyResponse& eve,
                                        const TestConfig& config, std::size_t trials, std::uint64_t seed,
                                        const MonteCarloOptions& options = {}) {
  if (trials < 1) throw DomainError("monte_carlo_rates needs at least one trial");
  require_same_probe(alice, eve);
  detail::require_config_probe(alice, config);

  std::vector<std::uint8_t> rejected_alice(trials);
  std::vector<std::uint8_t> accepted_eve(trials);
  parallel_for(trials, options.parallelism, [&](std::size_t begin, std::size_t end) {
    for (std::size_t t = begin; t < end; ++t) {
      std::mt19937_64 rng(derive_seed(seed, t));
      rejected_alice[t] = !detail::trial_accepts(alice, alice, config, options.alignment, rng);
      accepted_eve[t] = detail::trial_accepts(alice, eve, config, options.alignment, rng);
    }
  });

  std::size_t false_alarms = 0;
  std::size_t misses = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    false_alarms += rejected_alice[t];
    misses += accepted_eve[t];
  }
  const double n = static_cast<double>(trials);
  return {static_cast<double>(false_alarms) / n, static_cast<double>(misses) / n, trials};
}

} // namespace phyauth
