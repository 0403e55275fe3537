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

// Command line front end. Data goes to stdout or --out, logs to stderr.
// Exit status: 0 success, 1 invalid input (usage, parse, validation), 2 runtime failure.

#include <phyauth/phyauth.hpp>

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

using namespace phyauth;

namespace {

struct Common {
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::string format = "csv";
  std::string out;
  unsigned parallelism = 1;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--scenario", c.scenario, "Scenario JSON file")->required();
  cmd->add_option("--seed", c.seed, "Master seed (defaults to the scenario seed)");
  cmd->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--out", c.out, "Write data here instead of stdout");
  cmd->add_option("--parallelism", c.parallelism, "Worker threads")->check(CLI::Range(1u, 1024u));
}

void log(const std::string& msg) { std::cerr << "phyauth: " << msg << '\n'; }

Vec3 parse_position(const std::string& text, const std::string& field) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw ValidationError(field, "expected x,y,z in meters, got '" + text + "'");
    }
  }
  if (v.size() != 3) throw ValidationError(field, "expected x,y,z in meters, got '" + text + "'");
  return {v[0], v[1], v[2]};
}

Vec3 inside(const Scenario& s, const Vec3& p, const std::string& field) {
  if (!s.scene.strictly_inside(p)) throw ValidationError(field, "position lies outside the building");
  return p;
}

/// Write `text` to --out or stdout.
void deliver(const Common& c, const std::string& text) {
  if (c.out.empty()) {
    std::cout << text;
    std::cout.flush();
    if (!std::cout) throw std::runtime_error("failed writing to standard output");
    return;
  }
  std::ofstream f(c.out, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + c.out + "' for writing");
  f << text;
  f.flush();
  if (!f) throw std::runtime_error("failed writing '" + c.out + "'");
}

std::string csv_join(std::initializer_list<std::string> cells) {
  std::string line;
  for (const auto& c : cells) {
    if (!line.empty()) line += ',';
    line += c;
  }
  return line + '\n';
}

std::vector<RoomGridSpec> selected_rooms(const Scenario& s, const std::string& room) {
  if (!room.empty()) return {s.room(room)};
  if (s.rooms.empty()) throw ValidationError("rooms", "scenario defines no rooms");
  return s.rooms;
}

SweepSpec sweep_with_cap(const Scenario& s, std::optional<std::size_t> cap) {
  SweepSpec sweep = s.sweep;
  if (cap) {
    if (*cap < 1) throw ValidationError("pair-cap", "must be >= 1");
    sweep.pair_cap = cap;
  }
  return sweep;
}

// ---------------------------------------------------------------------------
// trace

struct TraceArgs {
  Common common;
  std::string tx;
  std::string rx;
  std::optional<int> max_order;
};

void run_trace(const TraceArgs& a) {
  const auto s = load_scenario(a.common.scenario);
  const Vec3 tx = inside(s, parse_position(a.tx, "tx"), "tx");
  const Vec3 rx = a.rx.empty() ? s.bob : inside(s, parse_position(a.rx, "rx"), "rx");
  const int order = a.max_order.value_or(s.sweep.max_order);
  if (order < 0 || order > kMaxReflectionOrder) throw ValidationError("max-order", "must lie in [0, 6]");

  const auto paths = trace_paths(s.scene, tx, rx, order, s.probe.center());
  const auto h = frequency_response(paths, s.probe);
  log("traced " + std::to_string(paths.size()) + " paths");

  std::string text;
  if (parse_format(a.common.format) == OutputFormat::csv) {
    text += "kind,index,amplitude,delay_s,path_length_m,bounces,penetrations,frequency_hz,re,im\n";
    for (std::size_t i = 0; i < paths.size(); ++i) {
      const auto& p = paths[i];
      text += csv_join({"path", std::to_string(i), format_real(p.amplitude), format_real(p.delay),
                        format_real(p.path_length), std::to_string(p.bounce_count), std::to_string(p.penetrations), "",
                        "", ""});
    }
    for (std::size_t m = 0; m < h.size(); ++m)
      text += csv_join({"tone", std::to_string(m + 1), "", "", "", "", "",
                        format_real(s.probe.tone_frequency(static_cast<int>(m) + 1)), format_real(h[m].real()),
                        format_real(h[m].imag())});
  } else {
    nlohmann::ordered_json j;
    j["tx"] = {tx.x, tx.y, tx.z};
    j["rx"] = {rx.x, rx.y, rx.z};
    auto arr = nlohmann::ordered_json::array();
    for (const auto& p : paths) {
      nlohmann::ordered_json e;
      e["amplitude"] = p.amplitude;
      e["delay_s"] = p.delay;
      e["path_length_m"] = p.path_length;
      e["bounces"] = p.bounce_count;
      e["penetrations"] = p.penetrations;
      auto ids = nlohmann::ordered_json::array();
      for (int k : p.surfaces) ids.push_back(s.scene.surfaces()[static_cast<std::size_t>(k)].id);
      e["surfaces"] = ids;
      arr.push_back(e);
    }
    j["paths"] = arr;
    auto tones = nlohmann::ordered_json::array();
    for (std::size_t m = 0; m < h.size(); ++m)
      tones.push_back({{"frequency_hz", s.probe.tone_frequency(static_cast<int>(m) + 1)},
                       {"re", h[m].real()},
                       {"im", h[m].imag()}});
    j["response"] = tones;
    text = j.dump(2) + '\n';
  }
  deliver(a.common, text);
}

// ---------------------------------------------------------------------------
// test

struct TestArgs {
  Common common;
  std::string alice;
  std::string claimant;
  std::optional<double> gamma_db;
};

void run_test(const TestArgs& a) {
  const auto s = load_scenario(a.common.scenario);
  const Vec3 alice = inside(s, parse_position(a.alice, "alice"), "alice");
  const Vec3 claimant = inside(s, parse_position(a.claimant, "claimant"), "claimant");
  const NoiseBudget noise = a.gamma_db ? NoiseBudget::from_gamma_db(*a.gamma_db, s.noise.thermal_density(),
                                                                     s.noise.noise_figure(), s.noise.tone_bandwidth())
                                       : s.noise;
  const TestConfig config(s.probe, s.sweep.alpha, noise);

  const auto h_alice = frequency_response(trace_paths(s.scene, alice, s.bob, s.sweep.max_order, s.probe.center()), s.probe);
  const auto h_claim =
      frequency_response(trace_paths(s.scene, claimant, s.bob, s.sweep.max_order, s.probe.center()), s.probe);

  std::mt19937_64 rng(a.common.seed.value_or(s.seed));
  const auto ref = simulate_measurement(h_alice, config.sigma2(), rng);
  const auto claim = simulate_measurement(h_claim, config.sigma2(), rng);
  const auto out = authenticate(claim, ref, config, ChannelTruth{h_claim, h_alice});

  std::string text;
  if (parse_format(a.common.format) == OutputFormat::csv) {
    text = "L,k,phi_star,accept,mu_L,beta,gamma_db,sigma2\n";
    text += csv_join({format_real(out.statistic), format_real(out.threshold), format_real(out.phi_star),
                      out.accept ? "true" : "false", format_real(*out.mu_L), format_real(*out.beta),
                      format_real(noise.gamma_db()), format_real(config.sigma2())});
  } else {
    nlohmann::ordered_json j;
    j["L"] = out.statistic;
    j["k"] = out.threshold;
    j["phi_star"] = out.phi_star;
    j["accept"] = out.accept;
    j["mu_L"] = *out.mu_L;
    j["beta"] = *out.beta;
    j["gamma_db"] = noise.gamma_db();
    j["sigma2"] = config.sigma2();
    text = j.dump(2) + '\n';
  }
  deliver(a.common, text);
}

// ---------------------------------------------------------------------------
// sweep / plotdata

struct SweepArgs {
  Common common;
  std::string room;
  std::optional<std::size_t> pair_cap;
};

std::vector<SweepRow> sweep_rows(const Scenario& s, const SweepArgs& a, const SweepSpec& sweep) {
  const std::uint64_t seed = a.common.seed.value_or(s.seed);
  std::vector<SweepRow> rows;
  for (const auto& spec : selected_rooms(s, a.room)) {
    const auto start = std::chrono::steady_clock::now();
    const auto grid = build_room_grid(spec);
    auto part = room_sweep(s.scene, s.bob, grid, sweep, {seed, a.common.parallelism});
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
    log("room " + spec.id + ": " + std::to_string(grid.size()) + " positions, " + std::to_string(part.front().n_pairs) +
        " pairs, " + std::to_string(part.size()) + " rows in " + std::to_string(dt.count()) + " s");
    rows.insert(rows.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  return rows;
}

void run_sweep(const SweepArgs& a) {
  const auto s = load_scenario(a.common.scenario);
  const auto rows = sweep_rows(s, a, sweep_with_cap(s, a.pair_cap));
  std::ostringstream out;
  emit_results(rows, parse_format(a.common.format), out);
  deliver(a.common, out.str());
}

struct PlotArgs {
  SweepArgs sweep;
  std::optional<int> fixed_tones;
  std::optional<double> fixed_bandwidth;
};

// Two slices of the sweep: beta vs W at fixed M, and beta vs M at fixed W.
void run_plotdata(const PlotArgs& a) {
  const auto s = load_scenario(a.sweep.common.scenario);
  SweepSpec sweep = sweep_with_cap(s, a.sweep.pair_cap);
  const int m0 = a.fixed_tones.value_or(s.probe.tones());
  const double w0 = a.fixed_bandwidth.value_or(s.probe.bandwidth());
  if (m0 < 1) throw ValidationError("fixed-tones", "must be >= 1");
  detail::with_field("fixed-bandwidth", [&] { (void)ProbeConfig(s.probe.center(), w0, 1); });

  SweepSpec vs_w = sweep;
  vs_w.tones = {m0};
  SweepSpec vs_m = sweep;
  vs_m.bandwidths = {w0};
  const auto rows_w = sweep_rows(s, a.sweep, vs_w);
  const auto rows_m = sweep_rows(s, a.sweep, vs_m);

  std::string text;
  if (parse_format(a.sweep.common.format) == OutputFormat::csv) {
    text = "series," + std::string(kSweepCsvHeader) + '\n';
    for (const auto& r : rows_w) text += "beta_vs_W," + csv_line(r) + '\n';
    for (const auto& r : rows_m) text += "beta_vs_M," + csv_line(r) + '\n';
  } else {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& r : rows_w) {
      nlohmann::ordered_json j{{"series", "beta_vs_W"}};
      j.update(row_json(r));
      arr.push_back(j);
    }
    for (const auto& r : rows_m) {
      nlohmann::ordered_json j{{"series", "beta_vs_M"}};
      j.update(row_json(r));
      arr.push_back(j);
    }
    text = arr.dump(2) + '\n';
  }
  deliver(a.sweep.common, text);
}

// ---------------------------------------------------------------------------
// montecarlo

struct MonteCarloArgs {
  Common common;
  std::string room;
  std::size_t placements = 10;
  std::size_t trials = 10000;
  std::optional<double> gamma_db;
  std::string alignment = "measured";
};

void run_montecarlo(const MonteCarloArgs& a) {
  const auto s = load_scenario(a.common.scenario);
  if (a.placements < 1) throw ValidationError("placements", "must be >= 1");
  if (a.trials < 1) throw ValidationError("trials", "must be >= 1");
  const std::uint64_t seed = a.common.seed.value_or(s.seed);
  const PhaseAlignment alignment = a.alignment == "noiseless" ? PhaseAlignment::noiseless : PhaseAlignment::measured;
  const std::vector<double> gammas = a.gamma_db ? std::vector{*a.gamma_db} : s.sweep.gammas_db;

  const auto spec = s.room(a.room.empty() ? selected_rooms(s, "").front().id : a.room);
  const auto grid = build_room_grid(spec);
  const auto pairs = select_pairs(grid.size(), a.placements, derive_seed(seed, 0));
  const PathCache cache(s.scene, s.bob, grid.positions, s.probe.center(), s.sweep.max_order, a.common.parallelism);
  const auto responses = cache.responses(s.probe, a.common.parallelism);

  std::vector<std::vector<std::string>> records;
  for (double g : gammas) {
    const TestConfig config(s.probe, s.sweep.alpha,
                            NoiseBudget::from_gamma_db(g, s.noise.thermal_density(), s.noise.noise_figure(),
                                                       s.noise.tone_bandwidth()));
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const auto& alice = responses[pairs[i].first];
      const auto& eve = responses[pairs[i].second];
      const double mu = noncentrality(eve, alice, config.sigma2());
      const auto rates = analytic_rates(mu, s.probe.tones(), s.sweep.alpha);
      const auto emp = monte_carlo_rates(alice, eve, config, a.trials, derive_seed(seed, i + 1),
                                         {alignment, a.common.parallelism});
      records.push_back({spec.id, std::to_string(pairs[i].first), std::to_string(pairs[i].second), format_real(g),
                         format_real(mu), format_real(rates.beta), format_real(emp.beta_hat),
                         format_real(s.sweep.alpha), format_real(emp.alpha_hat), std::to_string(emp.trials)});
    }
  }
  log("montecarlo: " + std::to_string(records.size()) + " placements x Gamma, " + std::to_string(a.trials) +
      " trials each, " + a.alignment + " phase");

  static const std::vector<std::string> keys{"room",  "alice", "eve",   "gamma_db",  "mu_L",
                                             "beta", "beta_hat", "alpha", "alpha_hat", "trials"};
  std::string text;
  if (parse_format(a.common.format) == OutputFormat::csv) {
    for (std::size_t k = 0; k < keys.size(); ++k) text += (k ? "," : "") + keys[k];
    text += '\n';
    for (const auto& r : records) {
      for (std::size_t k = 0; k < r.size(); ++k) text += (k ? "," : "") + r[k];
      text += '\n';
    }
  } else {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& r : records) {
      nlohmann::ordered_json j;
      j["room"] = r[0];
      for (std::size_t k = 1; k < r.size(); ++k) j[keys[k]] = nlohmann::json::parse(r[k]);
      arr.push_back(j);
    }
    text = arr.dump(2) + '\n';
  }
  deliver(a.common, text);
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Physical-layer authentication simulator"};
  app.require_subcommand(1);

  TraceArgs trace;
  auto* c_trace = app.add_subcommand("trace", "Rays and frequency response for one transmitter");
  add_common(c_trace, trace.common);
  c_trace->add_option("--tx", trace.tx, "Transmitter x,y,z")->required();
  c_trace->add_option("--rx", trace.rx, "Receiver x,y,z (default: Bob)");
  c_trace->add_option("--max-order", trace.max_order, "Reflection order");

  TestArgs test;
  auto* c_test = app.add_subcommand("test", "One authentication of a claimant against Alice's reference");
  add_common(c_test, test.common);
  c_test->add_option("--alice", test.alice, "Alice x,y,z")->required();
  c_test->add_option("--claimant", test.claimant, "Claimant x,y,z")->required();
  c_test->add_option("--gamma-db", test.gamma_db, "Override Gamma (dB)");

  SweepArgs sweep;
  auto* c_sweep = app.add_subcommand("sweep", "Room-mean miss rate over the scenario sweep");
  add_common(c_sweep, sweep.common);
  c_sweep->add_option("--room", sweep.room, "Room id (default: every room)");
  c_sweep->add_option("--pair-cap", sweep.pair_cap, "Subsample at most this many Alice/Eve pairs");

  MonteCarloArgs mc;
  auto* c_mc = app.add_subcommand("montecarlo", "Empirical against analytic error rates");
  add_common(c_mc, mc.common);
  c_mc->add_option("--room", mc.room, "Room id (default: first room)");
  c_mc->add_option("--placements", mc.placements, "Alice/Eve pairs to simulate");
  c_mc->add_option("--trials", mc.trials, "Trials per pair");
  c_mc->add_option("--gamma-db", mc.gamma_db, "Single Gamma (default: the sweep list)");
  c_mc->add_option("--alignment", mc.alignment, "Phase used in the statistic")
      ->check(CLI::IsMember({"measured", "noiseless"}));

  PlotArgs plot;
  auto* c_plot = app.add_subcommand("plotdata", "Sweep slices: beta vs W at fixed M and beta vs M at fixed W");
  add_common(c_plot, plot.sweep.common);
  c_plot->add_option("--room", plot.sweep.room, "Room id (default: every room)");
  c_plot->add_option("--pair-cap", plot.sweep.pair_cap, "Subsample at most this many Alice/Eve pairs");
  c_plot->add_option("--fixed-tones", plot.fixed_tones, "M for the beta-vs-W slice (default: probe tones)");
  c_plot->add_option("--fixed-bandwidth", plot.fixed_bandwidth, "W in Hz for the beta-vs-M slice (default: probe)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (c_trace->parsed()) run_trace(trace);
    else if (c_test->parsed()) run_test(test);
    else if (c_sweep->parsed()) run_sweep(sweep);
    else if (c_mc->parsed()) run_montecarlo(mc);
    else if (c_plot->parsed()) run_plotdata(plot);
  } catch (const ValidationError& e) {
    log(std::string("invalid input: ") + e.what());
    return 1;
  } catch (const ParseError& e) {
    log(std::string("cannot read scenario: ") + e.what());
    return 1;
  } catch (const GeometryError& e) {
    log(std::string("invalid geometry: ") + e.what());
    return 1;
  } catch (const std::exception& e) {
    log(std::string("error: ") + e.what());
    return 2;
  }
  return 0;
}
