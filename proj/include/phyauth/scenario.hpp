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

// Scenario documents (JSON). See docs/scenario-format.md for the schema.

#pragma once

#include "authenticator.hpp"
#include "errors.hpp"
#include "experiment.hpp"
#include "propagation.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace phyauth {

struct Scenario {
  std::string name;
  Scene scene;
  Vec3 bob;
  std::vector<RoomGridSpec> rooms;
  ProbeConfig probe;
  NoiseBudget noise;
  SweepSpec sweep;
  std::uint64_t seed = 1;

  const RoomGridSpec& room(const std::string& id) const {
    for (const auto& r : rooms)
      if (r.id == id) return r;
    throw ValidationError("room", "no room with id '" + id + "'");
  }

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

namespace detail {

using nlohmann::json;

inline constexpr std::array<const char*, 3> kAxisNames{"x", "y", "z"};

inline int axis_from_name(const std::string& s, const std::string& field) {
  for (int a = 0; a < 3; ++a)
    if (s == kAxisNames[static_cast<std::size_t>(a)]) return a;
  throw ValidationError(field, "normal must be one of x, y, z");
}

template <typename T>
T value_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

inline Vec3 read_vec3(const json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 3) throw ValidationError(field, "expected [x, y, z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline std::array<double, 2> read_range(const json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 2) throw ValidationError(field, "expected [min, max]");
  const std::array<double, 2> r{j[0].get<double>(), j[1].get<double>()};
  if (!(r[0] < r[1])) throw ValidationError(field, "range must be increasing");
  return r;
}

template <typename Fn>
auto with_field(const std::string& field, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ValidationError&) {
    throw;
  } catch (const nlohmann::json::exception&) {
    throw;
  } catch (const std::exception& e) {
    throw ValidationError(field, e.what());
  }
}

inline Scene read_scene(const json& doc) {
  const json& b = doc.at("building");
  const Vec3 size = read_vec3(b.at("size"), "building.size");

  ShellMaterials shell;
  if (b.contains("shell_reflection")) {
    const json& r = b.at("shell_reflection");
    if (r.is_number()) {
      shell = ShellMaterials::uniform(r.get<double>());
    } else {
      for (std::size_t f = 0; f < 6; ++f) shell.reflection[f] = value_or(r, kShellFaceNames[f], 0.6);
    }
  }

  std::vector<Surface> partitions;
  if (doc.contains("partitions")) {
    const json& list = doc.at("partitions");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const json& p = list[i];
      const std::string field = "partitions[" + std::to_string(i) + "]";
      Surface s;
      s.id = value_or<std::string>(p, "id", field);
      s.axis = axis_from_name(p.at("normal").get<std::string>(), field + ".normal");
      s.position = p.at("position").get<double>();
      const json& span = p.at("span");
      if (!span.is_array() || span.size() != 2) throw ValidationError(field + ".span", "expected two ranges");
      s.span = {read_range(span[0], field + ".span[0]"), read_range(span[1], field + ".span[1]")};
      s.reflection = value_or(p, "reflection", 0.6);
      s.transmission = value_or(p, "transmission", 0.4);
      partitions.push_back(std::move(s));
    }
  }

  try {
    return Scene(size, shell, std::move(partitions));
  } catch (const GeometryError& e) {
    const std::string what = e.what();
    throw ValidationError(what.rfind("partition", 0) == 0 ? "partitions" : "building", what);
  }
}

inline RoomGridSpec read_room(const json& r, std::size_t i) {
  const std::string field = "rooms[" + std::to_string(i) + "]";
  RoomGridSpec spec;
  spec.id = r.at("id").get<std::string>();
  spec.x = read_range(r.at("x"), field + ".x");
  spec.y = read_range(r.at("y"), field + ".y");
  spec.spacing = value_or(r, "spacing", 0.2);
  spec.height = value_or(r, "height", 2.0);
  spec.margin = value_or(r, "margin", 0.1);
  return spec;
}

inline void validate(const Scenario& s) {
  if (!s.scene.strictly_inside(s.bob)) throw ValidationError("bob", "position lies outside the building");

  std::set<std::string> ids;
  for (std::size_t i = 0; i < s.rooms.size(); ++i) {
    const auto& r = s.rooms[i];
    const std::string field = "rooms[" + std::to_string(i) + "]";
    if (r.id.empty()) throw ValidationError(field + ".id", "room id must be nonempty");
    if (!ids.insert(r.id).second) throw ValidationError(field + ".id", "duplicate room id '" + r.id + "'");
    const auto grid = with_field(field, [&] { return build_room_grid(r); });
    for (const auto& p : grid.positions) {
      if (!s.scene.strictly_inside(p)) throw ValidationError(field, "grid point lies outside the building");
      if (p == s.bob) throw ValidationError("bob", "coincides with a grid point of " + r.id);
    }
  }
  with_field("sweep", [&] { s.sweep.validate(); });
  if (s.sweep.max_order < 0 || s.sweep.max_order > kMaxReflectionOrder)
    throw ValidationError("sweep.max_order", "must lie in [0, 6]");
  if (s.sweep.center_hz != s.probe.center())
    throw ValidationError("sweep", "sweep center frequency must equal the probe center frequency");
}

inline json vec_json(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }
inline json range_json(const std::array<double, 2>& r) { return json::array({r[0], r[1]}); }

} // namespace detail

/// Parse and validate a scenario document, filling defaults.
inline Scenario parse_scenario(const std::string& text) {
  using detail::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("scenario is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("scenario must be a JSON object");

  try {
    Scene scene = detail::read_scene(doc);
    const Vec3 bob = detail::read_vec3(doc.at("bob"), "bob");

    std::vector<RoomGridSpec> rooms;
    if (doc.contains("rooms"))
      for (std::size_t i = 0; i < doc.at("rooms").size(); ++i) rooms.push_back(detail::read_room(doc.at("rooms")[i], i));

    const json probe_doc = doc.value("probe", json::object());
    const ProbeConfig probe = detail::with_field("probe", [&] {
      return ProbeConfig(detail::value_or(probe_doc, "center_hz", 5e9), detail::value_or(probe_doc, "bandwidth_hz", 1e8),
                         detail::value_or(probe_doc, "tones", 5));
    });

    const json noise_doc = doc.value("noise", json::object());
    const NoiseBudget noise = detail::with_field("noise", [&] {
      return NoiseBudget(detail::value_or(noise_doc, "tx_power_mw", 100.0),
                         detail::value_or(noise_doc, "thermal_density_mw_per_hz", NoiseBudget::kDefaultThermalDensity),
                         detail::value_or(noise_doc, "noise_figure", NoiseBudget::kDefaultNoiseFigure),
                         detail::value_or(noise_doc, "tone_bandwidth_hz", NoiseBudget::kDefaultToneBandwidth));
    });

    const json sweep_doc = doc.value("sweep", json::object());
    SweepSpec sweep;
    sweep.center_hz = probe.center();
    sweep.bandwidths = detail::value_or(sweep_doc, "bandwidths_hz", std::vector<double>{probe.bandwidth()});
    sweep.tones = detail::value_or(sweep_doc, "tones", std::vector<int>{probe.tones()});
    sweep.gammas_db = detail::value_or(sweep_doc, "gammas_db", std::vector<double>{90.0, 100.0, 110.0, 120.0});
    sweep.alpha = detail::value_or(sweep_doc, "alpha", 0.01);
    sweep.max_order = detail::value_or(sweep_doc, "max_order", 3);
    if (sweep_doc.contains("pair_cap") && !sweep_doc.at("pair_cap").is_null()) {
      const auto cap = sweep_doc.at("pair_cap").get<long long>();
      if (cap < 1) throw ValidationError("sweep.pair_cap", "must be >= 1");
      sweep.pair_cap = static_cast<std::size_t>(cap);
    }

    Scenario s{detail::value_or<std::string>(doc, "name", "scenario"),
               std::move(scene),
               bob,
               std::move(rooms),
               probe,
               noise,
               std::move(sweep),
               detail::value_or<std::uint64_t>(doc, "seed", 1)};
    detail::validate(s);
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed scenario: ") + e.what());
  }
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scenario file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

/// Fully explicit document; parse_scenario(to_json(s).dump()) == s.
inline nlohmann::ordered_json scenario_to_json(const Scenario& s) {
  using nlohmann::ordered_json;
  ordered_json doc;
  doc["name"] = s.name;
  doc["seed"] = s.seed;

  ordered_json shell;
  for (std::size_t f = 0; f < 6; ++f) shell[kShellFaceNames[f]] = s.scene.shell().reflection[f];
  doc["building"] = {{"size", detail::vec_json(s.scene.size())}, {"shell_reflection", shell}};

  ordered_json parts = ordered_json::array();
  for (const auto& p : s.scene.partitions()) {
    ordered_json j;
    j["id"] = p.id;
    j["normal"] = detail::kAxisNames[static_cast<std::size_t>(p.axis)];
    j["position"] = p.position;
    j["span"] = {detail::range_json(p.span[0]), detail::range_json(p.span[1])};
    j["reflection"] = p.reflection;
    j["transmission"] = p.transmission;
    parts.push_back(std::move(j));
  }
  doc["partitions"] = std::move(parts);
  doc["bob"] = detail::vec_json(s.bob);

  ordered_json rooms = ordered_json::array();
  for (const auto& r : s.rooms) {
    ordered_json j;
    j["id"] = r.id;
    j["x"] = detail::range_json(r.x);
    j["y"] = detail::range_json(r.y);
    j["spacing"] = r.spacing;
    j["height"] = r.height;
    j["margin"] = r.margin;
    rooms.push_back(std::move(j));
  }
  doc["rooms"] = std::move(rooms);

  doc["probe"] = {{"center_hz", s.probe.center()}, {"bandwidth_hz", s.probe.bandwidth()}, {"tones", s.probe.tones()}};
  doc["noise"] = {{"tx_power_mw", s.noise.tx_power()},
                  {"thermal_density_mw_per_hz", s.noise.thermal_density()},
                  {"noise_figure", s.noise.noise_figure()},
                  {"tone_bandwidth_hz", s.noise.tone_bandwidth()}};

  ordered_json sweep;
  sweep["bandwidths_hz"] = s.sweep.bandwidths;
  sweep["tones"] = s.sweep.tones;
  sweep["gammas_db"] = s.sweep.gammas_db;
  sweep["alpha"] = s.sweep.alpha;
  sweep["max_order"] = s.sweep.max_order;
  sweep["pair_cap"] = s.sweep.pair_cap ? ordered_json(*s.sweep.pair_cap) : ordered_json(nullptr);
  doc["sweep"] = std::move(sweep);
  return doc;
}

inline void save_scenario(const Scenario& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write scenario file '" + path + "'");
  out << scenario_to_json(s).dump(2) << '\n';
  if (!out) throw std::runtime_error("failed writing scenario file '" + path + "'");
}

} // namespace phyauth
