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

// CSV / JSON rendering of sweep rows.

#pragma once

#include "errors.hpp"
#include "experiment.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>

namespace phyauth {

enum class OutputFormat { csv, json };

inline OutputFormat parse_format(std::string_view s) {
  if (s == "csv") return OutputFormat::csv;
  if (s == "json") return OutputFormat::json;
  throw ValidationError("format", "expected csv or json, got '" + std::string(s) + "'");
}

inline constexpr std::string_view kSweepCsvHeader = "room,W_hz,M,gamma_db,mean_beta,std_beta,n_pairs";

/// Shortest decimal that round-trips. Plain notation for ordinary magnitudes
/// (100000000, 0.032), exponent form only for very small or very large values.
inline std::string format_real(double v) {
  char buf[64];
  const double a = std::abs(v);
  const auto fmt = (a == 0.0 || (a >= 1e-5 && a < 1e17)) ? std::chars_format::fixed : std::chars_format::general;
  const auto res = std::to_chars(buf, buf + sizeof buf, v, fmt);
  return std::string(buf, res.ptr);
}

inline std::string csv_line(const SweepRow& r) {
  return r.room + ',' + format_real(r.bandwidth) + ',' + std::to_string(r.tones) + ',' + format_real(r.gamma_db) + ',' +
         format_real(r.mean_beta) + ',' + format_real(r.std_beta) + ',' + std::to_string(r.n_pairs);
}

inline nlohmann::ordered_json row_json(const SweepRow& r) {
  nlohmann::ordered_json j;
  j["room"] = r.room;
  j["W_hz"] = r.bandwidth;
  j["M"] = r.tones;
  j["gamma_db"] = r.gamma_db;
  j["mean_beta"] = r.mean_beta;
  j["std_beta"] = r.std_beta;
  j["n_pairs"] = r.n_pairs;
  return j;
}

inline void emit_results(std::span<const SweepRow> rows, OutputFormat format, std::ostream& out) {
  if (rows.empty()) throw ValidationError("rows", "nothing to emit");
  if (format == OutputFormat::csv) {
    out << kSweepCsvHeader << '\n';
    for (const auto& r : rows) out << csv_line(r) << '\n';
  } else {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& r : rows) arr.push_back(row_json(r));
    out << arr.dump(2) << '\n';
  }
  if (!out) throw std::runtime_error("failed writing results");
}

inline void emit_results(std::span<const SweepRow> rows, OutputFormat format, const std::string& path) {
  if (rows.empty()) throw ValidationError("rows", "nothing to emit");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  emit_results(rows, format, out);
  out.flush();
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

} // namespace phyauth
