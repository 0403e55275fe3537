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

#pragma once

#include <stdexcept>
#include <string>

namespace phyauth {

// Argument outside the mathematical domain of a function (negative x, p not in (0,1), ...)
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

// Invalid positions or scene geometry
class GeometryError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Two frequency responses sampled on different probe grids
class ProbeMismatchError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Malformed scenario document
class ParseError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Well-formed scenario that violates an invariant. field() names the offender.
class ValidationError : public std::invalid_argument {
public:
  ValidationError(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

private:
  std::string field_;
};

} // namespace phyauth
