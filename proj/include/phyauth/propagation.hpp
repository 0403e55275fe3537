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

// Specular multipath in an axis-aligned building.
//
// The building is a shoebox [0,Lx] x [0,Ly] x [0,Lz] whose six faces always
// reflect (coefficient may be zero), plus optional interior partitions: finite
// axis-aligned rectangles that both reflect and let energy through with a
// transmission coefficient. Rays are found with the image method. Antennas are
// isotropic, amplitudes are field ratios evaluated at the probe center
// frequency, and there is no diffraction or scattering.

#pragma once

#include "errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace phyauth {

inline constexpr double kSpeedOfLight = 2.99792458e8; // m/s

/// Point or displacement in meters; index 0, 1, 2 is x, y, z.
struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double& operator[](std::size_t i) noexcept { return i == 0 ? x : (i == 1 ? y : z); }
  double operator[](std::size_t i) const noexcept { return i == 0 ? x : (i == 1 ? y : z); }

  friend Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend Vec3 operator*(double s, const Vec3& a) { return {s * a.x, s * a.y, s * a.z}; }
  friend bool operator==(const Vec3&, const Vec3&) = default;
};

inline double norm(const Vec3& a) { return std::hypot(a.x, a.y, a.z); }
inline double distance(const Vec3& a, const Vec3& b) { return norm(a - b); }

// ---------------------------------------------------------------------------
// Probe grid

/// Tones m = 1..M sit at f0 - W/2 + m * W/M, i.e. the band (f0 - W/2, f0 + W/2].
class ProbeConfig {
public:
  ProbeConfig(double center_hz, double bandwidth_hz, int tones)
      : f0_(center_hz), bandwidth_(bandwidth_hz), tones_(tones) {
    if (!(bandwidth_hz > 0.0)) throw DomainError("probe bandwidth must be positive");
    if (tones < 1) throw DomainError("probe needs at least one tone");
    if (!(center_hz - 0.5 * bandwidth_hz > 0.0)) throw DomainError("probe band must lie above 0 Hz");
  }

  double center() const noexcept { return f0_; }
  double bandwidth() const noexcept { return bandwidth_; }
  int tones() const noexcept { return tones_; }
  double spacing() const noexcept { return bandwidth_ / tones_; }

  // 1-based tone index
  double tone_frequency(int m) const noexcept { return f0_ - 0.5 * bandwidth_ + m * spacing(); }

  std::vector<double> frequencies() const {
    std::vector<double> f(static_cast<std::size_t>(tones_));
    for (int m = 1; m <= tones_; ++m) f[static_cast<std::size_t>(m - 1)] = tone_frequency(m);
    return f;
  }

  double wavelength() const noexcept { return kSpeedOfLight / f0_; }

  friend bool operator==(const ProbeConfig&, const ProbeConfig&) = default;

private:
  double f0_;
  double bandwidth_;
  int tones_;
};

/// M complex channel gains sampled on a probe grid.
class FrequencyResponse {
public:
  FrequencyResponse(ProbeConfig probe, std::vector<std::complex<double>> samples)
      : probe_(probe), samples_(std::move(samples)) {
    if (samples_.size() != static_cast<std::size_t>(probe_.tones()))
      throw ProbeMismatchError("frequency response has " + std::to_string(samples_.size()) +
                               " samples but the probe has " + std::to_string(probe_.tones()) + " tones");
  }

  const ProbeConfig& probe() const noexcept { return probe_; }
  std::span<const std::complex<double>> samples() const noexcept { return samples_; }
  std::size_t size() const noexcept { return samples_.size(); }
  const std::complex<double>& operator[](std::size_t m) const { return samples_[m]; }

  FrequencyResponse scaled(std::complex<double> factor) const {
    auto out = samples_;
    for (auto& s : out) s *= factor;
    return {probe_, std::move(out)};
  }

  double energy() const noexcept {
    double e = 0.0;
    for (const auto& s : samples_) e += std::norm(s);
    return e;
  }

  friend bool operator==(const FrequencyResponse&, const FrequencyResponse&) = default;

private:
  ProbeConfig probe_;
  std::vector<std::complex<double>> samples_;
};

inline void require_same_probe(const FrequencyResponse& a, const FrequencyResponse& b) {
  if (!(a.probe() == b.probe())) throw ProbeMismatchError("frequency responses were sampled on different probes");
}

// ---------------------------------------------------------------------------
// Scene

/// Axis-aligned rectangle. `axis` is the plane normal (0=x, 1=y, 2=z); `span`
/// gives the extent along the two remaining axes in increasing axis order.
struct Surface {
  std::string id;
  int axis = 0;
  double position = 0.0;
  std::array<std::array<double, 2>, 2> span{};
  double reflection = 0.6;
  double transmission = 0.4;
  bool boundary = false;

  // the two in-plane axes
  std::array<int, 2> tangent_axes() const noexcept {
    switch (axis) {
      case 0: return {1, 2};
      case 1: return {0, 2};
      default: return {0, 1};
    }
  }

  bool covers(const Vec3& p, double slack = 1e-9) const noexcept {
    const auto t = tangent_axes();
    for (int i = 0; i < 2; ++i) {
      const double c = p[static_cast<std::size_t>(t[static_cast<std::size_t>(i)])];
      if (c < span[static_cast<std::size_t>(i)][0] - slack || c > span[static_cast<std::size_t>(i)][1] + slack) return false;
    }
    return true;
  }

  Vec3 mirror(const Vec3& p) const noexcept {
    Vec3 q = p;
    q[static_cast<std::size_t>(axis)] = 2.0 * position - p[static_cast<std::size_t>(axis)];
    return q;
  }

  double signed_distance(const Vec3& p) const noexcept { return p[static_cast<std::size_t>(axis)] - position; }

  friend bool operator==(const Surface&, const Surface&) = default;
};

/// Reflection coefficients of the six faces of the building shell,
/// ordered x_min, x_max, y_min, y_max, z_min, z_max.
struct ShellMaterials {
  std::array<double, 6> reflection{0.6, 0.6, 0.6, 0.6, 0.6, 0.6};

  static ShellMaterials uniform(double rho) { return {{rho, rho, rho, rho, rho, rho}}; }
  friend bool operator==(const ShellMaterials&, const ShellMaterials&) = default;
};

inline constexpr std::array<const char*, 6> kShellFaceNames{"x_min", "x_max", "y_min", "y_max", "z_min", "z_max"};

/// Immutable building model. Surfaces are the six shell faces followed by the partitions.
class Scene {
public:
  explicit Scene(Vec3 size, ShellMaterials shell = {}, std::vector<Surface> partitions = {})
      : size_(size), shell_(shell), partitions_(std::move(partitions)) {
    for (std::size_t a = 0; a < 3; ++a)
      if (!(size_[a] > 0.0)) throw GeometryError("scene dimensions must be positive");

    for (std::size_t f = 0; f < 6; ++f) {
      Surface s;
      s.id = kShellFaceNames[f];
      s.axis = static_cast<int>(f / 2);
      s.position = (f % 2 == 0) ? 0.0 : size_[f / 2];
      const auto t = s.tangent_axes();
      s.span = {{{0.0, size_[static_cast<std::size_t>(t[0])]}, {0.0, size_[static_cast<std::size_t>(t[1])]}}};
      s.reflection = shell_.reflection[f];
      s.transmission = 0.0;
      s.boundary = true;
      check_coefficients(s);
      surfaces_.push_back(std::move(s));
    }
    for (auto p : partitions_) {
      if (p.axis < 0 || p.axis > 2) throw GeometryError("partition " + p.id + ": axis must be 0, 1 or 2");
      const auto ax = static_cast<std::size_t>(p.axis);
      if (!(p.position > 0.0 && p.position < size_[ax]))
        throw GeometryError("partition " + p.id + ": plane lies outside the building");
      const auto t = p.tangent_axes();
      for (std::size_t i = 0; i < 2; ++i) {
        const auto& r = p.span[i];
        if (!(r[0] < r[1]) || r[0] < 0.0 || r[1] > size_[static_cast<std::size_t>(t[i])])
          throw GeometryError("partition " + p.id + ": span must be increasing and inside the building");
      }
      p.boundary = false;
      check_coefficients(p);
      surfaces_.push_back(std::move(p));
    }
  }

  /// Shell with nonreflecting faces: the only ray is line of sight.
  static Scene free_space(Vec3 size) { return Scene(size, ShellMaterials::uniform(0.0)); }

  const Vec3& size() const noexcept { return size_; }
  const ShellMaterials& shell() const noexcept { return shell_; }
  const std::vector<Surface>& partitions() const noexcept { return partitions_; }
  const std::vector<Surface>& surfaces() const noexcept { return surfaces_; }

  bool strictly_inside(const Vec3& p) const noexcept {
    for (std::size_t a = 0; a < 3; ++a)
      if (!(p[a] > 0.0 && p[a] < size_[a])) return false;
    return true;
  }

  friend bool operator==(const Scene& a, const Scene& b) {
    return a.size_ == b.size_ && a.shell_ == b.shell_ && a.partitions_ == b.partitions_;
  }

private:
  static void check_coefficients(const Surface& s) {
    if (!(s.reflection >= 0.0 && s.reflection <= 1.0))
      throw GeometryError("surface " + s.id + ": reflection coefficient must lie in [0,1]");
    if (!(s.transmission >= 0.0 && s.transmission <= 1.0))
      throw GeometryError("surface " + s.id + ": transmission coefficient must lie in [0,1]");
  }

  Vec3 size_;
  ShellMaterials shell_;
  std::vector<Surface> partitions_;
  std::vector<Surface> surfaces_;
};

// ---------------------------------------------------------------------------
// Ray tracing

struct PathComponent {
  double amplitude = 0.0;     // field ratio, <= lambda0 / (4 pi path_length)
  double delay = 0.0;         // s, path_length / c
  double path_length = 0.0;   // m
  int bounce_count = 0;
  int penetrations = 0;       // partitions crossed
  std::vector<int> surfaces;  // indices into Scene::surfaces(), in order of reflection from tx
};

inline constexpr int kMaxReflectionOrder = 6;
inline constexpr double kPathAmplitudeFloor = 1e-12; // relative to the free-space line-of-sight amplitude

namespace detail {

// Product of transmission coefficients of all partitions that segment a->b
// passes through. Endpoints lying on a partition (reflection points) do not count.
inline double segment_transmission(const Scene& scene, const Vec3& a, const Vec3& b, int& crossings) {
  constexpr double eps = 1e-10;
  double gain = 1.0;
  for (const auto& s : scene.surfaces()) {
    if (s.boundary) continue;
    const double da = s.signed_distance(a);
    const double db = s.signed_distance(b);
    if (!((da > eps && db < -eps) || (da < -eps && db > eps))) continue;
    const double t = da / (da - db);
    if (!s.covers(a + t * (b - a), 0.0)) continue;
    gain *= s.transmission;
    ++crossings;
  }
  return gain;
}

struct TraceState {
  const Scene& scene;
  const Vec3& tx;
  const Vec3& rx;
  double lambda0;
  double floor;
  int max_order;
  std::vector<int> sequence;
  std::vector<Vec3> images; // images[i] = tx mirrored across sequence[0..i]
  std::vector<PathComponent> out;
};

// Validate the current reflection sequence by walking back from rx toward tx through the images.
inline void emit_path(TraceState& st, double reflection_gain) {
  const auto& surfaces = st.scene.surfaces();
  const std::size_t order = st.sequence.size();
  const Vec3& last_image = order == 0 ? st.tx : st.images.back();
  const double length = distance(last_image, st.rx);
  if (!(length > 0.0)) return;

  // points[0] = rx, then reflection points from the last bounce back to the first, then tx
  std::vector<Vec3> points;
  points.reserve(order + 2);
  points.push_back(st.rx);
  for (std::size_t i = order; i-- > 0;) {
    const Surface& s = surfaces[static_cast<std::size_t>(st.sequence[i])];
    const Vec3& image = st.images[i];
    const Vec3& target = points.back();
    const double di = s.signed_distance(image);
    const double dt = s.signed_distance(target);
    // image and target must sit strictly on opposite sides of the reflecting plane
    if (!((di > 1e-12 && dt < -1e-12) || (di < -1e-12 && dt > 1e-12))) return;
    const double t = di / (di - dt);
    Vec3 hit = image + t * (target - image);
    hit[static_cast<std::size_t>(s.axis)] = s.position;
    if (!s.covers(hit)) return;
    points.push_back(hit);
  }
  points.push_back(st.tx);

  double gain = reflection_gain;
  int crossings = 0;
  for (std::size_t i = 0; i + 1 < points.size() && gain > 0.0; ++i)
    gain *= segment_transmission(st.scene, points[i + 1], points[i], crossings);

  const double amplitude = st.lambda0 / (4.0 * std::numbers::pi * length) * gain;
  if (!(amplitude >= st.floor) || amplitude == 0.0) return;

  PathComponent p;
  p.amplitude = amplitude;
  p.path_length = length;
  p.delay = length / kSpeedOfLight;
  p.bounce_count = static_cast<int>(order);
  p.penetrations = crossings;
  p.surfaces = st.sequence;
  st.out.push_back(std::move(p));
}

inline void enumerate(TraceState& st, double reflection_gain) {
  emit_path(st, reflection_gain);
  if (static_cast<int>(st.sequence.size()) == st.max_order) return;

  const auto& surfaces = st.scene.surfaces();
  const Vec3 source = st.sequence.empty() ? st.tx : st.images.back();
  for (std::size_t k = 0; k < surfaces.size(); ++k) {
    if (!st.sequence.empty() && st.sequence.back() == static_cast<int>(k)) continue;
    const double gain = reflection_gain * surfaces[k].reflection;
    // no extension of this sequence can climb back above the floor
    if (!(gain >= kPathAmplitudeFloor) || gain == 0.0) continue;
    st.sequence.push_back(static_cast<int>(k));
    st.images.push_back(surfaces[k].mirror(source));
    enumerate(st, gain);
    st.images.pop_back();
    st.sequence.pop_back();
  }
}

} // namespace detail

/// All specular paths from tx to rx with at most `max_order` reflections,
/// sorted by delay. `center_hz` fixes the wavelength used in the free-space gain.
inline std::vector<PathComponent> trace_paths(const Scene& scene, const Vec3& tx, const Vec3& rx, int max_order,
                                              double center_hz) {
  if (!scene.strictly_inside(tx)) throw GeometryError("transmitter lies outside the building");
  if (!scene.strictly_inside(rx)) throw GeometryError("receiver lies outside the building");
  if (tx == rx) throw GeometryError("transmitter and receiver coincide");
  if (max_order < 0 || max_order > kMaxReflectionOrder)
    throw DomainError("max_order must lie in [0, " + std::to_string(kMaxReflectionOrder) + "]");
  if (!(center_hz > 0.0)) throw DomainError("center frequency must be positive");

  const double lambda0 = kSpeedOfLight / center_hz;
  const double los_amplitude = lambda0 / (4.0 * std::numbers::pi * distance(tx, rx));
  detail::TraceState st{scene, tx, rx, lambda0, kPathAmplitudeFloor * los_amplitude, max_order, {}, {}, {}};
  detail::enumerate(st, 1.0);

  std::stable_sort(st.out.begin(), st.out.end(),
                   [](const PathComponent& a, const PathComponent& b) { return a.delay < b.delay; });
  return std::move(st.out);
}

/// Sample sum_k a_k exp(-j 2 pi f_m tau_k) on every probe tone.
inline FrequencyResponse frequency_response(std::span<const PathComponent> paths, const ProbeConfig& probe) {
  if (paths.empty()) throw DomainError("frequency_response needs at least one path");
  std::vector<std::complex<double>> samples(static_cast<std::size_t>(probe.tones()));
  for (int m = 1; m <= probe.tones(); ++m) {
    const double f = probe.tone_frequency(m);
    std::complex<double> acc{0.0, 0.0};
    for (const auto& p : paths) {
      // reduce to a fractional cycle count before scaling by 2 pi
      const double cycles = f * p.delay;
      const double frac = cycles - std::floor(cycles);
      acc += std::polar(p.amplitude, -2.0 * std::numbers::pi * frac);
    }
    samples[static_cast<std::size_t>(m - 1)] = acc;
  }
  return {probe, std::move(samples)};
}

} // namespace phyauth
