#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string_view>
#include <vector>

#include "dtsynth/error.hpp"

namespace dtsynth {

// The six scene attributes, in the fixed sweep order used by twin fitting.
enum class Attr : int {
  Azimuth = 0,
  InPlaneRotation = 1,
  CameraDistance = 2,
  CameraHeight = 3,
  LightAzimuth = 4,
  LightIntensity = 5,
};

inline constexpr int kNumAttributes = 6;

inline constexpr std::array<std::string_view, kNumAttributes> kAttributeNames = {
    "azimuth", "in_plane_rotation", "camera_distance",
    "camera_height", "light_azimuth", "light_intensity"};

inline constexpr bool attribute_wraps(int k) { return k == 0 || k == 1 || k == 4; }

/// Closed range for clamped attributes; [lo, hi) period for wrapped ones.
inline constexpr double attribute_lo(int /*k*/) { return 0.0; }
inline constexpr double attribute_hi(int k) { return attribute_wraps(k) ? 360.0 : 100.0; }

inline double wrap_angle(double deg) {
  double r = std::fmod(deg, 360.0);
  if (r < 0.0) r += 360.0;
  return r;
}

/// Scene parameterization: angles in degrees, the rest in abstract [0,100] units.
/// Construction normalizes: angles wrap modulo 360, bounded fields clamp.
struct AttributeVector {
  std::array<double, kNumAttributes> v{};

  AttributeVector() = default;
  AttributeVector(double azimuth, double in_plane_rotation, double camera_distance,
                  double camera_height, double light_azimuth, double light_intensity) {
    v = {azimuth, in_plane_rotation, camera_distance, camera_height, light_azimuth,
         light_intensity};
    normalize();
  }
  static AttributeVector from_raw(const std::array<double, kNumAttributes>& raw) {
    AttributeVector psi;
    psi.v = raw;
    psi.normalize();
    return psi;
  }

  double operator[](int k) const { return v[k]; }

  double azimuth() const { return v[0]; }
  double in_plane_rotation() const { return v[1]; }
  double camera_distance() const { return v[2]; }
  double camera_height() const { return v[3]; }
  double light_azimuth() const { return v[4]; }
  double light_intensity() const { return v[5]; }

  AttributeVector with(int k, double value) const {
    AttributeVector psi = *this;
    psi.v[k] = value;
    psi.normalize();
    return psi;
  }

  void normalize() {
    for (int k = 0; k < kNumAttributes; ++k) {
      if (attribute_wraps(k)) {
        v[k] = wrap_angle(v[k]);
      } else {
        v[k] = std::clamp(v[k], attribute_lo(k), attribute_hi(k));
      }
    }
  }

  bool operator==(const AttributeVector&) const = default;
};

/// Per-attribute discrete grids for coordinate descent.
struct SearchSpace {
  std::array<std::vector<double>, kNumAttributes> grids;

  /// Angles {0,30,...,330}; bounded scalars {0,10,...,100}.
  static SearchSpace standard() {
    SearchSpace s;
    for (int k = 0; k < kNumAttributes; ++k) {
      if (attribute_wraps(k)) {
        for (int i = 0; i < 12; ++i) s.grids[k].push_back(30.0 * i);
      } else {
        for (int i = 0; i <= 10; ++i) s.grids[k].push_back(10.0 * i);
      }
    }
    return s;
  }

  void validate() const {
    for (int k = 0; k < kNumAttributes; ++k) {
      const auto& g = grids[k];
      if (g.empty()) throw ConfigError(std::string("empty grid for ") + std::string(kAttributeNames[k]));
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (i > 0 && g[i] <= g[i - 1])
          throw ConfigError(std::string("grid not strictly increasing for ") +
                            std::string(kAttributeNames[k]));
        const double hi = attribute_wraps(k) ? 360.0 : attribute_hi(k);
        if (g[i] < attribute_lo(k) || g[i] > hi || (attribute_wraps(k) && g[i] >= 360.0 && g[i] != 0.0))
          throw ConfigError(std::string("grid value out of range for ") +
                            std::string(kAttributeNames[k]));
      }
    }
  }

  bool on_grid(const AttributeVector& psi) const {
    for (int k = 0; k < kNumAttributes; ++k) {
      bool found = false;
      for (double z : grids[k]) {
        if (psi[k] == z) { found = true; break; }
      }
      if (!found) return false;
    }
    return true;
  }

  /// Grid midpoint per attribute (lower median for even-sized grids).
  AttributeVector midpoint() const {
    std::array<double, kNumAttributes> raw{};
    for (int k = 0; k < kNumAttributes; ++k) raw[k] = grids[k][(grids[k].size() - 1) / 2];
    return AttributeVector::from_raw(raw);
  }
};

}  // namespace dtsynth
