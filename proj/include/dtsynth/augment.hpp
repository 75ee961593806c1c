#pragma once

#include <cstdint>
#include <vector>

#include "dtsynth/attributes.hpp"
#include "dtsynth/error.hpp"
#include "dtsynth/rng.hpp"

namespace dtsynth {

struct AugmentConfig {
  double deviation_fraction = 0.15;  // 2*sigma band as a fraction of the range
  std::size_t count = 1;             // N
  std::uint64_t seed = 0;

  /// sigma_k = deviation_fraction * range_k / 2 (diagonal covariance).
  double sigma(int k) const {
    return deviation_fraction * (attribute_hi(k) - attribute_lo(k)) / 2.0;
  }

  void validate() const {
    if (deviation_fraction <= 0.0 || deviation_fraction > 1.0)
      throw ConfigError("deviation_fraction must be in (0,1]");
    if (count < 1) throw ConfigError("augment count must be >= 1");
  }
};

struct AugmentedSample {
  AttributeVector psi;
  std::size_t source_twin = 0;
  std::size_t draw_index = 0;
};

/// Wrap angles, clamp bounded attributes.
inline AttributeVector normalize_psi(const std::array<double, kNumAttributes>& raw) {
  return AttributeVector::from_raw(raw);
}

/// Gaussian perturbation around a uniformly chosen twin. Sample j's randomness
/// depends only on (seed, j): results are identical under any generation order.
inline AugmentedSample draw_augmented(const std::vector<AttributeVector>& twins,
                                      const AugmentConfig& cfg, std::size_t j) {
  CounterRng rng(cfg.seed, j);
  AugmentedSample out;
  out.draw_index = j;
  out.source_twin = static_cast<std::size_t>(rng.next_below(twins.size()));
  std::array<double, kNumAttributes> raw{};
  for (int k = 0; k < kNumAttributes; ++k)
    raw[k] = twins[out.source_twin][k] + cfg.sigma(k) * rng.next_normal();
  out.psi = normalize_psi(raw);
  return out;
}

inline std::vector<AugmentedSample> sample_augmented(const std::vector<AttributeVector>& twins,
                                                     const AugmentConfig& cfg) {
  if (twins.empty()) throw DataError("sample_augmented: empty twin list");
  cfg.validate();
  std::vector<AugmentedSample> out;
  out.reserve(cfg.count);
  for (std::size_t j = 0; j < cfg.count; ++j) out.push_back(draw_augmented(twins, cfg, j));
  return out;
}

}  // namespace dtsynth
