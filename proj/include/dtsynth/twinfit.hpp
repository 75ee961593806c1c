#pragma once

#include <string>
#include <vector>

#include "dtsynth/attributes.hpp"
#include "dtsynth/error.hpp"
#include "dtsynth/metrics.hpp"
#include "dtsynth/render.hpp"

namespace dtsynth {

enum class LossKind { Perceptual, SsimAsLoss, Style };

inline LossKind loss_from_name(const std::string& name) {
  if (name == "perceptual") return LossKind::Perceptual;
  if (name == "ssim") return LossKind::SsimAsLoss;
  if (name == "style") return LossKind::Style;
  throw ConfigError("unknown loss: " + name);
}

inline std::string loss_name(LossKind kind) {
  switch (kind) {
    case LossKind::Perceptual: return "perceptual";
    case LossKind::SsimAsLoss: return "ssim";
    case LossKind::Style: return "style";
  }
  throw InternalError("bad loss kind");
}

inline double image_loss(LossKind kind, const RasterImage& target, const RasterImage& rendered) {
  switch (kind) {
    case LossKind::Perceptual: return perceptual_distance(target, rendered);
    case LossKind::SsimAsLoss: return 1.0 - ssim(target, rendered);
    case LossKind::Style: return style_distance(target, rendered);
  }
  throw InternalError("bad loss kind");
}

struct FitStep {
  int epoch = 0;          // 1-based
  int attribute = 0;      // index into the sweep order
  double chosen_value = 0.0;
  double loss = 0.0;      // loss after this iteration
};

struct FitResult {
  AttributeVector psi_star;
  double final_loss = 0.0;
  std::vector<FitStep> trace;
  int epochs_run = 0;
};

/// Exhaustive scan of one attribute's grid with all others frozen. The scan
/// always includes the incumbent value, so the best loss never exceeds the
/// current loss. Ties go to the smallest scanned value.
inline std::pair<double, double> coordinate_step(const RasterImage& target, const Mesh& mesh,
                                                 const AttributeVector& psi, int k,
                                                 const std::vector<double>& grid,
                                                 const RenderConfig& cfg, LossKind loss) {
  if (grid.empty()) throw DataError("coordinate_step: empty grid");
  double best_value = 0.0;
  double best_loss = std::numeric_limits<double>::infinity();
  bool incumbent_seen = false;
  auto eval = [&](double z) {
    const auto [img, mask] = render(mesh, psi.with(k, z), cfg);
    const double l = image_loss(loss, target, img);
    if (l < best_loss) { best_loss = l; best_value = z; }
  };
  for (double z : grid) {
    eval(z);
    if (z == psi[k]) incumbent_seen = true;
  }
  if (!incumbent_seen) eval(psi[k]);
  return {best_value, best_loss};
}

/// Per-image coordinate descent over the attribute grids: for each epoch,
/// sweep the attributes in fixed order, setting each to the grid value that
/// minimizes the image loss against the target. Stops early when a full epoch
/// changes nothing.
inline FitResult fit_twin(const RasterImage& target, const Mesh& mesh, const SearchSpace& space,
                          const RenderConfig& cfg, LossKind loss, int max_epochs,
                          const AttributeVector& init) {
  if (target.width != cfg.image_width || target.height != cfg.image_height)
    throw DataError("fit_twin: target size does not match render config");
  if (max_epochs < 1) throw ConfigError("fit_twin: max_epochs must be >= 1");
  space.validate();
  if (!space.on_grid(init)) throw DataError("fit_twin: init is off-grid");

  FitResult result;
  AttributeVector psi = init;
  for (int epoch = 1; epoch <= max_epochs; ++epoch) {
    bool changed = false;
    for (int k = 0; k < kNumAttributes; ++k) {
      const auto [value, step_loss] = coordinate_step(target, mesh, psi, k, space.grids[k], cfg, loss);
      if (value != psi[k]) changed = true;
      psi = psi.with(k, value);
      result.trace.push_back({epoch, k, value, step_loss});
    }
    result.epochs_run = epoch;
    if (!changed) break;
  }
  result.psi_star = psi;
  result.final_loss = result.trace.back().loss;
  return result;
}

}  // namespace dtsynth
