#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "dtsynth/error.hpp"
#include "dtsynth/metrics.hpp"

namespace dtsynth {

enum class SeedRule { NearestToMean, ExplicitIndex };

struct CoresetSelection {
  std::vector<std::size_t> selected_indices;  // in selection order
  double cover_radius = 0.0;                  // max over points of distance to nearest selected
};

/// Max over all features of the distance to the nearest selected feature.
inline double cover_radius(const std::vector<FeatureVector>& features,
                           const std::vector<std::size_t>& selected) {
  if (selected.empty()) throw DataError("cover_radius: empty selection");
  for (std::size_t s : selected)
    if (s >= features.size()) throw DataError("cover_radius: index out of range");
  double radius = 0.0;
  for (const FeatureVector& f : features) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t s : selected) best = std::min(best, feature_l2(f, features[s]));
    radius = std::max(radius, best);
  }
  return radius;
}

/// Farthest-point sampling: greedy 2-approximation for the K-center problem.
/// Each pick is the point with the largest distance to the selected set;
/// ties break to the lowest index.
inline CoresetSelection select_coreset(const std::vector<FeatureVector>& features, std::size_t count,
                                       SeedRule seed_rule, std::size_t explicit_seed = 0) {
  if (features.empty()) throw DataError("select_coreset: empty feature list");
  if (count < 1 || count > features.size()) throw DataError("select_coreset: O out of range");
  const std::size_t dim = features[0].values.size();
  for (const auto& f : features)
    if (f.values.size() != dim) throw DataError("select_coreset: feature dimension mismatch");

  std::size_t first;
  if (seed_rule == SeedRule::ExplicitIndex) {
    if (explicit_seed >= features.size()) throw DataError("select_coreset: seed index out of range");
    first = explicit_seed;
  } else {
    FeatureVector mean;
    mean.values.assign(dim, 0.0);
    for (const auto& f : features)
      for (std::size_t i = 0; i < dim; ++i) mean.values[i] += f.values[i];
    for (double& v : mean.values) v /= static_cast<double>(features.size());
    first = 0;
    double best = feature_l2(features[0], mean);
    for (std::size_t i = 1; i < features.size(); ++i) {
      const double d = feature_l2(features[i], mean);
      if (d < best) { best = d; first = i; }
    }
  }

  CoresetSelection sel;
  sel.selected_indices.push_back(first);
  std::vector<bool> taken(features.size(), false);
  taken[first] = true;
  // min distance to the selected set, updated per pick
  std::vector<double> nearest(features.size());
  for (std::size_t i = 0; i < features.size(); ++i)
    nearest[i] = feature_l2(features[i], features[first]);

  while (sel.selected_indices.size() < count) {
    std::size_t pick = features.size();
    double best = -1.0;
    for (std::size_t i = 0; i < features.size(); ++i) {
      if (!taken[i] && nearest[i] > best) { best = nearest[i]; pick = i; }
    }
    taken[pick] = true;
    sel.selected_indices.push_back(pick);
    for (std::size_t i = 0; i < features.size(); ++i)
      nearest[i] = std::min(nearest[i], feature_l2(features[i], features[pick]));
  }

  sel.cover_radius = 0.0;
  for (double d : nearest) sel.cover_radius = std::max(sel.cover_radius, d);
  return sel;
}

}  // namespace dtsynth
