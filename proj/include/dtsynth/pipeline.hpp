#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dtsynth/attributes.hpp"
#include "dtsynth/augment.hpp"
#include "dtsynth/coreset.hpp"
#include "dtsynth/error.hpp"
#include "dtsynth/image.hpp"
#include "dtsynth/image_png.hpp"
#include "dtsynth/metrics.hpp"
#include "dtsynth/parallel.hpp"
#include "dtsynth/procedural.hpp"
#include "dtsynth/records.hpp"
#include "dtsynth/render.hpp"
#include "dtsynth/twinfit.hpp"

namespace dtsynth {

struct AssetSpec {
  std::string id;
  std::string mesh_path;  // filesystem path or "builtin:<name>"
};

struct PipelineConfig {
  std::filesystem::path targets_dir;
  std::vector<AssetSpec> assets;
  RenderConfig render;
  SearchSpace search = SearchSpace::standard();
  std::size_t coreset_per_class = 8;
  AugmentConfig augment;  // augment.count is N
  LossKind loss = LossKind::Perceptual;
  int max_epochs = 2;
  std::filesystem::path output_dir;
  std::uint64_t seed = 0;
  unsigned workers = 0;  // 0 = hardware concurrency

  void validate() const {
    if (assets.empty()) throw ConfigError("no assets configured");
    if (coreset_per_class < 1) throw ConfigError("coreset_per_class must be >= 1");
    if (augment.count < coreset_per_class) throw ConfigError("N must be >= O");
    render.validate();
    search.validate();
    augment.validate();
  }
};

// --- config file (JSON, schema_version 1) ---

inline PipelineConfig parse_pipeline_config(const Json& j) {
  PipelineConfig cfg;
  if (!j.contains("schema_version") || j.at("schema_version").get<int>() != 1)
    throw ConfigError("config: missing or unsupported schema_version (expected 1)");
  if (j.contains("targets_dir")) cfg.targets_dir = j.at("targets_dir").get<std::string>();
  if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();
  if (j.contains("assets"))
    for (const Json& a : j.at("assets"))
      cfg.assets.push_back({a.at("id").get<std::string>(), a.at("mesh").get<std::string>()});
  if (j.contains("render")) {
    const Json& r = j.at("render");
    auto map_of = [](const Json& v) { return LinearMap{v.at(0).get<double>(), v.at(1).get<double>()}; };
    if (r.contains("image_width")) cfg.render.image_width = r.at("image_width").get<int>();
    if (r.contains("image_height")) cfg.render.image_height = r.at("image_height").get<int>();
    if (r.contains("distance_map")) cfg.render.distance_map = map_of(r.at("distance_map"));
    if (r.contains("height_map")) cfg.render.height_map = map_of(r.at("height_map"));
    if (r.contains("intensity_map")) cfg.render.intensity_map = map_of(r.at("intensity_map"));
    if (r.contains("ambient")) cfg.render.ambient = r.at("ambient").get<double>();
    if (r.contains("background_color")) {
      const Json& c = r.at("background_color");
      cfg.render.background_color = {c.at(0).get<double>(), c.at(1).get<double>(), c.at(2).get<double>()};
    }
    if (r.contains("field_of_view")) cfg.render.field_of_view = r.at("field_of_view").get<double>();
  }
  if (j.contains("search"))
    for (int k = 0; k < kNumAttributes; ++k) {
      const std::string name(kAttributeNames[k]);
      if (j.at("search").contains(name))
        cfg.search.grids[k] = j.at("search").at(name).get<std::vector<double>>();
    }
  if (j.contains("coreset_per_class")) cfg.coreset_per_class = j.at("coreset_per_class").get<std::size_t>();
  if (j.contains("augment")) {
    const Json& a = j.at("augment");
    if (a.contains("deviation_fraction")) cfg.augment.deviation_fraction = a.at("deviation_fraction").get<double>();
    if (a.contains("count")) cfg.augment.count = a.at("count").get<std::size_t>();
  }
  if (j.contains("loss")) cfg.loss = loss_from_name(j.at("loss").get<std::string>());
  if (j.contains("max_epochs")) cfg.max_epochs = j.at("max_epochs").get<int>();
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("workers")) cfg.workers = j.at("workers").get<unsigned>();
  return cfg;
}

inline PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config file not found: " + path.string());
  Json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config parse error in " + path.string() + ": " + e.what());
  }
  return parse_pipeline_config(j);
}

// --- manifest ---

struct ManifestRecord {
  std::string image_path;  // relative to output_dir
  std::string asset_id;
  BoundingBox bbox;
  AttributeVector psi;
  std::string origin;  // twin | augmented | random-baseline | dist-baseline
  std::optional<std::size_t> source_twin;
};

inline Json manifest_record_to_json(const ManifestRecord& r) {
  Json j;
  j["image_path"] = r.image_path;
  j["asset_id"] = r.asset_id;
  if (r.bbox.empty) j["bbox"] = nullptr;
  else j["bbox"] = {r.bbox.min_x, r.bbox.min_y, r.bbox.max_x, r.bbox.max_y};
  j["psi"] = std::vector<double>(r.psi.v.begin(), r.psi.v.end());
  j["origin"] = r.origin;
  if (r.source_twin) j["source_twin"] = *r.source_twin;
  else j["source_twin"] = nullptr;
  return j;
}

inline ManifestRecord manifest_record_from_json(const Json& j) {
  ManifestRecord r;
  r.image_path = j.at("image_path").get<std::string>();
  r.asset_id = j.at("asset_id").get<std::string>();
  if (!j.at("bbox").is_null()) {
    const Json& b = j.at("bbox");
    r.bbox = {b.at(0).get<int>(), b.at(1).get<int>(), b.at(2).get<int>(), b.at(3).get<int>(), false};
  }
  std::array<double, kNumAttributes> raw{};
  for (int k = 0; k < kNumAttributes; ++k) raw[k] = j.at("psi").at(k).get<double>();
  r.psi = AttributeVector::from_raw(raw);
  r.origin = j.at("origin").get<std::string>();
  if (!j.at("source_twin").is_null()) r.source_twin = j.at("source_twin").get<std::size_t>();
  return r;
}

struct DatasetManifest {
  std::vector<ManifestRecord> records;
};

inline void save_manifest(const DatasetManifest& m, const std::filesystem::path& path) {
  std::vector<Json> rows;
  rows.reserve(m.records.size());
  for (const auto& r : m.records) rows.push_back(manifest_record_to_json(r));
  write_records(path, rows);
}

inline DatasetManifest load_manifest(const std::filesystem::path& path) {
  DatasetManifest m;
  for (const Json& j : read_records(path)) m.records.push_back(manifest_record_from_json(j));
  return m;
}

// --- target listing and pseudo labeling ---

inline std::vector<std::filesystem::path> list_target_images(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw DataError("targets_dir not found: " + dir.string());
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const auto ext = e.path().extension();
    if (ext == ".png" || ext == ".ppm") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  if (out.empty()) throw DataError("no target images in " + dir.string());
  return out;
}

/// Nearest canonical-view features: each asset is rendered once at the grid
/// midpoint and the target goes to the closest one. Ties break to the lowest
/// asset id.
inline std::size_t assign_asset(const FeatureVector& target_features,
                                const std::vector<FeatureVector>& canonical_features,
                                const std::vector<AssetSpec>& assets) {
  if (assets.empty()) throw DataError("assign_asset: empty asset list");
  std::size_t best = 0;
  double best_d = feature_l2(target_features, canonical_features[0]);
  for (std::size_t i = 1; i < assets.size(); ++i) {
    const double d = feature_l2(target_features, canonical_features[i]);
    if (d < best_d || (d == best_d && assets[i].id < assets[best].id)) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

namespace detail {

inline std::uint64_t class_seed(std::uint64_t seed, std::size_t class_index, std::uint64_t salt) {
  return CounterRng(seed, salt * 0x10001ULL + class_index).next_u64();
}

/// Largest-remainder allocation of `total` across `weights`; ties to lowest index.
inline std::vector<std::size_t> proportional_allocation(const std::vector<std::size_t>& weights,
                                                        std::size_t total) {
  std::size_t wsum = 0;
  for (std::size_t w : weights) wsum += w;
  std::vector<std::size_t> alloc(weights.size(), 0);
  if (wsum == 0) return alloc;
  std::vector<std::pair<double, std::size_t>> remainders;  // (-frac, index)
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double exact = static_cast<double>(total) * weights[i] / static_cast<double>(wsum);
    alloc[i] = static_cast<std::size_t>(std::floor(exact));
    assigned += alloc[i];
    remainders.push_back({-(exact - std::floor(exact)), i});
  }
  std::sort(remainders.begin(), remainders.end());
  for (std::size_t r = 0; assigned < total; ++r, ++assigned) alloc[remainders[r % remainders.size()].second] += 1;
  return alloc;
}

inline std::string image_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "images/%06zu.png", index);
  return buf;
}

}  // namespace detail

struct ClassGroup {
  std::size_t asset_index = 0;
  std::vector<std::size_t> target_indices;       // into the sorted target list
  std::vector<std::size_t> coreset;              // into target_indices
  double cover_radius = 0.0;
  std::vector<AttributeVector> twins;            // one per coreset member
  std::vector<double> twin_losses;
};

struct RunReport {
  std::vector<std::string> warnings;
  std::vector<ClassGroup> groups;
};

/// Shared preamble of build and both baselines: load meshes, read targets,
/// extract features, pseudo-label each target.
struct PipelineInputs {
  std::vector<Mesh> meshes;
  std::vector<std::filesystem::path> target_paths;
  std::vector<FeatureVector> target_features;
  std::vector<std::size_t> target_class;  // asset index per target
  std::vector<std::vector<std::size_t>> class_targets;
};

inline PipelineInputs prepare_inputs(const PipelineConfig& cfg) {
  cfg.validate();
  PipelineInputs in;
  for (const AssetSpec& a : cfg.assets) in.meshes.push_back(resolve_mesh(a.mesh_path));

  in.target_paths = list_target_images(cfg.targets_dir);
  in.target_features.resize(in.target_paths.size());
  parallel_for(in.target_paths.size(), cfg.workers, [&](std::size_t i) {
    in.target_features[i] = extract_features(load_image(in.target_paths[i]));
  });

  const AttributeVector canonical = cfg.search.midpoint();
  std::vector<FeatureVector> canonical_features(in.meshes.size());
  parallel_for(in.meshes.size(), cfg.workers, [&](std::size_t i) {
    canonical_features[i] = extract_features(render(in.meshes[i], canonical, cfg.render).first);
  });

  in.target_class.resize(in.target_paths.size());
  in.class_targets.assign(in.meshes.size(), {});
  for (std::size_t i = 0; i < in.target_paths.size(); ++i)
    in.target_class[i] = assign_asset(in.target_features[i], canonical_features, cfg.assets);
  for (std::size_t i = 0; i < in.target_paths.size(); ++i)
    in.class_targets[in.target_class[i]].push_back(i);
  return in;
}

namespace detail {

/// Render every (asset, psi) row, write PNGs and bboxes, return the manifest.
inline DatasetManifest render_and_emit(const PipelineConfig& cfg, const std::vector<Mesh>& meshes,
                                       std::vector<ManifestRecord>& rows,
                                       const std::vector<std::size_t>& row_asset) {
  std::filesystem::create_directories(cfg.output_dir / "images");
  parallel_for(rows.size(), cfg.workers, [&](std::size_t i) {
    const auto [img, mask] = render(meshes[row_asset[i]], rows[i].psi, cfg.render);
    rows[i].bbox = bbox_from_mask(mask);
    rows[i].image_path = image_name(i);
    const std::filesystem::path out = cfg.output_dir / rows[i].image_path;
    const std::filesystem::path tmp = out.string() + ".tmp";
    save_png(img, tmp);
    std::filesystem::rename(tmp, out);
  });
  DatasetManifest m;
  m.records = std::move(rows);
  return m;
}

inline void write_run_report(const PipelineConfig& cfg, const RunReport& report,
                             const std::string& kind) {
  std::string text = "schema_version: 1\nkind: " + kind + "\n";
  for (const auto& g : report.groups) {
    const std::string id = cfg.assets[g.asset_index].id;
    text += "class[" + id + "].targets: " + std::to_string(g.target_indices.size()) + "\n";
    if (!g.coreset.empty()) {
      text += "class[" + id + "].coreset:";
      for (std::size_t s : g.coreset) text += " " + std::to_string(g.target_indices[s]);
      text += "\nclass[" + id + "].cover_radius: " + std::to_string(g.cover_radius) + "\n";
    }
    for (std::size_t t = 0; t < g.twin_losses.size(); ++t)
      text += "class[" + id + "].twin_loss[" + std::to_string(t) +
              "]: " + std::to_string(g.twin_losses[t]) + "\n";
  }
  for (const auto& w : report.warnings) text += "warning: " + w + "\n";
  write_text_atomic(cfg.output_dir / "run_report.txt", text);
}

}  // namespace detail

/// Full pipeline: pseudo-label targets, FPS coreset per class, per-image twin
/// fits, attribute-guided augmentation, render everything and write the
/// manifest. Deterministic for a fixed config, independent of worker count.
inline DatasetManifest build_dataset(const PipelineConfig& cfg, RunReport* report_out = nullptr) {
  PipelineInputs in = prepare_inputs(cfg);
  RunReport report;
  std::filesystem::create_directories(cfg.output_dir / "intermediate");

  // persist features and assignments
  {
    std::vector<Json> rows;
    for (std::size_t i = 0; i < in.target_paths.size(); ++i) {
      Json j;
      j["target"] = in.target_paths[i].filename().string();
      j["asset_id"] = cfg.assets[in.target_class[i]].id;
      j["features"] = in.target_features[i].values;
      rows.push_back(std::move(j));
    }
    write_records(cfg.output_dir / "intermediate" / "features.jsonl", rows);
  }

  // coreset + twin fit per class
  for (std::size_t c = 0; c < cfg.assets.size(); ++c) {
    ClassGroup g;
    g.asset_index = c;
    g.target_indices = in.class_targets[c];
    if (g.target_indices.empty()) {
      report.warnings.push_back("class " + cfg.assets[c].id + " has no targets; skipped");
      report.groups.push_back(std::move(g));
      continue;
    }
    std::size_t want = cfg.coreset_per_class;
    if (g.target_indices.size() < want) {
      report.warnings.push_back("class " + cfg.assets[c].id + " has " +
                                std::to_string(g.target_indices.size()) + " targets < O=" +
                                std::to_string(want) + "; using all");
      want = g.target_indices.size();
    }
    std::vector<FeatureVector> class_features;
    for (std::size_t t : g.target_indices) class_features.push_back(in.target_features[t]);
    CoresetSelection sel = select_coreset(class_features, want, SeedRule::NearestToMean);
    g.coreset = sel.selected_indices;
    g.cover_radius = sel.cover_radius;

    g.twins.resize(g.coreset.size());
    g.twin_losses.resize(g.coreset.size());
    std::vector<FitResult> fits(g.coreset.size());
    parallel_for(g.coreset.size(), cfg.workers, [&](std::size_t i) {
      const RasterImage target = load_image(in.target_paths[g.target_indices[g.coreset[i]]]);
      fits[i] = fit_twin(target, in.meshes[c], cfg.search, cfg.render, cfg.loss, cfg.max_epochs,
                         cfg.search.midpoint());
    });
    std::vector<Json> trace_rows;
    for (std::size_t i = 0; i < fits.size(); ++i) {
      g.twins[i] = fits[i].psi_star;
      g.twin_losses[i] = fits[i].final_loss;
      for (const FitStep& s : fits[i].trace) {
        Json j;
        j["class"] = cfg.assets[c].id;
        j["fit"] = i;
        j["epoch"] = s.epoch;
        j["attribute"] = kAttributeNames[s.attribute];
        j["value"] = s.chosen_value;
        j["loss"] = s.loss;
        trace_rows.push_back(std::move(j));
      }
    }
    write_records(cfg.output_dir / "intermediate" / ("fit_trace_" + cfg.assets[c].id + ".jsonl"),
                  trace_rows);
    report.groups.push_back(std::move(g));
  }

  // coreset summary
  {
    std::vector<Json> rows;
    for (const auto& g : report.groups) {
      Json j;
      j["asset_id"] = cfg.assets[g.asset_index].id;
      std::vector<std::size_t> global;
      for (std::size_t s : g.coreset) global.push_back(g.target_indices[s]);
      j["coreset_targets"] = global;
      j["cover_radius"] = g.cover_radius;
      rows.push_back(std::move(j));
    }
    write_records(cfg.output_dir / "intermediate" / "coreset.jsonl", rows);
  }

  // twins first, then augmented samples allocated across classes by target mass
  std::vector<ManifestRecord> rows;
  std::vector<std::size_t> row_asset;
  for (const auto& g : report.groups) {
    for (std::size_t i = 0; i < g.twins.size(); ++i) {
      rows.push_back({"", cfg.assets[g.asset_index].id, {}, g.twins[i], "twin", i});
      row_asset.push_back(g.asset_index);
    }
  }
  std::vector<std::size_t> weights;
  for (const auto& g : report.groups) weights.push_back(g.twins.empty() ? 0 : g.target_indices.size());
  const std::vector<std::size_t> alloc = detail::proportional_allocation(weights, cfg.augment.count);

  std::vector<Json> sample_rows;
  for (std::size_t c = 0; c < report.groups.size(); ++c) {
    const auto& g = report.groups[c];
    if (g.twins.empty() || alloc[c] == 0) continue;
    AugmentConfig acfg = cfg.augment;
    acfg.count = alloc[c];
    acfg.seed = detail::class_seed(cfg.seed, c, 1);
    for (const AugmentedSample& s : sample_augmented(g.twins, acfg)) {
      rows.push_back({"", cfg.assets[g.asset_index].id, {}, s.psi, "augmented", s.source_twin});
      row_asset.push_back(g.asset_index);
      Json j;
      j["asset_id"] = cfg.assets[g.asset_index].id;
      j["source_twin"] = s.source_twin;
      j["draw_index"] = s.draw_index;
      j["psi"] = std::vector<double>(s.psi.v.begin(), s.psi.v.end());
      sample_rows.push_back(std::move(j));
    }
  }
  write_records(cfg.output_dir / "intermediate" / "samples.jsonl", sample_rows);

  DatasetManifest manifest = detail::render_and_emit(cfg, in.meshes, rows, row_asset);
  save_manifest(manifest, cfg.output_dir / "manifest.jsonl");
  detail::write_run_report(cfg, report, "build");
  if (report_out) *report_out = report;
  return manifest;
}

/// One random-baseline draw: each attribute uniform over its continuous range.
inline AttributeVector random_attribute_vector(std::uint64_t seed, std::size_t j) {
  CounterRng rng(seed, j);
  std::array<double, kNumAttributes> raw{};
  for (int k = 0; k < kNumAttributes; ++k) {
    const double lo = attribute_lo(k), hi = attribute_hi(k);
    raw[k] = lo + (hi - lo) * rng.next_double();
  }
  return AttributeVector::from_raw(raw);
}

/// Baseline: every attribute drawn independently and uniformly from its
/// continuous range, class allocation matching the pseudo-labeled target mass.
inline DatasetManifest random_baseline(const PipelineConfig& cfg) {
  if (cfg.augment.count < 1) throw ConfigError("random_baseline: N must be >= 1");
  PipelineInputs in = prepare_inputs(cfg);
  std::filesystem::create_directories(cfg.output_dir);

  std::vector<std::size_t> weights;
  for (const auto& ct : in.class_targets) weights.push_back(ct.size());
  const std::vector<std::size_t> alloc = detail::proportional_allocation(weights, cfg.augment.count);

  std::vector<ManifestRecord> rows;
  std::vector<std::size_t> row_asset;
  RunReport report;
  for (std::size_t c = 0; c < cfg.assets.size(); ++c) {
    ClassGroup g;
    g.asset_index = c;
    g.target_indices = in.class_targets[c];
    report.groups.push_back(std::move(g));
    const std::uint64_t seed = detail::class_seed(cfg.seed, c, 2);
    for (std::size_t j = 0; j < alloc[c]; ++j) {
      rows.push_back({"", cfg.assets[c].id, {}, random_attribute_vector(seed, j), "random-baseline",
                      std::nullopt});
      row_asset.push_back(c);
    }
  }
  DatasetManifest manifest = detail::render_and_emit(cfg, in.meshes, rows, row_asset);
  save_manifest(manifest, cfg.output_dir / "manifest.jsonl");
  detail::write_run_report(cfg, report, "random-baseline");
  return manifest;
}

/// Distribution-level baseline: one shared attribute vector per class, found
/// by coordinate descent on the Fréchet feature distance between jittered
/// renderings around the candidate and the class's target features; the set is
/// then sampled from a single Gaussian around that optimum.
struct DistFitResult {
  AttributeVector psi_star;
  std::vector<double> objective_trace;  // after each iteration
};

inline DistFitResult fit_distribution(const Mesh& mesh, const std::vector<FeatureVector>& targets,
                                      const PipelineConfig& cfg, std::uint64_t jitter_seed) {
  constexpr int kJitterDraws = 8;
  constexpr double kJitterFraction = 0.02;
  // common random numbers: one fixed jitter table reused for every candidate
  std::vector<std::array<double, kNumAttributes>> jitter(kJitterDraws);
  for (int j = 0; j < kJitterDraws; ++j) {
    CounterRng rng(jitter_seed, j);
    for (int k = 0; k < kNumAttributes; ++k)
      jitter[j][k] = kJitterFraction * (attribute_hi(k) - attribute_lo(k)) * rng.next_normal();
  }
  auto objective = [&](const AttributeVector& candidate) {
    std::vector<FeatureVector> feats(kJitterDraws);
    for (int j = 0; j < kJitterDraws; ++j) {
      std::array<double, kNumAttributes> raw{};
      for (int k = 0; k < kNumAttributes; ++k) raw[k] = candidate[k] + jitter[j][k];
      feats[j] = extract_features(render(mesh, AttributeVector::from_raw(raw), cfg.render).first);
    }
    return frechet_distance(feats, targets);
  };

  DistFitResult result;
  AttributeVector psi = cfg.search.midpoint();
  double current = objective(psi);
  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    bool changed = false;
    for (int k = 0; k < kNumAttributes; ++k) {
      double best_value = psi[k];
      double best = std::numeric_limits<double>::infinity();
      for (double z : cfg.search.grids[k]) {
        // the incumbent re-evaluates to the current objective; reuse it
        const double obj = (z == psi[k]) ? current : objective(psi.with(k, z));
        if (obj < best) { best = obj; best_value = z; }
      }
      if (best_value != psi[k]) changed = true;
      psi = psi.with(k, best_value);
      current = best;
      result.objective_trace.push_back(current);
    }
    if (!changed) break;
  }
  result.psi_star = psi;
  return result;
}

inline DatasetManifest dist_baseline(const PipelineConfig& cfg, RunReport* report_out = nullptr) {
  PipelineInputs in = prepare_inputs(cfg);
  std::filesystem::create_directories(cfg.output_dir / "intermediate");

  std::vector<std::size_t> weights;
  for (const auto& ct : in.class_targets) weights.push_back(ct.size());
  const std::vector<std::size_t> alloc = detail::proportional_allocation(weights, cfg.augment.count);

  RunReport report;
  std::vector<ManifestRecord> rows;
  std::vector<std::size_t> row_asset;
  std::vector<Json> trace_rows;
  for (std::size_t c = 0; c < cfg.assets.size(); ++c) {
    ClassGroup g;
    g.asset_index = c;
    g.target_indices = in.class_targets[c];
    if (g.target_indices.size() < 2) {
      if (!g.target_indices.empty())
        report.warnings.push_back("class " + cfg.assets[c].id +
                                  " has fewer than 2 targets; skipped by dist baseline");
      report.groups.push_back(std::move(g));
      continue;
    }
    std::vector<FeatureVector> class_features;
    for (std::size_t t : g.target_indices) class_features.push_back(in.target_features[t]);
    const DistFitResult fit =
        fit_distribution(in.meshes[c], class_features, cfg, detail::class_seed(cfg.seed, c, 3));
    g.twins = {fit.psi_star};
    report.groups.push_back(std::move(g));
    for (std::size_t t = 0; t < fit.objective_trace.size(); ++t) {
      Json j;
      j["class"] = cfg.assets[c].id;
      j["iteration"] = t;
      j["objective"] = fit.objective_trace[t];
      trace_rows.push_back(std::move(j));
    }

    AugmentConfig acfg = cfg.augment;
    acfg.count = alloc[c];
    acfg.seed = detail::class_seed(cfg.seed, c, 4);
    if (acfg.count == 0) continue;
    for (const AugmentedSample& s : sample_augmented({fit.psi_star}, acfg)) {
      rows.push_back({"", cfg.assets[c].id, {}, s.psi, "dist-baseline", std::nullopt});
      row_asset.push_back(c);
    }
  }
  write_records(cfg.output_dir / "intermediate" / "dist_trace.jsonl", trace_rows);
  DatasetManifest manifest = detail::render_and_emit(cfg, in.meshes, rows, row_asset);
  save_manifest(manifest, cfg.output_dir / "manifest.jsonl");
  detail::write_run_report(cfg, report, "dist-baseline");
  if (report_out) *report_out = report;
  return manifest;
}

// --- evaluation ---

struct EvalReport {
  double ffd = 0.0;
  std::map<std::string, double> per_class_ffd;
  std::size_t count_generated = 0;
  std::size_t count_targets = 0;
  std::vector<std::string> warnings;
};

/// Fréchet feature distance between the generated set and the target set,
/// overall and per class (targets grouped by pseudo labeling).
inline EvalReport evaluate(const DatasetManifest& manifest, const std::filesystem::path& base_dir,
                           const PipelineConfig& cfg) {
  if (manifest.records.size() < 2) throw DataError("evaluate: need at least 2 generated images");
  PipelineInputs in = prepare_inputs(cfg);

  std::vector<FeatureVector> gen_features(manifest.records.size());
  parallel_for(manifest.records.size(), cfg.workers, [&](std::size_t i) {
    gen_features[i] = extract_features(load_image(base_dir / manifest.records[i].image_path));
  });

  EvalReport report;
  report.count_generated = gen_features.size();
  report.count_targets = in.target_features.size();
  report.ffd = frechet_distance(gen_features, in.target_features);

  for (std::size_t c = 0; c < cfg.assets.size(); ++c) {
    std::vector<FeatureVector> gen_c, tgt_c;
    for (std::size_t i = 0; i < manifest.records.size(); ++i)
      if (manifest.records[i].asset_id == cfg.assets[c].id) gen_c.push_back(gen_features[i]);
    for (std::size_t t : in.class_targets[c]) tgt_c.push_back(in.target_features[t]);
    if (gen_c.size() < 2 || tgt_c.size() < 2) {
      report.warnings.push_back("class " + cfg.assets[c].id +
                                " has fewer than 2 images on one side; per-class FFD skipped");
      continue;
    }
    report.per_class_ffd[cfg.assets[c].id] = frechet_distance(gen_c, tgt_c);
  }
  return report;
}

inline std::string eval_report_text(const EvalReport& r) {
  std::string text = "schema_version: 1\n";
  text += "ffd_overall: " + std::to_string(r.ffd) + "\n";
  for (const auto& [id, v] : r.per_class_ffd) text += "ffd_class[" + id + "]: " + std::to_string(v) + "\n";
  text += "count_generated: " + std::to_string(r.count_generated) + "\n";
  text += "count_targets: " + std::to_string(r.count_targets) + "\n";
  for (const auto& w : r.warnings) text += "warning: " + w + "\n";
  return text;
}

// --- synthetic target scenario ---

/// Builds the biased synthetic target scenario that plays the role of the
/// real target domain: per class, attributes are drawn from hidden
/// distributions (azimuth unimodal or bimodal) and rendered to targets_dir.
inline void synth_targets(const PipelineConfig& cfg, std::size_t count, bool bimodal) {
  cfg.render.validate();
  if (cfg.assets.empty()) throw ConfigError("synth-targets: no assets configured");
  if (count < 1) throw ConfigError("synth-targets: count must be >= 1");
  std::vector<Mesh> meshes;
  for (const AssetSpec& a : cfg.assets) meshes.push_back(resolve_mesh(a.mesh_path));
  std::filesystem::create_directories(cfg.targets_dir);

  std::vector<Json> truth_rows(count);
  parallel_for(count, cfg.workers, [&](std::size_t i) {
    CounterRng rng(cfg.seed, 0x7a36ULL * 0x10001ULL + i);
    const std::size_t c = i % meshes.size();
    std::array<double, kNumAttributes> raw{};
    double azimuth_mode = 30.0;
    if (bimodal && rng.next_double() < 0.5) azimuth_mode = 210.0;
    raw[0] = azimuth_mode + 10.0 * rng.next_normal();
    raw[1] = 8.0 * rng.next_normal();          // in-plane rotation near 0
    raw[2] = 30.0 + 8.0 * rng.next_normal();   // camera distance biased close
    raw[3] = 40.0 + 10.0 * rng.next_normal();  // camera height
    raw[4] = 120.0 + 25.0 * rng.next_normal(); // light azimuth
    raw[5] = 70.0 + 10.0 * rng.next_normal();  // light intensity biased bright
    const AttributeVector psi = AttributeVector::from_raw(raw);

    char name[32];
    std::snprintf(name, sizeof(name), "target_%04zu.png", i);
    const auto [img, mask] = render(meshes[c], psi, cfg.render);
    const std::filesystem::path out = cfg.targets_dir / name;
    const std::filesystem::path tmp = out.string() + ".tmp";
    save_png(img, tmp);
    std::filesystem::rename(tmp, out);

    Json j;
    j["target"] = name;
    j["asset_id"] = cfg.assets[c].id;
    j["psi"] = std::vector<double>(psi.v.begin(), psi.v.end());
    truth_rows[i] = std::move(j);
  });
  write_records(cfg.targets_dir / "ground_truth.jsonl", truth_rows);
}

}  // namespace dtsynth
