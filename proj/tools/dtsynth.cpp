// dtsynth: digital-twin training-set synthesis pipeline.
//
// Stages (assign, select, fit, augment) can be run individually; `build` runs
// the whole pipeline. Exit codes: 0 success, 1 usage/config error, 2 data
// error, 3 internal invariant violation.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <sstream>

#include "dtsynth/pipeline.hpp"

namespace {

using namespace dtsynth;

struct CommonOpts {
  std::string config_path;
  std::optional<std::string> targets_dir, output_dir, loss;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::optional<std::size_t> coreset_per_class, samples;
  std::optional<int> max_epochs;
  std::optional<double> deviation_fraction;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("-c,--config", o.config_path, "pipeline config file (JSON)")->required();
  cmd->add_option("--targets-dir", o.targets_dir, "override targets_dir");
  cmd->add_option("--output-dir", o.output_dir, "override output_dir");
  cmd->add_option("--seed", o.seed, "override seed");
  cmd->add_option("--workers", o.workers, "worker threads (0 = hardware)");
  cmd->add_option("-O,--coreset-per-class", o.coreset_per_class, "coreset size per class");
  cmd->add_option("-N,--samples", o.samples, "augmented sample count");
  cmd->add_option("--loss", o.loss, "fit loss: perceptual | ssim | style");
  cmd->add_option("--max-epochs", o.max_epochs, "coordinate descent epochs");
  cmd->add_option("--deviation-fraction", o.deviation_fraction, "augmentation 2-sigma band");
}

PipelineConfig resolve_config(const CommonOpts& o) {
  PipelineConfig cfg = load_pipeline_config(o.config_path);
  if (o.targets_dir) cfg.targets_dir = *o.targets_dir;
  if (o.output_dir) cfg.output_dir = *o.output_dir;
  if (o.seed) cfg.seed = *o.seed;
  if (o.workers) cfg.workers = *o.workers;
  if (o.coreset_per_class) cfg.coreset_per_class = *o.coreset_per_class;
  if (o.samples) cfg.augment.count = *o.samples;
  if (o.loss) cfg.loss = loss_from_name(*o.loss);
  if (o.max_epochs) cfg.max_epochs = *o.max_epochs;
  if (o.deviation_fraction) cfg.augment.deviation_fraction = *o.deviation_fraction;
  return cfg;
}

void write_assignments(const PipelineConfig& cfg, const PipelineInputs& in) {
  std::filesystem::create_directories(cfg.output_dir / "intermediate");
  std::vector<Json> rows;
  for (std::size_t i = 0; i < in.target_paths.size(); ++i) {
    Json j;
    j["target"] = in.target_paths[i].filename().string();
    j["asset_id"] = cfg.assets[in.target_class[i]].id;
    rows.push_back(std::move(j));
  }
  write_records(cfg.output_dir / "intermediate" / "assignments.jsonl", rows);
}

int cmd_synth_targets(const PipelineConfig& cfg, std::size_t count, const std::string& modality) {
  if (modality != "unimodal" && modality != "bimodal")
    throw ConfigError("--modality must be unimodal or bimodal");
  synth_targets(cfg, count, modality == "bimodal");
  std::cout << "wrote " << count << " targets to " << cfg.targets_dir.string() << "\n";
  return 0;
}

int cmd_assign(const PipelineConfig& cfg) {
  PipelineInputs in = prepare_inputs(cfg);
  write_assignments(cfg, in);
  for (std::size_t c = 0; c < cfg.assets.size(); ++c)
    std::cout << cfg.assets[c].id << ": " << in.class_targets[c].size() << " targets\n";
  return 0;
}

int cmd_select(const PipelineConfig& cfg) {
  PipelineInputs in = prepare_inputs(cfg);
  write_assignments(cfg, in);
  std::vector<Json> rows;
  for (std::size_t c = 0; c < cfg.assets.size(); ++c) {
    if (in.class_targets[c].empty()) continue;
    std::vector<FeatureVector> feats;
    for (std::size_t t : in.class_targets[c]) feats.push_back(in.target_features[t]);
    const std::size_t want = std::min(cfg.coreset_per_class, feats.size());
    const CoresetSelection sel = select_coreset(feats, want, SeedRule::NearestToMean);
    Json j;
    j["asset_id"] = cfg.assets[c].id;
    std::vector<std::size_t> global;
    for (std::size_t s : sel.selected_indices) global.push_back(in.class_targets[c][s]);
    j["coreset_targets"] = global;
    j["cover_radius"] = sel.cover_radius;
    rows.push_back(std::move(j));
    std::cout << cfg.assets[c].id << ": coreset " << want << ", cover radius " << sel.cover_radius
              << "\n";
  }
  write_records(cfg.output_dir / "intermediate" / "coreset.jsonl", rows);
  return 0;
}

int cmd_fit(const PipelineConfig& cfg) {
  PipelineInputs in = prepare_inputs(cfg);
  std::filesystem::create_directories(cfg.output_dir / "intermediate");
  std::vector<Json> twin_rows;
  for (std::size_t c = 0; c < cfg.assets.size(); ++c) {
    if (in.class_targets[c].empty()) continue;
    std::vector<FeatureVector> feats;
    for (std::size_t t : in.class_targets[c]) feats.push_back(in.target_features[t]);
    const std::size_t want = std::min(cfg.coreset_per_class, feats.size());
    const CoresetSelection sel = select_coreset(feats, want, SeedRule::NearestToMean);

    std::vector<FitResult> fits(sel.selected_indices.size());
    parallel_for(fits.size(), cfg.workers, [&](std::size_t i) {
      const std::size_t target = in.class_targets[c][sel.selected_indices[i]];
      fits[i] = fit_twin(load_image(in.target_paths[target]), in.meshes[c], cfg.search, cfg.render,
                         cfg.loss, cfg.max_epochs, cfg.search.midpoint());
    });

    Json j;
    j["asset_id"] = cfg.assets[c].id;
    j["target_count"] = in.class_targets[c].size();
    std::vector<Json> twins;
    std::vector<Json> trace_rows;
    for (std::size_t i = 0; i < fits.size(); ++i) {
      Json t;
      t["psi"] = std::vector<double>(fits[i].psi_star.v.begin(), fits[i].psi_star.v.end());
      t["loss"] = fits[i].final_loss;
      twins.push_back(std::move(t));
      for (const FitStep& s : fits[i].trace) {
        Json row;
        row["class"] = cfg.assets[c].id;
        row["fit"] = i;
        row["epoch"] = s.epoch;
        row["attribute"] = kAttributeNames[s.attribute];
        row["value"] = s.chosen_value;
        row["loss"] = s.loss;
        trace_rows.push_back(std::move(row));
      }
      std::cout << cfg.assets[c].id << " twin " << i << ": loss " << fits[i].final_loss << "\n";
    }
    j["twins"] = twins;
    twin_rows.push_back(std::move(j));
    write_records(cfg.output_dir / "intermediate" / ("fit_trace_" + cfg.assets[c].id + ".jsonl"),
                  trace_rows);
  }
  write_records(cfg.output_dir / "intermediate" / "twins.jsonl", twin_rows);
  return 0;
}

int cmd_augment(const PipelineConfig& cfg) {
  const auto twins_path = cfg.output_dir / "intermediate" / "twins.jsonl";
  const std::vector<Json> twin_rows = read_records(twins_path);
  std::vector<std::size_t> weights;
  std::vector<std::vector<AttributeVector>> class_twins;
  for (const Json& j : twin_rows) {
    weights.push_back(j.at("target_count").get<std::size_t>());
    std::vector<AttributeVector> twins;
    for (const Json& t : j.at("twins")) {
      std::array<double, kNumAttributes> raw{};
      for (int k = 0; k < kNumAttributes; ++k) raw[k] = t.at("psi").at(k).get<double>();
      twins.push_back(AttributeVector::from_raw(raw));
    }
    class_twins.push_back(std::move(twins));
  }
  const auto alloc = detail::proportional_allocation(weights, cfg.augment.count);
  std::vector<Json> sample_rows;
  for (std::size_t c = 0; c < twin_rows.size(); ++c) {
    if (class_twins[c].empty() || alloc[c] == 0) continue;
    AugmentConfig acfg = cfg.augment;
    acfg.count = alloc[c];
    acfg.seed = detail::class_seed(cfg.seed, c, 1);
    for (const AugmentedSample& s : sample_augmented(class_twins[c], acfg)) {
      Json j;
      j["asset_id"] = twin_rows[c].at("asset_id");
      j["source_twin"] = s.source_twin;
      j["draw_index"] = s.draw_index;
      j["psi"] = std::vector<double>(s.psi.v.begin(), s.psi.v.end());
      sample_rows.push_back(std::move(j));
    }
  }
  write_records(cfg.output_dir / "intermediate" / "samples.jsonl", sample_rows);
  std::cout << "wrote " << sample_rows.size() << " augmented samples\n";
  return 0;
}

int cmd_build(const PipelineConfig& cfg) {
  RunReport report;
  const DatasetManifest manifest = build_dataset(cfg, &report);
  std::cout << "wrote " << manifest.records.size() << " images to " << cfg.output_dir.string()
            << "\n";
  for (const auto& w : report.warnings) std::cout << "warning: " << w << "\n";
  return 0;
}

int cmd_baseline(const PipelineConfig& cfg, const std::string& kind) {
  DatasetManifest manifest;
  if (kind == "random") manifest = random_baseline(cfg);
  else if (kind == "dist") manifest = dist_baseline(cfg);
  else throw ConfigError("--kind must be random or dist");
  std::cout << "wrote " << manifest.records.size() << " images to " << cfg.output_dir.string()
            << "\n";
  return 0;
}

int cmd_evaluate(const PipelineConfig& cfg, std::string manifest_path) {
  if (manifest_path.empty()) manifest_path = (cfg.output_dir / "manifest.jsonl").string();
  const DatasetManifest manifest = load_manifest(manifest_path);
  const EvalReport report =
      evaluate(manifest, std::filesystem::path(manifest_path).parent_path(), cfg);
  const std::string text = eval_report_text(report);
  write_text_atomic(std::filesystem::path(manifest_path).parent_path() / "eval_report.txt", text);
  std::cout << text;
  return 0;
}

int cmd_trace_export(const std::string& input, const std::string& output) {
  const std::vector<Json> rows = read_records(input);
  std::ostringstream csv;
  csv << "class,fit,epoch,attribute,value,loss\n";
  for (const Json& j : rows) {
    csv << j.value("class", std::string{}) << "," << j.value("fit", 0) << ","
        << j.at("epoch").get<int>() << "," << j.at("attribute").get<std::string>() << ","
        << j.at("value").get<double>() << "," << j.at("loss").get<double>() << "\n";
  }
  write_text_atomic(output, csv.str());
  std::cout << "wrote " << output << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"digital-twin training-set synthesis"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::size_t target_count = 60;
  std::string modality = "bimodal";
  std::string baseline_kind;
  std::string manifest_path;
  std::string trace_in, trace_out;

  auto* c_synth = app.add_subcommand("synth-targets", "render a biased synthetic target scenario");
  add_common(c_synth, opts);
  c_synth->add_option("--count", target_count, "number of target images");
  c_synth->add_option("--modality", modality, "azimuth distribution: unimodal | bimodal");

  auto* c_assign = app.add_subcommand("assign", "pseudo-label targets with assets");
  add_common(c_assign, opts);
  auto* c_select = app.add_subcommand("select", "farthest-point-sampling coreset per class");
  add_common(c_select, opts);
  auto* c_fit = app.add_subcommand("fit", "fit digital twins for the coreset");
  add_common(c_fit, opts);
  auto* c_augment = app.add_subcommand("augment", "sample augmented attribute vectors");
  add_common(c_augment, opts);
  auto* c_build = app.add_subcommand("build", "run the full pipeline");
  add_common(c_build, opts);

  auto* c_baseline = app.add_subcommand("baseline", "random or distribution-level baseline set");
  add_common(c_baseline, opts);
  c_baseline->add_option("--kind", baseline_kind, "random | dist")->required();

  auto* c_eval = app.add_subcommand("evaluate", "Fréchet feature distance against the targets");
  add_common(c_eval, opts);
  c_eval->add_option("--manifest", manifest_path, "manifest to score (default: <output_dir>/manifest.jsonl)");

  auto* c_trace = app.add_subcommand("trace-export", "convert a fit trace to CSV");
  c_trace->add_option("--input", trace_in, "fit trace JSONL")->required();
  c_trace->add_option("--output", trace_out, "CSV output path")->required();

  try {
    app.parse(argc, argv);
    if (c_trace->parsed()) return cmd_trace_export(trace_in, trace_out);
    const dtsynth::PipelineConfig cfg = resolve_config(opts);
    if (c_synth->parsed()) return cmd_synth_targets(cfg, target_count, modality);
    if (c_assign->parsed()) return cmd_assign(cfg);
    if (c_select->parsed()) return cmd_select(cfg);
    if (c_fit->parsed()) return cmd_fit(cfg);
    if (c_augment->parsed()) return cmd_augment(cfg);
    if (c_build->parsed()) return cmd_build(cfg);
    if (c_baseline->parsed()) return cmd_baseline(cfg, baseline_kind);
    if (c_eval->parsed()) return cmd_evaluate(cfg, manifest_path);
    return 1;
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  } catch (const dtsynth::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const dtsynth::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}
