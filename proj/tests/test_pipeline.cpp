#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "dtsynth/pipeline.hpp"

using namespace dtsynth;

namespace {

namespace fs = std::filesystem;

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "dtsynth_tests" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ostringstream ss;
  ss << std::ifstream(p).rdbuf();
  return ss.str();
}

PipelineConfig small_config(const fs::path& targets, const fs::path& output) {
  PipelineConfig cfg;
  cfg.targets_dir = targets;
  cfg.output_dir = output;
  cfg.assets = {{"box", "builtin:box"}};
  cfg.render.image_width = 32;
  cfg.render.image_height = 32;
  cfg.coreset_per_class = 1;
  cfg.augment.count = 1;
  cfg.workers = 1;
  return cfg;
}

void write_target(const PipelineConfig& cfg, const Mesh& mesh, const AttributeVector& psi,
                  const std::string& name) {
  save_image(render(mesh, psi, cfg.render).first, cfg.targets_dir / name);
}

}  // namespace

TEST_CASE("proportional allocation uses largest remainders") {
  CHECK(detail::proportional_allocation({1, 1}, 4) == std::vector<std::size_t>{2, 2});
  CHECK(detail::proportional_allocation({2, 1}, 4) == std::vector<std::size_t>{3, 1});
  // 10 * {1,1,1}/3 = 3.33 each; two extra slots go to the lowest indices
  CHECK(detail::proportional_allocation({1, 1, 1}, 10) == std::vector<std::size_t>{4, 3, 3});
  CHECK(detail::proportional_allocation({0, 5}, 3) == std::vector<std::size_t>{0, 3});
  CHECK(detail::proportional_allocation({0, 0}, 3) == std::vector<std::size_t>{0, 0});
}

TEST_CASE("image names are zero-padded") {
  CHECK(detail::image_name(0) == "images/000000.png");
  CHECK(detail::image_name(123456) == "images/123456.png");
}

TEST_CASE("assign_asset picks the nearest canonical view, ties to lowest id") {
  std::vector<AssetSpec> assets = {{"b_far", ""}, {"a_near", ""}};
  std::vector<FeatureVector> canon = {FeatureVector{{0.0}}, FeatureVector{{1.0}}};
  CHECK(assign_asset(FeatureVector{{0.9}}, canon, assets) == 1);
  CHECK(assign_asset(FeatureVector{{0.1}}, canon, assets) == 0);
  // equidistant: "a_near" < "b_far" lexicographically
  CHECK(assign_asset(FeatureVector{{0.5}}, canon, assets) == 1);
  CHECK_THROWS_AS(assign_asset(FeatureVector{{0.0}}, {}, {}), DataError);
}

TEST_CASE("random attribute vectors are uniform over the ranges") {
  double sum[kNumAttributes] = {};
  const std::size_t n = 10000;
  for (std::size_t j = 0; j < n; ++j) {
    const AttributeVector psi = random_attribute_vector(42, j);
    for (int k = 0; k < kNumAttributes; ++k) {
      REQUIRE(psi[k] >= 0.0);
      REQUIRE(psi[k] <= attribute_hi(k));
      sum[k] += psi[k];
    }
  }
  for (int k = 0; k < kNumAttributes; ++k) {
    const double mid = attribute_hi(k) / 2.0;
    CHECK(std::abs(sum[k] / n - mid) <= 0.01 * attribute_hi(k));
  }
}

TEST_CASE("manifest records round-trip through JSON") {
  ManifestRecord r;
  r.image_path = "images/000007.png";
  r.asset_id = "box";
  r.bbox = {3, 4, 20, 28, false};
  r.psi = {30, 0, 40, 50, 120, 60};
  r.origin = "twin";
  r.source_twin = 2;
  const ManifestRecord back = manifest_record_from_json(manifest_record_to_json(r));
  CHECK(back.image_path == r.image_path);
  CHECK(back.asset_id == r.asset_id);
  CHECK(back.bbox == r.bbox);
  CHECK(back.psi == r.psi);
  CHECK(back.origin == r.origin);
  CHECK(back.source_twin == r.source_twin);

  ManifestRecord empty_bbox = r;
  empty_bbox.bbox = {};
  empty_bbox.source_twin.reset();
  const ManifestRecord back2 = manifest_record_from_json(manifest_record_to_json(empty_bbox));
  CHECK(back2.bbox.empty);
  CHECK(!back2.source_twin);
}

TEST_CASE("config parsing") {
  Json j;
  j["schema_version"] = 1;
  j["targets_dir"] = "/tmp/t";
  j["assets"] = Json::array({Json{{"id", "box"}, {"mesh", "builtin:box"}}});
  j["coreset_per_class"] = 3;
  j["augment"] = Json{{"deviation_fraction", 0.2}, {"count", 12}};
  j["loss"] = "style";
  j["max_epochs"] = 4;
  j["seed"] = 99;
  j["render"] = Json{{"image_width", 48}, {"image_height", 48}, {"distance_map", {3.0, 6.0}}};
  const PipelineConfig cfg = parse_pipeline_config(j);
  CHECK(cfg.targets_dir == "/tmp/t");
  CHECK(cfg.assets.size() == 1);
  CHECK(cfg.coreset_per_class == 3);
  CHECK(cfg.augment.deviation_fraction == 0.2);
  CHECK(cfg.augment.count == 12);
  CHECK(cfg.loss == LossKind::Style);
  CHECK(cfg.max_epochs == 4);
  CHECK(cfg.seed == 99);
  CHECK(cfg.render.image_width == 48);
  CHECK(cfg.render.distance_map.min_out == 3.0);

  Json bad = j;
  bad.erase("schema_version");
  CHECK_THROWS_AS(parse_pipeline_config(bad), ConfigError);
  bad = j;
  bad["schema_version"] = 2;
  CHECK_THROWS_AS(parse_pipeline_config(bad), ConfigError);
}

TEST_CASE("validate rejects N < O and empty assets") {
  PipelineConfig cfg = small_config("/tmp/nowhere", "/tmp/nowhere2");
  cfg.coreset_per_class = 4;
  cfg.augment.count = 2;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.augment.count = 4;
  cfg.assets.clear();
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("list_target_images is sorted and validated") {
  const fs::path dir = fresh_dir("listing");
  RasterImage img(8, 8);
  save_image(img, dir / "b.png");
  save_image(img, dir / "a.ppm");
  std::ofstream(dir / "notes.txt") << "ignored";
  const auto list = list_target_images(dir);
  REQUIRE(list.size() == 2);
  CHECK(list[0].filename() == "a.ppm");
  CHECK(list[1].filename() == "b.png");
  CHECK_THROWS_AS(list_target_images(dir / "missing"), DataError);
  const fs::path empty = fresh_dir("listing_empty");
  CHECK_THROWS_AS(list_target_images(empty), DataError);
}

TEST_CASE("build on a self-rendered target recovers it exactly") {
  const fs::path targets = fresh_dir("self_targets");
  const fs::path out = fresh_dir("self_out");
  PipelineConfig cfg = small_config(targets, out);
  // identifiability-tuned scene so the 2-epoch fit recovers the pose exactly
  cfg.assets = {{"orb", "builtin:faceted"}};
  cfg.render.distance_map = {2.6, 4.8};
  cfg.render.height_map = {0.0, 0.8};
  cfg.render.intensity_map = {0.2, 0.55};
  cfg.render.ambient = 0.45;
  const Mesh mesh = resolve_mesh(cfg.assets[0].mesh_path);
  const AttributeVector truth{60, 30, 30, 70, 210, 80};
  write_target(cfg, mesh, truth, "only.png");

  RunReport report;
  const DatasetManifest manifest = build_dataset(cfg, &report);

  // O=1 twin + N=1 augmented
  REQUIRE(manifest.records.size() == 2);
  CHECK(manifest.records[0].origin == "twin");
  CHECK(manifest.records[0].psi == truth);
  CHECK(manifest.records[1].origin == "augmented");
  CHECK(manifest.records[1].source_twin == 0);
  REQUIRE(report.groups.size() == 1);
  REQUIRE(report.groups[0].twin_losses.size() == 1);
  CHECK(report.groups[0].twin_losses[0] == 0.0);

  // the twin's rendered image reproduces the target byte for byte
  CHECK(load_image(out / manifest.records[0].image_path) == load_image(targets / "only.png"));

  // expected artifacts exist
  for (const char* f : {"manifest.jsonl", "run_report.txt", "intermediate/features.jsonl",
                        "intermediate/coreset.jsonl", "intermediate/samples.jsonl",
                        "intermediate/fit_trace_orb.jsonl"})
    CHECK(fs::exists(out / f));
  CHECK(load_manifest(out / "manifest.jsonl").records.size() == 2);
}

TEST_CASE("build output is byte-identical across runs and worker counts") {
  const fs::path targets = fresh_dir("det_targets");
  PipelineConfig seed_cfg = small_config(targets, "");
  const Mesh mesh = resolve_mesh(seed_cfg.assets[0].mesh_path);
  write_target(seed_cfg, mesh, {60, 0, 30, 70, 210, 80}, "t0.png");
  write_target(seed_cfg, mesh, {120, 30, 50, 40, 90, 40}, "t1.png");
  write_target(seed_cfg, mesh, {300, 0, 70, 20, 0, 90}, "t2.png");

  auto run = [&](const std::string& name, unsigned workers) {
    PipelineConfig cfg = small_config(targets, fresh_dir(name));
    cfg.coreset_per_class = 2;
    cfg.augment.count = 4;
    cfg.seed = 17;
    cfg.workers = workers;
    build_dataset(cfg);
    return cfg.output_dir;
  };
  const fs::path a = run("det_a", 1);
  const fs::path b = run("det_b", 1);
  const fs::path c = run("det_c", 4);
  const std::string ma = slurp(a / "manifest.jsonl");
  CHECK(ma == slurp(b / "manifest.jsonl"));
  CHECK(ma == slurp(c / "manifest.jsonl"));
  CHECK(slurp(a / "run_report.txt") == slurp(c / "run_report.txt"));
  CHECK(slurp(a / "images/000003.png") == slurp(c / "images/000003.png"));
}

TEST_CASE("random baseline matches class allocation and is deterministic") {
  const fs::path targets = fresh_dir("rb_targets");
  PipelineConfig seed_cfg = small_config(targets, "");
  const Mesh mesh = resolve_mesh(seed_cfg.assets[0].mesh_path);
  write_target(seed_cfg, mesh, {60, 0, 30, 70, 210, 80}, "t0.png");
  write_target(seed_cfg, mesh, {120, 30, 50, 40, 90, 40}, "t1.png");

  PipelineConfig cfg = small_config(targets, fresh_dir("rb_out"));
  cfg.augment.count = 5;
  cfg.seed = 3;
  const DatasetManifest m = random_baseline(cfg);
  REQUIRE(m.records.size() == 5);
  for (const auto& r : m.records) {
    CHECK(r.origin == "random-baseline");
    CHECK(r.asset_id == "box");
    CHECK(!r.source_twin);
  }
  cfg.output_dir = fresh_dir("rb_out2");
  const DatasetManifest m2 = random_baseline(cfg);
  for (std::size_t i = 0; i < 5; ++i) CHECK(m.records[i].psi == m2.records[i].psi);
}

TEST_CASE("dist baseline trace is monotone and lands on the grid") {
  const fs::path targets = fresh_dir("db_targets");
  PipelineConfig seed_cfg = small_config(targets, "");
  const Mesh mesh = resolve_mesh(seed_cfg.assets[0].mesh_path);
  // tight cluster of targets around one on-grid pose
  const AttributeVector center{60, 0, 30, 50, 120, 70};
  write_target(seed_cfg, mesh, center, "t0.png");
  write_target(seed_cfg, mesh, center.with(0, 65), "t1.png");
  write_target(seed_cfg, mesh, center.with(5, 75), "t2.png");

  PipelineConfig cfg = small_config(targets, fresh_dir("db_out"));
  cfg.augment.count = 3;
  cfg.max_epochs = 1;
  cfg.seed = 5;
  RunReport report;
  const DatasetManifest m = dist_baseline(cfg, &report);
  REQUIRE(m.records.size() == 3);
  for (const auto& r : m.records) CHECK(r.origin == "dist-baseline");
  REQUIRE(report.groups.size() == 1);
  REQUIRE(report.groups[0].twins.size() == 1);
  CHECK(cfg.search.on_grid(report.groups[0].twins[0]));

  const auto trace = read_records(cfg.output_dir / "intermediate" / "dist_trace.jsonl");
  REQUIRE(trace.size() == static_cast<std::size_t>(kNumAttributes));
  for (std::size_t i = 1; i < trace.size(); ++i)
    CHECK(trace[i].at("objective").get<double>() <=
          trace[i - 1].at("objective").get<double>() + 1e-12);
}

TEST_CASE("evaluate of the targets against themselves is ~0") {
  const fs::path targets = fresh_dir("ev_targets");
  PipelineConfig cfg = small_config(targets, fresh_dir("ev_out"));
  const Mesh mesh = resolve_mesh(cfg.assets[0].mesh_path);
  const char* names[] = {"t0.png", "t1.png", "t2.png"};
  const AttributeVector psis[] = {
      {60, 0, 30, 70, 210, 80}, {120, 30, 50, 40, 90, 40}, {300, 0, 70, 20, 0, 90}};
  DatasetManifest manifest;
  for (int i = 0; i < 3; ++i) {
    write_target(cfg, mesh, psis[i], names[i]);
    manifest.records.push_back({names[i], "box", {}, psis[i], "twin", std::nullopt});
  }
  const EvalReport report = evaluate(manifest, targets, cfg);
  CHECK(report.ffd <= 1e-6);
  CHECK(report.count_generated == 3);
  CHECK(report.count_targets == 3);
  REQUIRE(report.per_class_ffd.count("box") == 1);
  CHECK(report.per_class_ffd.at("box") <= 1e-6);
  const std::string text = eval_report_text(report);
  CHECK(text.find("ffd_overall:") != std::string::npos);
  CHECK(text.find("ffd_class[box]:") != std::string::npos);
}

TEST_CASE("synth-targets writes images and ground truth") {
  PipelineConfig cfg;
  cfg.targets_dir = fresh_dir("st_targets");
  cfg.assets = {{"box", "builtin:box"}, {"bottle", "builtin:bottle"}};
  cfg.render.image_width = 32;
  cfg.render.image_height = 32;
  cfg.seed = 21;
  cfg.workers = 2;
  synth_targets(cfg, 6, /*bimodal=*/true);
  const auto list = list_target_images(cfg.targets_dir);
  CHECK(list.size() == 6);
  const auto truth = read_records(cfg.targets_dir / "ground_truth.jsonl");
  REQUIRE(truth.size() == 6);
  // round-robin class assignment
  CHECK(truth[0].at("asset_id") == "box");
  CHECK(truth[1].at("asset_id") == "bottle");
  CHECK(truth[2].at("asset_id") == "box");
  // deterministic regeneration
  const std::string before = slurp(cfg.targets_dir / "target_0003.png");
  synth_targets(cfg, 6, true);
  CHECK(before == slurp(cfg.targets_dir / "target_0003.png"));
}
