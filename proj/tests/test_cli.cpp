#include <doctest.h>

#include <fstream>
#include <iterator>
#include <sstream>

#include "farsep/cli.hpp"
#include "farsep/wav.hpp"

using namespace farsep;
using namespace farsep::cli;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / "farsep_test_cli" / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

fs::path write_text(const fs::path& p, const std::string& s) {
  std::ofstream(p, std::ios::binary) << s;
  return p;
}

int run_args(std::vector<std::string> args) {
  args.insert(args.begin(), "farsep");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return run(static_cast<int>(argv.size()), argv.data());
}

const char* kAnechoic = R"({"duration_s": 2, "room": {"t60_s": 0}, "snr_db": "inf", "mixing_ratio_db": 0, "level_db": -28})";

}  // namespace

TEST_CASE("recipe parsing") {
  const auto r = recipe_from_json(nlohmann::json::parse(
      R"({"duration_s": 3, "room": {"t60_s": [0.2, 0.4], "max_reflection_order": 5}, "snr_db": 20, "source_distance_m": 2.5})"));
  CHECK(r.duration_s == 3.0);
  CHECK(r.t60_min_s == 0.2);
  CHECK(r.t60_max_s == 0.4);
  CHECK(r.max_reflection_order == 5);
  CHECK_FALSE(r.snr_db.draw);
  CHECK(r.snr_db.value == 20.0);
  CHECK(r.distance_min_m == 2.5);
  CHECK(r.distance_max_m == 2.5);
  CHECK(r.synthetic_speech());
  CHECK_THROWS_AS(recipe_from_json(nlohmann::json::parse(R"({"durration_s": 3})")), Error);
  CHECK_THROWS_AS(recipe_from_json(nlohmann::json::parse(R"({"source_distance_m": [4, 2]})")), Error);
}

TEST_CASE("realised scenes respect the recipe") {
  Recipe r;
  r.min_azimuth_separation_deg = 45;
  const auto g = ArrayGeometry::default_circular();
  for (std::size_t i = 0; i < 20; ++i) {
    const SceneSpec s = realize_scene(r, g, 99, i);
    CHECK_NOTHROW(s.validate(g));
    for (const auto& src : s.sources) {
      const double d = (src - s.pose.position).norm();
      CHECK(d >= 2.0 - 1e-9);
      CHECK(d <= 4.0 + 1e-9);
    }
    const double sep = rad2deg(std::abs(wrap_angle(s.pose.doa_of(s.sources[0]).azimuth - s.pose.doa_of(s.sources[1]).azimuth)));
    CHECK(sep >= 45 - 1e-9);
    CHECK(s.room.reflection_coefficient > 0.0);
  }
  CHECK(realize_scene(r, g, 99, 3).seed == realize_scene(r, g, 99, 3).seed);
  CHECK(realize_scene(r, g, 99, 3).seed != realize_scene(r, g, 99, 4).seed);
}

TEST_CASE("simulate is reproducible across runs and job counts") {
  const fs::path d = fresh_dir("repro");
  const fs::path recipe = write_text(d / "recipe.json", R"({"duration_s": 1, "room": {"t60_s": 0.3, "max_reflection_order": 3}})");
  const auto a = cmd_simulate({recipe, d / "a", 2, 7, 1});
  const auto b = cmd_simulate({recipe, d / "b", 2, 7, 1});
  const auto c = cmd_simulate({recipe, d / "c", 2, 7, 2});
  CHECK(slurp(a) == slurp(b));
  CHECK(slurp(a) == slurp(c));
  for (const char* f : {"scene_00000/mixture.wav", "scene_00001/target_2.wav"}) {
    CHECK(slurp(d / "a" / f) == slurp(d / "b" / f));
    CHECK(slurp(d / "a" / f) == slurp(d / "c" / f));
  }
  const auto lines = read_manifest(a);
  REQUIRE(lines.size() == 2);
  CHECK(lines[0]["scene_id"] == "scene_00000");
  CHECK(lines[1]["index"] == 1);
  const auto mix = read_wav(d / "a" / "scene_00000" / "mixture.wav");
  CHECK(mix.channels.size() == 7);
  CHECK(mix.channels[0].size() == 16000);
}

TEST_CASE("simulate edge cases") {
  const fs::path d = fresh_dir("edge");
  const fs::path recipe = write_text(d / "recipe.json", R"({"duration_s": 1, "room": {"t60_s": 0}, "snr_db": 20})");
  CHECK(slurp(cmd_simulate({recipe, d / "empty", 0, 1, 1})).empty());
  for (const auto& line : read_manifest(cmd_simulate({recipe, d / "snr", 3, 1, 1})))
    CHECK(line["draws"]["snr_db"] == 20.0);

  const fs::path missing = write_text(d / "missing.json", R"({"duration_s": 1, "speech_dir": "no_such_corpus"})");
  try {
    cmd_simulate({missing, d / "m", 1, 1, 1});
    FAIL("expected a corpus error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Io);
    CHECK(std::string(e.what()).find("<speaker>/<utterance>.wav") != std::string::npos);
  }
  CHECK(run_args({"simulate", "--recipe", missing.string(), "--out", (d / "m").string()}) == kExitData);
}

TEST_CASE("simulate from a speech directory") {
  const fs::path d = fresh_dir("corpus");
  for (int spk = 0; spk < 3; ++spk) {
    fs::create_directories(d / "speech" / ("spk" + std::to_string(spk)));
    for (int u = 0; u < 2; ++u)
      write_wav(d / "speech" / ("spk" + std::to_string(spk)) / ("u" + std::to_string(u) + ".wav"),
                {synthetic_source(7000, 16000.0, static_cast<std::uint64_t>(10 * spk + u))}, 16000.0);
  }
  const fs::path recipe = write_text(d / "recipe.json", R"({"duration_s": 1, "speech_dir": "speech", "room": {"t60_s": 0}})");
  const auto lines = read_manifest(cmd_simulate({recipe, d / "out", 2, 3, 1}));
  REQUIRE(lines.size() == 2);
  for (const auto& l : lines) {
    REQUIRE(l["speakers"].size() == 2);
    CHECK(l["speakers"][0] != l["speakers"][1]);
  }
}

TEST_CASE("separate, then evaluate, an anechoic scene") {
  const fs::path d = fresh_dir("pipeline");
  const fs::path recipe = write_text(d / "recipe.json", kAnechoic);
  const fs::path manifest = cmd_simulate({recipe, d / "data", 2, 11, 1});
  PipelineConfig cfg;
  cfg.mode = DoaMode::Oracle;
  CHECK(cmd_separate_manifest(cfg, manifest, d / "sep") == 0);
  for (const char* f : {"est_1.wav", "est_2.wav", "separation.json"}) CHECK(fs::exists(d / "sep" / "scene_00000" / f));
  const auto est = read_wav(d / "sep" / "scene_00000" / "est_1.wav");
  CHECK(est.channels[0].size() == 32000);

  const auto summary = cmd_eval({manifest, d / "sep", d / "report"});
  CHECK(summary.scenes == 2);
  CHECK(summary.failed == 0);
  CHECK(summary.mean_delta_sir >= 10.0);
  std::istringstream csv(slurp(d / "report" / "summary.csv"));
  std::string header, row;
  std::getline(csv, header);
  CHECK(header == kCsvHeader);
  std::getline(csv, row);
  CHECK(row.rfind("scene_00000,ok,", 0) == 0);
  CHECK(fs::exists(d / "report" / "scene_00001.json"));
}

TEST_CASE("evaluating the targets themselves saturates, missing outputs fail the scene") {
  const fs::path d = fresh_dir("eval");
  const fs::path recipe = write_text(d / "recipe.json", kAnechoic);
  const fs::path manifest = cmd_simulate({recipe, d / "data", 2, 5, 1});
  fs::create_directories(d / "sep" / "scene_00000");
  fs::copy_file(d / "data" / "scene_00000" / "target_1.wav", d / "sep" / "scene_00000" / "est_1.wav");
  fs::copy_file(d / "data" / "scene_00000" / "target_2.wav", d / "sep" / "scene_00000" / "est_2.wav");
  const auto s = cmd_eval({manifest, d / "sep", d / "report"});
  CHECK(s.failed == 1);
  const auto report = nlohmann::json::parse(slurp(d / "report" / "scene_00000.json"));
  CHECK(report["report"]["sources"][0]["si_sdr_db"] == kMetricCapDb);
  CHECK(report["report"]["sources"][1]["sir_db"] == kMetricCapDb);
  const auto missing = nlohmann::json::parse(slurp(d / "report" / "scene_00001.json"));
  CHECK(missing["status"] == "missing");
  CHECK(slurp(d / "report" / "summary.csv").find("scene_00001,missing,") != std::string::npos);

  write_text(d / "empty.jsonl", "");
  const auto e = cmd_eval({d / "empty.jsonl", d / "sep", d / "empty_report"});
  CHECK(e.scenes == 0);
  CHECK(slurp(d / "empty_report" / "summary.csv") == std::string(kCsvHeader) + "\n");
}

TEST_CASE("separate argument and data errors") {
  const fs::path d = fresh_dir("errors");
  const fs::path recipe = write_text(d / "recipe.json", kAnechoic);
  cmd_simulate({recipe, d / "data", 1, 2, 1});
  const std::string mix = (d / "data" / "scene_00000" / "mixture.wav").string();
  const std::string out = (d / "out").string();

  CHECK(run_args({"separate", "--input", mix, "--out-dir", out, "--doa", "fit"}) == kExitUsage);
  CHECK(run_args({"separate", "--input", mix, "--out-dir", out, "--doa", "oracle"}) == kExitUsage);
  CHECK(run_args({"separate", "--input", mix, "--out-dir", out, "--doa", "sideways"}) == kExitUsage);
  CHECK(run_args({"separate", "--bogus"}) == kExitUsage);
  CHECK(run_args({}) == kExitUsage);
  CHECK(run_args({"separate", "--input", mix, "--out-dir", out, "--doa", "oracle", "--az1", "10", "--az2", "80",
                  "--postmask"}) == kExitOk);
  const auto side = nlohmann::json::parse(slurp(d / "out" / "separation.json"));
  CHECK(side["postmask"]["enabled"] == true);
  CHECK(side["doas"][0]["azimuth_deg"].get<double>() == doctest::Approx(10.0));

  write_wav(d / "silence.wav", MultiSignal(7, Signal(4000, 0.0)), 16000.0);
  CHECK(run_args({"separate", "--input", (d / "silence.wav").string(), "--out-dir", out, "--doa", "srp"}) == kExitData);
  SeparateArgs a;
  a.input = d / "silence.wav";
  a.out_dir = out;
  try {
    cmd_separate(a);
    FAIL("expected NoSignal");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoSignal);
  }

  write_wav(d / "stereo.wav", MultiSignal(2, Signal(4000, 0.1)), 16000.0);
  a.input = d / "stereo.wav";
  try {
    cmd_separate(a);
    FAIL("expected Format");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Format);
  }
  write_wav(d / "rate.wav", MultiSignal(7, Signal(4000, 0.1)), 8000.0);
  a.input = d / "rate.wav";
  CHECK_THROWS_AS(cmd_separate(a), Error);
}

TEST_CASE("fit mode through the command line") {
  const fs::path d = fresh_dir("fit");
  const fs::path recipe = write_text(d / "recipe.json", kAnechoic);
  cmd_simulate({recipe, d / "data", 1, 4, 1});
  const auto line = read_manifest(d / "data" / "manifest.jsonl").at(0);
  const fs::path cfg = write_text(d / "config.json", R"({"doa_mode": "fit", "fit": {"max_evaluations": 60}})");
  const fs::path scene = d / "data" / "scene_00000";
  const int rc = run_args({"separate", "--config", cfg.string(), "--input", (scene / "mixture.wav").string(),
                           "--targets", (scene / "target_1.wav").string(), (scene / "target_2.wav").string(),
                           "--out-dir", (d / "out").string()});
  CHECK((rc == kExitOk || rc == kExitNumerical));
  const auto side = nlohmann::json::parse(slurp(d / "out" / "separation.json"));
  CHECK(side["mode"] == "fit");
  CHECK(side["loss"].get<double>() <= side["initial_loss"].get<double>());
  CHECK(side["evaluations"].get<int>() <= 60);
  CHECK(side["converged"].get<bool>() == (rc == kExitOk));
}

TEST_CASE("pipeline config") {
  const fs::path d = fresh_dir("config");
  const auto c = config_from_json(nlohmann::json::parse(
      R"({"doa_mode": "oracle", "loss": {"kind": "MAE", "alpha": 0.5}, "postmask": {"enabled": true, "floor": 0.1}, "stft": {"window": "hann"}})"));
  CHECK(c.mode == DoaMode::Oracle);
  CHECK(c.loss.kind == LossKind::MAE);
  CHECK(c.postmask);
  CHECK(c.mask.floor == 0.1);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"geometry": "nope.json"})"), d), Error);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"doa_mode": "oracle", "extra": 1})")), Error);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"loss": {"kind": "SDR", "alpha": 0.5}})")), Error);
  CHECK(exit_code_for(ErrorCode::NonConvergence) == kExitNumerical);
  CHECK(exit_code_for(ErrorCode::Usage) == kExitUsage);
  CHECK(exit_code_for(ErrorCode::Format) == kExitData);
}
