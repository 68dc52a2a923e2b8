#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "farsep/array_geometry.hpp"
#include "farsep/doa.hpp"
#include "farsep/error.hpp"
#include "farsep/losses.hpp"
#include "farsep/postmask.hpp"
#include "farsep/scene.hpp"
#include "farsep/wola.hpp"

namespace farsep::cli {

namespace fs = std::filesystem;

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 2,
  kExitData = 3,
  kExitNumerical = 4,
};

int exit_code_for(ErrorCode code);

// Dataset recipe: ranges the per-scene parameters are drawn from.
struct Recipe {
  double duration_s = 30.0;
  double sample_rate = 16000.0;
  // Directory of <speaker>/<utterance>.wav, or "synthetic".
  std::string speech_dir = "synthetic";
  std::optional<fs::path> geometry;
  Eigen::Vector3d room_min{4.0, 4.0, 2.5};
  Eigen::Vector3d room_max{8.0, 7.0, 3.5};
  double t60_min_s = 0.3;
  double t60_max_s = 0.8;
  int max_reflection_order = 12;
  double distance_min_m = 2.0;
  double distance_max_m = 4.0;
  double elevation_min_deg = 0.0;
  double elevation_max_deg = 0.0;
  double min_azimuth_separation_deg = 30.0;
  double wall_margin_m = 0.5;
  ScalarOrDraw mixing_ratio_db = default_mixing_ratio();
  ScalarOrDraw snr_db = default_snr();
  ScalarOrDraw level_db = default_level();
  std::size_t noise_waves = 128;
  double target_window_ms = 200.0;

  bool synthetic_speech() const { return speech_dir == "synthetic"; }
};

Recipe recipe_from_json(const nlohmann::json& j, const fs::path& base_dir = {});
Recipe load_recipe(const fs::path& path);

// Per-scene RNG stream from (master seed, scene index).
std::mt19937_64 scene_stream(std::uint64_t master_seed, std::size_t index);

// Random room, array pose and source placement for scene `index`.
SceneSpec realize_scene(const Recipe& recipe, const ArrayGeometry& geom, std::uint64_t master_seed, std::size_t index);

struct SimulateArgs {
  fs::path recipe;
  fs::path out_dir;
  std::size_t count = 1;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
};

// Writes out_dir/<scene_id>/{mixture,target_1,target_2}.wav and
// out_dir/manifest.jsonl; returns the manifest path.
fs::path cmd_simulate(const SimulateArgs& args);

enum class DoaMode { Oracle, Srp, Fit };
DoaMode doa_mode_from_string(const std::string& s);
const char* to_string(DoaMode mode);

struct PipelineConfig {
  std::optional<fs::path> geometry;
  StftSpec stft;
  LossSpec loss;
  DoaMode mode = DoaMode::Srp;
  bool postmask = false;
  PostmaskParams mask;
  double loading = kDefaultLoading;
  DoaGrid grid;
  FitOptions fit;
  fs::path output_dir = "separated";

  ArrayGeometry load_geometry() const;
};

PipelineConfig config_from_json(const nlohmann::json& j, const fs::path& base_dir = {});
PipelineConfig load_config(const fs::path& path);

struct SeparateArgs {
  PipelineConfig config;
  fs::path input;
  std::optional<DoaPair> doas;  // oracle mode, or fit-mode init
  std::optional<std::pair<fs::path, fs::path>> targets;
  fs::path out_dir;
};

struct SeparateOutcome {
  DoaPair doas;
  std::optional<double> loss;
  std::optional<double> initial_loss;
  std::size_t evaluations = 0;
  bool converged = true;
};

// Writes out_dir/est_1.wav, est_2.wav and separation.json.
SeparateOutcome cmd_separate(const SeparateArgs& args);

// Runs cmd_separate for every scene of a manifest, writing
// out_dir/<scene_id>/...; oracle DOAs and fit targets come from the manifest.
// Returns the number of scenes whose fit did not converge.
std::size_t cmd_separate_manifest(const PipelineConfig& config, const fs::path& manifest, const fs::path& out_dir,
                                  std::size_t jobs = 1);

struct EvalArgs {
  fs::path manifest;
  fs::path separated_dir;
  fs::path out_dir;
};

struct EvalSummary {
  std::size_t scenes = 0;
  std::size_t failed = 0;
  double mean_delta_si_sdr = 0.0;
  double mean_delta_sir = 0.0;
};

inline constexpr const char* kCsvHeader =
    "scene_id,status,permutation,si_sdr_1,sir_1,delta_si_sdr_1,delta_sir_1,"
    "si_sdr_2,sir_2,delta_si_sdr_2,delta_sir_2,mean_delta_si_sdr,mean_delta_sir";

// Writes out_dir/summary.csv and out_dir/<scene_id>.json.
EvalSummary cmd_eval(const EvalArgs& args);

std::vector<nlohmann::json> read_manifest(const fs::path& path);

// Parses argv and dispatches; returns the process exit code.
int run(int argc, char** argv);

}  // namespace farsep::cli
