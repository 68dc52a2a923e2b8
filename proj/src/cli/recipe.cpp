#include <cmath>
#include <fstream>
#include <set>
#include <string>

#include "farsep/cli.hpp"

namespace farsep::cli {

namespace {

using nlohmann::json;

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorCode::Format, path.string() + ": " + e.what());
  }
}

void reject_unknown(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  if (!j.is_object()) fail(ErrorCode::Format, where + " must be a JSON object");
  std::set<std::string> known(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items())
    if (!known.count(k)) fail(ErrorCode::Format, where + ": unknown key \"" + k + "\"");
}

// Either a scalar or a [min, max] pair.
void read_range(const json& j, const char* key, double& lo, double& hi) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if (v.is_number()) {
    lo = hi = v.get<double>();
  } else if (v.is_array() && v.size() == 2) {
    lo = v[0].get<double>();
    hi = v[1].get<double>();
  } else {
    fail(ErrorCode::Format, std::string(key) + " must be a number or a [min, max] pair");
  }
  if (!(lo <= hi)) fail(ErrorCode::Format, std::string(key) + ": min exceeds max");
}

Eigen::Vector3d read_vec3(const json& v, const char* key) {
  if (!v.is_array() || v.size() != 3) fail(ErrorCode::Format, std::string(key) + " must be a 3-element array");
  return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  if (lo == hi) return lo;
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::Usage:
      return kExitUsage;
    case ErrorCode::DegenerateSteering:
    case ErrorCode::NonConvergence:
    case ErrorCode::Decomposition:
    case ErrorCode::SingularDistance:
      return kExitNumerical;
    default:
      return kExitData;
  }
}

Recipe recipe_from_json(const json& j, const fs::path& base_dir) {
  Recipe r;
  try {
    reject_unknown(j,
                   {"duration_s", "sample_rate", "speech_dir", "geometry", "room", "source_distance_m",
                    "source_elevation_deg", "min_azimuth_separation_deg", "wall_margin_m", "mixing_ratio_db", "snr_db",
                    "level_db", "noise_waves", "target_window_ms"},
                   "recipe");
    r.duration_s = j.value("duration_s", r.duration_s);
    r.sample_rate = j.value("sample_rate", r.sample_rate);
    if (j.contains("speech_dir")) {
      const auto dir = j.at("speech_dir").get<std::string>();
      r.speech_dir = dir == "synthetic" ? dir : resolve(base_dir, dir).string();
    }
    if (j.contains("geometry")) r.geometry = resolve(base_dir, j.at("geometry").get<std::string>());
    if (j.contains("room")) {
      const json& room = j.at("room");
      reject_unknown(room, {"dimensions_min_m", "dimensions_max_m", "t60_s", "max_reflection_order"}, "recipe.room");
      if (room.contains("dimensions_min_m")) r.room_min = read_vec3(room.at("dimensions_min_m"), "dimensions_min_m");
      if (room.contains("dimensions_max_m")) r.room_max = read_vec3(room.at("dimensions_max_m"), "dimensions_max_m");
      read_range(room, "t60_s", r.t60_min_s, r.t60_max_s);
      r.max_reflection_order = room.value("max_reflection_order", r.max_reflection_order);
    }
    read_range(j, "source_distance_m", r.distance_min_m, r.distance_max_m);
    read_range(j, "source_elevation_deg", r.elevation_min_deg, r.elevation_max_deg);
    r.min_azimuth_separation_deg = j.value("min_azimuth_separation_deg", r.min_azimuth_separation_deg);
    r.wall_margin_m = j.value("wall_margin_m", r.wall_margin_m);
    if (j.contains("mixing_ratio_db")) r.mixing_ratio_db = scalar_or_draw_from_json(j["mixing_ratio_db"], default_mixing_ratio());
    if (j.contains("snr_db")) r.snr_db = scalar_or_draw_from_json(j["snr_db"], default_snr());
    if (j.contains("level_db")) r.level_db = scalar_or_draw_from_json(j["level_db"], default_level());
    r.noise_waves = j.value("noise_waves", r.noise_waves);
    r.target_window_ms = j.value("target_window_ms", r.target_window_ms);
  } catch (const json::exception& e) {
    fail(ErrorCode::Format, std::string("recipe: ") + e.what());
  }

  if (!(r.duration_s > 0.0) || !(r.sample_rate > 0.0)) fail(ErrorCode::Format, "recipe: duration and rate must be positive");
  if (!(r.room_min.minCoeff() > 0.0) || !(r.room_min.array() <= r.room_max.array()).all())
    fail(ErrorCode::Format, "recipe: room dimension ranges are invalid");
  if (r.t60_min_s < 0.0) fail(ErrorCode::Format, "recipe: t60_s must be non-negative");
  if (r.max_reflection_order < 0) fail(ErrorCode::Format, "recipe: max_reflection_order must be non-negative");
  if (!(r.distance_min_m > 0.0)) fail(ErrorCode::Format, "recipe: source distance must be positive");
  if (r.min_azimuth_separation_deg < 0.0 || r.min_azimuth_separation_deg > 180.0)
    fail(ErrorCode::Format, "recipe: min_azimuth_separation_deg must lie in [0, 180]");
  if (r.elevation_min_deg < -90.0 || r.elevation_max_deg > 90.0)
    fail(ErrorCode::Format, "recipe: source elevation must lie in [-90, 90]");
  if (r.wall_margin_m < 0.0) fail(ErrorCode::Format, "recipe: wall_margin_m must be non-negative");
  if (r.noise_waves == 0) fail(ErrorCode::Format, "recipe: noise_waves must be positive");
  return r;
}

Recipe load_recipe(const fs::path& path) { return recipe_from_json(read_json(path), path.parent_path()); }

std::mt19937_64 scene_stream(std::uint64_t master_seed, std::size_t index) {
  const auto idx = static_cast<std::uint64_t>(index);
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(idx), static_cast<std::uint32_t>(idx >> 32), 0x73636e65u};
  return std::mt19937_64(seq);
}

SceneSpec realize_scene(const Recipe& recipe, const ArrayGeometry& geom, std::uint64_t master_seed, std::size_t index) {
  auto rng = scene_stream(master_seed, index);

  SceneSpec spec;
  for (int a = 0; a < 3; ++a) spec.room.dimensions[a] = uniform(rng, recipe.room_min[a], recipe.room_max[a]);
  const double t60 = uniform(rng, recipe.t60_min_s, recipe.t60_max_s);
  if (t60 > 0.0) {
    spec.room.reflection_coefficient = reflection_for_t60(spec.room.dimensions, t60);
    spec.room.max_reflection_order = recipe.max_reflection_order;
  }
  spec.room.speed_of_sound = geom.speed_of_sound();

  const Eigen::Vector3d lo = Eigen::Vector3d::Constant(recipe.wall_margin_m);
  const Eigen::Vector3d hi = spec.room.dimensions - lo;
  if (!(lo.array() < hi.array()).all()) fail(ErrorCode::InvalidArgument, "recipe: wall margin leaves no room");
  const double geom_radius = geom.coords().rowwise().norm().maxCoeff();
  auto inside = [&](const Eigen::Vector3d& p, double pad) {
    return ((p.array() - pad) >= lo.array()).all() && ((p.array() + pad) <= hi.array()).all();
  };

  constexpr int kPoseAttempts = 200;
  constexpr int kSourceAttempts = 200;
  for (int attempt = 0; attempt < kPoseAttempts; ++attempt) {
    ArrayPose pose;
    for (int a = 0; a < 3; ++a) pose.position[a] = uniform(rng, lo[a], hi[a]);
    pose.yaw = uniform(rng, -kPi, kPi);
    if (!inside(pose.position, geom_radius)) continue;

    std::array<Doa, 2> doas;
    int placed = 0;
    for (int tries = 0; tries < kSourceAttempts && placed < 2; ++tries) {
      const Doa d = Doa::from_degrees(uniform(rng, -180.0, 180.0),
                                      uniform(rng, recipe.elevation_min_deg, recipe.elevation_max_deg));
      const double dist = uniform(rng, recipe.distance_min_m, recipe.distance_max_m);
      const Eigen::Vector3d p =
          pose.position + Eigen::AngleAxisd(pose.yaw, Eigen::Vector3d::UnitZ()) * (dist * unit_direction(d));
      if (!inside(p, 0.0)) continue;
      if (placed == 1 && std::abs(rad2deg(wrap_angle(d.azimuth - doas[0].azimuth))) < recipe.min_azimuth_separation_deg)
        continue;
      doas[placed] = d;
      spec.sources[placed] = p;
      ++placed;
    }
    if (placed < 2) continue;

    spec.pose = pose;
    spec.mixing_ratio_db = recipe.mixing_ratio_db;
    spec.snr_db = recipe.snr_db;
    spec.level_db = recipe.level_db;
    spec.seed = rng();
    spec.sample_rate = recipe.sample_rate;
    spec.samples = static_cast<std::size_t>(std::llround(recipe.duration_s * recipe.sample_rate));
    spec.noise_waves = recipe.noise_waves;
    spec.target_window_ms = recipe.target_window_ms;
    return spec;
  }
  fail(ErrorCode::InvalidArgument, "recipe: could not place the sources inside the room after " +
                                       std::to_string(kPoseAttempts) + " attempts; widen the room or shorten the source distance");
}

DoaMode doa_mode_from_string(const std::string& s) {
  if (s == "oracle") return DoaMode::Oracle;
  if (s == "srp") return DoaMode::Srp;
  if (s == "fit") return DoaMode::Fit;
  fail(ErrorCode::Usage, "unknown DOA mode \"" + s + "\" (expected oracle, srp or fit)");
}

const char* to_string(DoaMode mode) {
  switch (mode) {
    case DoaMode::Oracle:
      return "oracle";
    case DoaMode::Srp:
      return "srp";
    case DoaMode::Fit:
      return "fit";
  }
  return "?";
}

ArrayGeometry PipelineConfig::load_geometry() const {
  return geometry ? farsep::load_geometry(*geometry) : ArrayGeometry::default_circular();
}

PipelineConfig config_from_json(const json& j, const fs::path& base_dir) {
  PipelineConfig c;
  try {
    reject_unknown(j, {"geometry", "stft", "loss", "doa_mode", "postmask", "loading", "srp_grid", "fit", "output_dir"},
                   "config");
    if (j.contains("geometry")) c.geometry = resolve(base_dir, j.at("geometry").get<std::string>());
    if (j.contains("stft")) {
      const json& s = j.at("stft");
      reject_unknown(s, {"frame_len", "hop", "fft_size", "window", "sample_rate"}, "config.stft");
      c.stft.frame_len = s.value("frame_len", c.stft.frame_len);
      c.stft.hop = s.value("hop", c.stft.hop);
      c.stft.fft_size = s.value("fft_size", c.stft.fft_size);
      c.stft.sample_rate = s.value("sample_rate", c.stft.sample_rate);
      if (s.contains("window")) {
        const auto w = s.at("window").get<std::string>();
        if (w == "hann") c.stft.window = Window::Hann;
        else if (w == "rectangular") c.stft.window = Window::Rectangular;
        else fail(ErrorCode::Format, "config.stft.window must be \"hann\" or \"rectangular\"");
      }
    }
    if (j.contains("loss")) c.loss = loss_spec_from_json(j.at("loss"));
    if (j.contains("doa_mode")) c.mode = doa_mode_from_string(j.at("doa_mode").get<std::string>());
    if (j.contains("postmask")) {
      const json& p = j.at("postmask");
      reject_unknown(p, {"enabled", "exponent", "floor"}, "config.postmask");
      c.postmask = p.value("enabled", c.postmask);
      c.mask.exponent = p.value("exponent", c.mask.exponent);
      c.mask.floor = p.value("floor", c.mask.floor);
    }
    c.loading = j.value("loading", c.loading);
    if (j.contains("srp_grid")) {
      const json& g = j.at("srp_grid");
      reject_unknown(g, {"azimuth_step_deg", "elevation_step_deg", "elevation_min_deg", "elevation_max_deg"},
                     "config.srp_grid");
      c.grid.azimuth_step_deg = g.value("azimuth_step_deg", c.grid.azimuth_step_deg);
      c.grid.elevation_step_deg = g.value("elevation_step_deg", c.grid.elevation_step_deg);
      c.grid.elevation_min_deg = g.value("elevation_min_deg", c.grid.elevation_min_deg);
      c.grid.elevation_max_deg = g.value("elevation_max_deg", c.grid.elevation_max_deg);
    }
    if (j.contains("fit")) {
      const json& f = j.at("fit");
      reject_unknown(f, {"max_evaluations", "tolerance_deg", "initial_step_deg", "loading"}, "config.fit");
      c.fit.max_evaluations = f.value("max_evaluations", c.fit.max_evaluations);
      c.fit.tolerance_deg = f.value("tolerance_deg", c.fit.tolerance_deg);
      c.fit.initial_step_deg = f.value("initial_step_deg", c.fit.initial_step_deg);
      c.fit.loading = f.value("loading", c.fit.loading);
    }
    if (j.contains("output_dir")) c.output_dir = resolve(base_dir, j.at("output_dir").get<std::string>());
  } catch (const json::exception& e) {
    fail(ErrorCode::Format, std::string("config: ") + e.what());
  }

  try {
    c.stft.validate();
    c.loss.validate();
    c.grid.validate();
  } catch (const Error& e) {
    fail(ErrorCode::Format, std::string("config: ") + e.what());
  }
  if (!(c.loading >= 0.0)) fail(ErrorCode::Format, "config: loading must be non-negative");
  if (!(c.fit.loading >= 0.0)) fail(ErrorCode::Format, "config: fit.loading must be non-negative");
  if (!(c.mask.exponent > 0.0) || c.mask.floor < 0.0 || c.mask.floor > 1.0)
    fail(ErrorCode::Format, "config: postmask needs exponent > 0 and floor in [0, 1]");
  if (c.geometry && !fs::exists(*c.geometry)) fail(ErrorCode::Io, "geometry file not found: " + c.geometry->string());
  return c;
}

PipelineConfig load_config(const fs::path& path) { return config_from_json(read_json(path), path.parent_path()); }

std::vector<json> read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open manifest " + path.string());
  std::vector<json> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::exception& e) {
      fail(ErrorCode::Format, path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace farsep::cli
