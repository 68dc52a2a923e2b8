#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "farsep/array_geometry.hpp"
#include "farsep/metrics.hpp"
#include "farsep/room_sim.hpp"

namespace farsep {

// A scene parameter that is either fixed or drawn from N(mean, stddev^2).
// A fixed value may be +inf (e.g. no noise).
struct ScalarOrDraw {
  bool draw = false;
  double value = 0.0;
  double mean = 0.0;
  double stddev = 1.0;

  static ScalarOrDraw fixed(double v) { return {false, v, 0.0, 1.0}; }
  static ScalarOrDraw normal(double mean, double stddev) { return {true, 0.0, mean, stddev}; }

  double realize(std::mt19937_64& rng) const;
};

// Energy ratio N(0, 1) dB, SNR N(8, 10^2) dB, level N(-28, 10^2) dBFS.
inline ScalarOrDraw default_mixing_ratio() { return ScalarOrDraw::normal(0.0, 1.0); }
inline ScalarOrDraw default_snr() { return ScalarOrDraw::normal(8.0, 10.0); }
inline ScalarOrDraw default_level() { return ScalarOrDraw::normal(-28.0, 10.0); }

struct SceneSpec {
  RoomSpec room;
  ArrayPose pose;
  std::array<Eigen::Vector3d, 2> sources{Eigen::Vector3d{4.5, 2.5, 1.5}, Eigen::Vector3d{3.0, 4.5, 1.5}};
  ScalarOrDraw mixing_ratio_db = default_mixing_ratio();
  ScalarOrDraw snr_db = default_snr();
  ScalarOrDraw level_db = default_level();
  std::uint64_t seed = 0;
  double sample_rate = 16000.0;
  std::size_t samples = 16000 * 30;
  std::size_t noise_waves = 128;
  double target_window_ms = 200.0;

  void validate(const ArrayGeometry& geom) const;
};

struct RealizedDraws {
  double mixing_ratio_db = 0.0;
  double snr_db = 0.0;
  double level_db = 0.0;
  int level_attempts = 1;
  bool clipped = false;
};

struct SceneBundle {
  MultiSignal mixture;                  // M channels
  SignalPair targets;                   // reference-channel, 200 ms windowed-RIR speech
  std::array<MultiSignal, 2> reverberant;
  MultiSignal noise;                    // empty when the SNR is infinite
  RealizedDraws draws;
  std::array<Doa, 2> true_doas;         // in source order
  std::vector<std::string> warnings;
};

// Draws in the order ratio, snr, level from an RNG seeded by spec.seed.
RealizedDraws draw_parameters(const SceneSpec& spec, std::mt19937_64& rng);

std::mt19937_64 scene_rng(std::uint64_t seed);

// Convolves each dry signal with its RIRs, balances the sources to the drawn
// energy ratio at the reference mic, adds diffuse noise at the drawn SNR
// against the reverberant mixture, then scales mixture, components and
// targets jointly to the drawn reference-mic level (dBFS).
SceneBundle make_scene(const SceneSpec& spec, const SignalPair& dry, const ArrayGeometry& geom);

// Speech-like test signal: formant-filtered noise with a syllable-rate
// envelope and pauses. Deterministic in seed.
Signal synthetic_source(std::size_t samples, double sample_rate, std::uint64_t seed);

nlohmann::json to_json(const ScalarOrDraw& v);
ScalarOrDraw scalar_or_draw_from_json(const nlohmann::json& j, const ScalarOrDraw& fallback);
nlohmann::json to_json(const RoomSpec& room);
RoomSpec room_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SceneSpec& spec);
SceneSpec scene_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Doa& doa);
Doa doa_from_json(const nlohmann::json& j);

}  // namespace farsep
