#include "farsep/scene.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "farsep/error.hpp"
#include "farsep/fft.hpp"
#include "farsep/simd/kernels.hpp"

namespace farsep {

double ScalarOrDraw::realize(std::mt19937_64& rng) const {
  if (!draw) return value;
  std::normal_distribution<double> dist(mean, stddev);
  return dist(rng);
}

std::mt19937_64 scene_rng(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x7363656eu};
  return std::mt19937_64(seq);
}

RealizedDraws draw_parameters(const SceneSpec& spec, std::mt19937_64& rng) {
  RealizedDraws d;
  d.mixing_ratio_db = spec.mixing_ratio_db.realize(rng);
  d.snr_db = spec.snr_db.realize(rng);
  d.level_db = spec.level_db.realize(rng);
  return d;
}

void SceneSpec::validate(const ArrayGeometry& geom) const {
  room.validate();
  if (!(sample_rate > 0.0) || samples == 0) fail(ErrorCode::InvalidArgument, "scene needs a positive duration");
  const Coords mics = pose.mic_positions(geom);
  for (Eigen::Index m = 0; m < mics.rows(); ++m) {
    if (!room.contains(mics.row(m).transpose())) {
      fail(ErrorCode::InvalidArgument, "microphone " + std::to_string(m) + " lies outside the room");
    }
  }
  for (const auto& s : sources) {
    if (!room.contains(s)) fail(ErrorCode::InvalidArgument, "source lies outside the room");
  }
  if ((sources[0] - sources[1]).norm() < 1e-6) fail(ErrorCode::InvalidArgument, "the two sources coincide");
}

namespace {

double energy(const Signal& x) { return simd::kernels().dot(x.data(), x.data(), x.size()); }

void scale(Signal& x, double g) {
  for (double& v : x) v *= g;
}

double peak(const MultiSignal& x) {
  double p = 0.0;
  for (const auto& ch : x) {
    for (double v : ch) p = std::max(p, std::abs(v));
  }
  return p;
}

}  // namespace

SceneBundle make_scene(const SceneSpec& spec, const SignalPair& dry, const ArrayGeometry& geom) {
  spec.validate(geom);
  const std::size_t n = spec.samples;
  if (dry.first.size() < n || dry.second.size() < n) {
    fail(ErrorCode::Length, "dry signals are shorter than the scene (" + std::to_string(n) + " samples)");
  }
  auto rng = scene_rng(spec.seed);
  SceneBundle out;
  out.draws = draw_parameters(spec, rng);
  const std::uint64_t noise_seed = rng();
  const std::size_t ref = geom.reference();
  const std::size_t mics = geom.num_mics();

  const std::array<const Signal*, 2> sources{&dry.first, &dry.second};
  std::array<Signal, 2> targets;
  for (std::size_t i = 0; i < 2; ++i) {
    const Rir rir = simulate_rir(spec.room, spec.sources[i], geom, spec.pose, spec.sample_rate);
    const std::span<const double> x(sources[i]->data(), n);
    out.reverberant[i].resize(mics);
    for (std::size_t m = 0; m < mics; ++m) out.reverberant[i][m] = fft_convolve(x, rir.per_mic[m], n);
    targets[i] = fft_convolve(x, window_rir(rir, spec.target_window_ms).per_mic[ref], n);
    out.true_doas[i] = spec.pose.doa_of(spec.sources[i]);
  }

  const double e1 = energy(out.reverberant[0][ref]);
  const double e2 = energy(out.reverberant[1][ref]);
  if (!(e1 > 0.0 && e2 > 0.0)) fail(ErrorCode::NoSignal, "a source is silent at the reference microphone");
  const double g2 = std::sqrt(e1 / (e2 * std::pow(10.0, out.draws.mixing_ratio_db / 10.0)));
  for (auto& ch : out.reverberant[1]) scale(ch, g2);
  scale(targets[1], g2);

  Signal rev_ref(n);
  for (std::size_t t = 0; t < n; ++t) rev_ref[t] = out.reverberant[0][ref][t] + out.reverberant[1][ref][t];
  if (std::isfinite(out.draws.snr_db)) {
    out.noise = diffuse_noise(geom, n, spec.sample_rate, noise_seed, spec.noise_waves);
    const double gn = std::sqrt(energy(rev_ref) / (energy(out.noise[ref]) * std::pow(10.0, out.draws.snr_db / 10.0)));
    for (auto& ch : out.noise) scale(ch, gn);
  } else if (out.draws.snr_db < 0) {
    fail(ErrorCode::InvalidArgument, "SNR of -inf");
  }

  auto sum_components = [&] {
    MultiSignal mix(mics, Signal(n));
    for (std::size_t m = 0; m < mics; ++m) {
      for (std::size_t t = 0; t < n; ++t) {
        double v = out.reverberant[0][m][t] + out.reverberant[1][m][t];
        if (!out.noise.empty()) v += out.noise[m][t];
        mix[m][t] = v;
      }
    }
    return mix;
  };
  MultiSignal mix = sum_components();
  const double rms = std::sqrt(energy(mix[ref]) / static_cast<double>(n));
  const double mix_peak = peak(mix);

  double gain = std::pow(10.0, out.draws.level_db / 20.0) / rms;
  for (int attempt = 1; gain * mix_peak > 1.0 && spec.level_db.draw && attempt < 5; ++attempt) {
    out.draws.level_db = spec.level_db.realize(rng);
    out.draws.level_attempts = attempt + 1;
    gain = std::pow(10.0, out.draws.level_db / 20.0) / rms;
  }

  for (auto& component : {&out.reverberant[0], &out.reverberant[1], &out.noise}) {
    for (auto& ch : *component) scale(ch, gain);
  }
  for (auto& t : targets) scale(t, gain);
  out.mixture = sum_components();
  if (peak(out.mixture) > 1.0) {
    out.draws.clipped = true;
    out.warnings.push_back("mixture clipped at full scale after " + std::to_string(out.draws.level_attempts) +
                           " level draw(s)");
    for (auto& ch : out.mixture) {
      for (double& v : ch) v = std::clamp(v, -1.0, 1.0);
    }
  }
  out.targets = {std::move(targets[0]), std::move(targets[1])};
  return out;
}

Signal synthetic_source(std::size_t samples, double sample_rate, std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x73706368u};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  Signal out(samples, 0.0);
  std::size_t pos = 0;
  double phase = 0.0;
  while (pos < samples) {
    // a pause between words now and then
    if (uni(rng) < 0.25) pos += static_cast<std::size_t>((0.05 + 0.25 * uni(rng)) * sample_rate);
    const auto len = static_cast<std::size_t>((0.08 + 0.17 * uni(rng)) * sample_rate);
    const double f0 = 90.0 + 140.0 * uni(rng);
    const double glide = 1.0 + 0.2 * (uni(rng) - 0.5);
    const std::array<double, 3> formants{300.0 + 600.0 * uni(rng), 900.0 + 1600.0 * uni(rng),
                                         2500.0 + 1000.0 * uni(rng)};
    const double noise_mix = uni(rng) < 0.2 ? 1.0 : 0.05;  // occasional fricative
    // two-pole resonators in cascade
    std::array<double, 3> a1{}, a2{};
    for (std::size_t r = 0; r < 3; ++r) {
      const double radius = 0.97;
      a1[r] = 2.0 * radius * std::cos(2.0 * kPi * formants[r] / sample_rate);
      a2[r] = -radius * radius;
    }
    std::array<double, 3> y1{}, y2{};
    for (std::size_t i = 0; i < len && pos + i < samples; ++i) {
      const double frac = static_cast<double>(i) / static_cast<double>(len);
      const double f = f0 * (1.0 + (glide - 1.0) * frac);
      phase += f / sample_rate;
      double excitation = 0.0;
      if (phase >= 1.0) {
        phase -= std::floor(phase);
        excitation = 1.0;
      }
      double v = (1.0 - noise_mix) * excitation + noise_mix * 0.3 * normal(rng);
      for (std::size_t r = 0; r < 3; ++r) {
        const double y = v + a1[r] * y1[r] + a2[r] * y2[r];
        y2[r] = y1[r];
        y1[r] = y;
        v = y * (1.0 - 0.97);
      }
      const double envelope = std::sin(kPi * frac);
      out[pos + i] = envelope * v;
    }
    pos += len;
  }
  const double e = simd::kernels().dot(out.data(), out.data(), samples);
  if (e > 0.0) scale(out, std::sqrt(static_cast<double>(samples) / e));
  return out;
}

nlohmann::json to_json(const ScalarOrDraw& v) {
  if (v.draw) return {{"draw", true}, {"mean", v.mean}, {"std", v.stddev}};
  if (std::isinf(v.value)) return v.value > 0 ? "inf" : "-inf";
  return v.value;
}

ScalarOrDraw scalar_or_draw_from_json(const nlohmann::json& j, const ScalarOrDraw& fallback) {
  if (j.is_number()) return ScalarOrDraw::fixed(j.get<double>());
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "draw") return fallback.draw ? fallback : ScalarOrDraw::normal(fallback.mean, fallback.stddev);
    if (s == "inf") return ScalarOrDraw::fixed(std::numeric_limits<double>::infinity());
    fail(ErrorCode::Format, "expected a number, \"draw\", \"inf\" or {mean, std}; got \"" + s + "\"");
  }
  if (j.is_object()) {
    return ScalarOrDraw::normal(j.value("mean", fallback.mean), j.value("std", fallback.stddev));
  }
  fail(ErrorCode::Format, "expected a number, \"draw\", \"inf\" or {mean, std}");
}

nlohmann::json to_json(const RoomSpec& room) {
  return {{"dimensions_m", {room.dimensions.x(), room.dimensions.y(), room.dimensions.z()}},
          {"reflection_coefficient", room.reflection_coefficient},
          {"max_reflection_order", room.max_reflection_order},
          {"speed_of_sound", room.speed_of_sound}};
}

namespace {

Eigen::Vector3d vec3(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) fail(ErrorCode::Format, "expected a 3-element array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

RoomSpec room_from_json(const nlohmann::json& j) {
  RoomSpec r;
  r.dimensions = vec3(j.at("dimensions_m"));
  r.reflection_coefficient = j.value("reflection_coefficient", 0.0);
  if (j.contains("t60_s")) r.reflection_coefficient = reflection_for_t60(r.dimensions, j.at("t60_s").get<double>());
  r.max_reflection_order = j.value("max_reflection_order", 0);
  r.speed_of_sound = j.value("speed_of_sound", ArrayGeometry::kDefaultSpeedOfSound);
  r.validate();
  return r;
}

nlohmann::json to_json(const Doa& doa) {
  return {{"azimuth_deg", doa.azimuth_deg()}, {"elevation_deg", doa.elevation_deg()}};
}

Doa doa_from_json(const nlohmann::json& j) {
  return Doa::from_degrees(j.at("azimuth_deg").get<double>(), j.value("elevation_deg", 0.0));
}

nlohmann::json to_json(const SceneSpec& s) {
  return {{"room", to_json(s.room)},
          {"array", {{"position_m", {s.pose.position.x(), s.pose.position.y(), s.pose.position.z()}},
                     {"yaw_deg", rad2deg(s.pose.yaw)}}},
          {"sources_m",
           {{s.sources[0].x(), s.sources[0].y(), s.sources[0].z()}, {s.sources[1].x(), s.sources[1].y(), s.sources[1].z()}}},
          {"mixing_ratio_db", to_json(s.mixing_ratio_db)},
          {"snr_db", to_json(s.snr_db)},
          {"level_db", to_json(s.level_db)},
          {"seed", s.seed},
          {"sample_rate", s.sample_rate},
          {"duration_s", static_cast<double>(s.samples) / s.sample_rate},
          {"noise_waves", s.noise_waves},
          {"target_window_ms", s.target_window_ms}};
}

SceneSpec scene_spec_from_json(const nlohmann::json& j) {
  try {
    SceneSpec s;
    s.room = room_from_json(j.at("room"));
    if (j.contains("array")) {
      s.pose.position = vec3(j["array"].at("position_m"));
      s.pose.yaw = deg2rad(j["array"].value("yaw_deg", 0.0));
    }
    const auto& src = j.at("sources_m");
    if (src.size() != 2) fail(ErrorCode::Format, "sources_m must list two positions");
    s.sources = {vec3(src[0]), vec3(src[1])};
    if (j.contains("mixing_ratio_db")) s.mixing_ratio_db = scalar_or_draw_from_json(j["mixing_ratio_db"], default_mixing_ratio());
    if (j.contains("snr_db")) s.snr_db = scalar_or_draw_from_json(j["snr_db"], default_snr());
    if (j.contains("level_db")) s.level_db = scalar_or_draw_from_json(j["level_db"], default_level());
    s.seed = j.value("seed", std::uint64_t{0});
    s.sample_rate = j.value("sample_rate", 16000.0);
    s.samples = static_cast<std::size_t>(std::llround(j.value("duration_s", 30.0) * s.sample_rate));
    s.noise_waves = j.value("noise_waves", std::size_t{128});
    s.target_window_ms = j.value("target_window_ms", 200.0);
    return s;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Format, std::string("scene JSON: ") + e.what());
  }
}

}  // namespace farsep
