#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "farsep/array_geometry.hpp"
#include "farsep/types.hpp"

namespace farsep {

// Shoebox room with one frequency-independent reflection coefficient.
struct RoomSpec {
  Eigen::Vector3d dimensions{6.0, 5.0, 3.0};
  double reflection_coefficient = 0.0;
  int max_reflection_order = 0;
  double speed_of_sound = ArrayGeometry::kDefaultSpeedOfSound;

  void validate() const;
  bool contains(const Eigen::Vector3d& p) const;
};

// Sabine: reflection coefficient giving reverberation time t60 (s).
double reflection_for_t60(const Eigen::Vector3d& dimensions, double t60);

// Array placement: the geometry's local origin at position, rotated by yaw
// (radians) about +z.
struct ArrayPose {
  Eigen::Vector3d position{3.0, 2.5, 1.5};
  double yaw = 0.0;

  Coords mic_positions(const ArrayGeometry& geom) const;
  // Direct-path direction of a point, in the array's own frame.
  Doa doa_of(const Eigen::Vector3d& point) const;
};

struct Rir {
  std::vector<Signal> per_mic;
  double sample_rate = 16000.0;
  std::vector<double> direct_delay;  // fractional samples, per mic
};

inline constexpr int kSincTaps = 81;

// Image-source RIRs from src to every microphone: 1/(4 pi d) spreading,
// reflection_coefficient^order per image, fractional delays placed with an
// 81-tap Hann-windowed sinc. Taps before t = 0 are dropped.
Rir simulate_rir(const RoomSpec& room, const Eigen::Vector3d& src, const Coords& mics, double sample_rate);
Rir simulate_rir(const RoomSpec& room, const Eigen::Vector3d& src, const ArrayGeometry& geom, const ArrayPose& pose,
                 double sample_rate);

// Zeroes everything later than direct arrival + max_ms, with a raised-cosine
// fade of fade_ms ending at the cutoff.
Rir window_rir(const Rir& rir, double max_ms = 200.0, double fade_ms = 5.0);

// Diffuse (spherically isotropic) noise: independent white plane waves from
// num_waves directions spread evenly over the sphere (randomly rotated per
// seed), each reaching mic m with the far-field delay <r_m, u> / c. Each
// channel is normalised to unit power.
MultiSignal diffuse_noise(const Coords& mics, double speed_of_sound, std::size_t samples, double sample_rate,
                          std::uint64_t seed, std::size_t num_waves = 128);
MultiSignal diffuse_noise(const ArrayGeometry& geom, std::size_t samples, double sample_rate, std::uint64_t seed,
                          std::size_t num_waves = 128);

}  // namespace farsep
