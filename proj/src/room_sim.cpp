#include "farsep/room_sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Geometry>

#include "farsep/error.hpp"
#include "farsep/fft.hpp"
#include "farsep/simd/kernels.hpp"

namespace farsep {

void RoomSpec::validate() const {
  if (!(dimensions.minCoeff() > 0.0)) fail(ErrorCode::InvalidArgument, "room dimensions must be positive");
  if (!(reflection_coefficient >= 0.0 && reflection_coefficient < 1.0)) {
    fail(ErrorCode::InvalidArgument, "reflection coefficient must lie in [0, 1)");
  }
  if (max_reflection_order < 0) fail(ErrorCode::InvalidArgument, "max reflection order must be >= 0");
  if (!(speed_of_sound > 0.0)) fail(ErrorCode::InvalidArgument, "speed of sound must be positive");
}

bool RoomSpec::contains(const Eigen::Vector3d& p) const {
  return (p.array() > 0.0).all() && (p.array() < dimensions.array()).all();
}

double reflection_for_t60(const Eigen::Vector3d& d, double t60) {
  if (!(t60 > 0.0)) fail(ErrorCode::InvalidArgument, "T60 must be positive");
  const double volume = d.prod();
  const double surface = 2.0 * (d.x() * d.y() + d.x() * d.z() + d.y() * d.z());
  const double absorption = std::min(1.0, 0.161 * volume / (surface * t60));
  return std::sqrt(1.0 - absorption);
}

Coords ArrayPose::mic_positions(const ArrayGeometry& geom) const {
  const Eigen::Matrix3d rot = Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  Coords out(geom.coords().rows(), 3);
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    out.row(i) = (position + rot * geom.coords().row(i).transpose()).transpose();
  }
  return out;
}

Doa ArrayPose::doa_of(const Eigen::Vector3d& point) const {
  const Eigen::Matrix3d rot = Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  return doa_from_vector(rot.transpose() * (point - position));
}

namespace {

struct Image {
  Eigen::Vector3d position;
  int order;
};

std::vector<Image> image_sources(const RoomSpec& room, const Eigen::Vector3d& src) {
  const int n = room.max_reflection_order;
  // per axis: (coordinate, reflections) for every (u, l) with |l - u| + |l| <= n
  std::array<std::vector<std::pair<double, int>>, 3> axis;
  for (int d = 0; d < 3; ++d) {
    for (int l = -n; l <= n; ++l) {
      for (int u = 0; u <= 1; ++u) {
        const int refl = std::abs(l - u) + std::abs(l);
        if (refl > n) continue;
        axis[d].emplace_back((1 - 2 * u) * src[d] + 2.0 * l * room.dimensions[d], refl);
      }
    }
  }
  std::vector<Image> images;
  for (const auto& [x, ox] : axis[0]) {
    for (const auto& [y, oy] : axis[1]) {
      if (ox + oy > n) continue;
      for (const auto& [z, oz] : axis[2]) {
        if (ox + oy + oz > n) continue;
        images.push_back({{x, y, z}, ox + oy + oz});
      }
    }
  }
  return images;
}

}  // namespace

Rir simulate_rir(const RoomSpec& room, const Eigen::Vector3d& src, const Coords& mics, double sample_rate) {
  room.validate();
  if (!room.contains(src)) fail(ErrorCode::InvalidArgument, "source lies outside the room");
  for (Eigen::Index m = 0; m < mics.rows(); ++m) {
    if (!room.contains(mics.row(m).transpose())) fail(ErrorCode::InvalidArgument, "microphone lies outside the room");
    if ((mics.row(m).transpose() - src).norm() < 1e-6) {
      fail(ErrorCode::SingularDistance, "source coincides with microphone " + std::to_string(m));
    }
  }
  const auto images = image_sources(room, src);
  const double beta = room.reflection_coefficient;
  constexpr int half = kSincTaps / 2;
  const double samples_per_metre = sample_rate / room.speed_of_sound;

  Rir rir;
  rir.sample_rate = sample_rate;
  rir.per_mic.resize(static_cast<std::size_t>(mics.rows()));
  rir.direct_delay.resize(static_cast<std::size_t>(mics.rows()));
  for (Eigen::Index m = 0; m < mics.rows(); ++m) {
    const Eigen::Vector3d r = mics.row(m).transpose();
    std::vector<std::pair<double, double>> arrivals;  // (delay in samples, amplitude)
    arrivals.reserve(images.size());
    double max_delay = 0.0;
    for (const auto& img : images) {
      const double amp = img.order == 0 ? 1.0 : std::pow(beta, img.order);
      if (amp == 0.0) continue;
      const double d = (img.position - r).norm();
      const double delay = d * samples_per_metre;
      arrivals.emplace_back(delay, amp / (4.0 * kPi * d));
      max_delay = std::max(max_delay, delay);
    }
    rir.direct_delay[static_cast<std::size_t>(m)] = (src - r).norm() * samples_per_metre;
    auto& h = rir.per_mic[static_cast<std::size_t>(m)];
    h.assign(static_cast<std::size_t>(std::floor(max_delay)) + half + 1, 0.0);
    for (const auto& [delay, amp] : arrivals) {
      const auto centre = static_cast<long>(std::floor(delay));
      // sin(pi (n - delay)) = -(-1)^n sin(pi delay)
      const double s = std::sin(kPi * delay);
      for (long n = centre - half; n <= centre + half; ++n) {
        if (n < 0) continue;
        const double t = static_cast<double>(n) - delay;
        double sinc;
        if (std::abs(t) < 1e-12) {
          sinc = 1.0;
        } else {
          const double sign = (n % 2 == 0) ? -1.0 : 1.0;
          sinc = sign * s / (kPi * t);
        }
        const double window = 0.5 * (1.0 + std::cos(kPi * t / (half + 1)));
        h[static_cast<std::size_t>(n)] += amp * sinc * window;
      }
    }
  }
  return rir;
}

Rir simulate_rir(const RoomSpec& room, const Eigen::Vector3d& src, const ArrayGeometry& geom, const ArrayPose& pose,
                 double sample_rate) {
  return simulate_rir(room, src, pose.mic_positions(geom), sample_rate);
}

Rir window_rir(const Rir& rir, double max_ms, double fade_ms) {
  Rir out = rir;
  const double fade_len = fade_ms * 1e-3 * rir.sample_rate;
  for (std::size_t m = 0; m < out.per_mic.size(); ++m) {
    auto& h = out.per_mic[m];
    const double cutoff = rir.direct_delay[m] + max_ms * 1e-3 * rir.sample_rate;
    const double fade_start = cutoff - fade_len;
    for (std::size_t n = 0; n < h.size(); ++n) {
      const double t = static_cast<double>(n);
      if (t >= cutoff) {
        h[n] = 0.0;
      } else if (t > fade_start && fade_len > 0.0) {
        h[n] *= 0.5 * (1.0 + std::cos(kPi * (t - fade_start) / fade_len));
      }
    }
  }
  return out;
}

namespace {

std::vector<Eigen::Vector3d> sphere_directions(std::size_t count, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  // uniformly random rotation (Shoemake)
  const double u1 = uni(rng), u2 = uni(rng), u3 = uni(rng);
  const Eigen::Quaterniond q(std::sqrt(u1) * std::cos(2 * kPi * u3), std::sqrt(1 - u1) * std::sin(2 * kPi * u2),
                             std::sqrt(1 - u1) * std::cos(2 * kPi * u2), std::sqrt(u1) * std::sin(2 * kPi * u3));
  const Eigen::Matrix3d rot = q.normalized().toRotationMatrix();
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  std::vector<Eigen::Vector3d> dirs(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double z = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(count);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * static_cast<double>(i);
    dirs[i] = rot * Eigen::Vector3d(r * std::cos(phi), r * std::sin(phi), z);
  }
  return dirs;
}

}  // namespace

MultiSignal diffuse_noise(const Coords& mics, double speed_of_sound, std::size_t samples, double sample_rate,
                          std::uint64_t seed, std::size_t num_waves) {
  if (samples == 0) fail(ErrorCode::InvalidArgument, "noise duration must be positive");
  if (num_waves == 0) fail(ErrorCode::InvalidArgument, "need at least one plane wave");
  const auto nm = static_cast<std::size_t>(mics.rows());
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x6e6f6973u};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto dirs = sphere_directions(num_waves, rng);

  const std::size_t n = fast_fft_size(samples);
  RealFft fft(n);
  const std::size_t bins = fft.bins();
  std::vector<std::vector<cplx>> spectra(nm, std::vector<cplx>(bins));
  std::vector<cplx> wave(bins), phasor(bins);
  const auto& kern = simd::kernels();
  constexpr std::size_t kBlock = 256;
  for (const auto& u : dirs) {
    for (auto& v : wave) v = cplx(normal(rng), normal(rng));
    wave[0] = wave[0].real();
    if (n % 2 == 0) wave[bins - 1] = wave[bins - 1].real();
    for (std::size_t m = 0; m < nm; ++m) {
      // arrival lead of mic m, in samples
      const double lead = mics.row(static_cast<Eigen::Index>(m)).dot(u) / speed_of_sound * sample_rate;
      const double step_phase = 2.0 * kPi * lead / static_cast<double>(n);
      if (step_phase == 0.0) {
        for (std::size_t f = 0; f < bins; ++f) spectra[m][f] += wave[f];
        continue;
      }
      const cplx step = std::polar(1.0, step_phase);
      for (std::size_t f0 = 0; f0 < bins; f0 += kBlock) {
        cplx p = std::polar(1.0, step_phase * static_cast<double>(f0));
        const std::size_t end = std::min(bins, f0 + kBlock);
        for (std::size_t f = f0; f < end; ++f) {
          phasor[f] = p;
          p *= step;
        }
      }
      kern.cmac(spectra[m].data(), wave.data(), phasor.data(), bins);
    }
  }

  MultiSignal out(nm, Signal(samples));
  std::vector<double> buf(n);
  for (std::size_t m = 0; m < nm; ++m) {
    fft.inverse(spectra[m], buf);
    std::copy_n(buf.begin(), samples, out[m].begin());
    const double power = kern.dot(out[m].data(), out[m].data(), samples) / static_cast<double>(samples);
    const double g = power > 0.0 ? 1.0 / std::sqrt(power) : 0.0;
    for (double& v : out[m]) v *= g;
  }
  return out;
}

MultiSignal diffuse_noise(const ArrayGeometry& geom, std::size_t samples, double sample_rate, std::uint64_t seed,
                          std::size_t num_waves) {
  return diffuse_noise(geom.coords(), geom.speed_of_sound(), samples, sample_rate, seed, num_waves);
}

}  // namespace farsep
