#include <doctest.h>

#include "farsep/error.hpp"
#include "farsep/room_sim.hpp"
#include "oracles.hpp"
#include "welch.hpp"

using namespace farsep;

namespace {

Coords one_mic(const Eigen::Vector3d& p) {
  Coords c(1, 3);
  c.row(0) = p.transpose();
  return c;
}

double energy(const Signal& h) {
  double e = 0.0;
  for (double v : h) e += v * v;
  return e;
}

// Hann-windowed sinc pulse of the given amplitude centred at delay.
void add_pulse(std::vector<double>& h, double delay, double amp) {
  for (std::size_t n = 0; n < h.size(); ++n) {
    const double t = static_cast<double>(n) - delay;
    if (std::floor(delay) - static_cast<double>(n) > 40.0 || static_cast<double>(n) - std::floor(delay) > 40.0) continue;
    const double sinc = t == 0.0 ? 1.0 : std::sin(oracle::pi * t) / (oracle::pi * t);
    h[n] += amp * sinc * 0.5 * (1.0 + std::cos(oracle::pi * t / 41.0));
  }
}

}  // namespace

TEST_CASE("direct path at three metres") {
  RoomSpec room;
  room.dimensions = {10, 8, 4};
  const Eigen::Vector3d src(2, 4, 2), mic(5, 4, 2);
  const Rir r = simulate_rir(room, src, one_mic(mic), 16000.0);
  REQUIRE(r.per_mic.size() == 1);
  CHECK(r.direct_delay[0] == doctest::Approx(139.94).epsilon(1e-4));
  const auto& h = r.per_mic[0];
  const auto peak = std::max_element(h.begin(), h.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
  CHECK(peak - h.begin() == 140);
  double dc = 0.0;
  for (double v : h) dc += v;
  CHECK(dc == doctest::Approx(1.0 / (4.0 * oracle::pi * 3.0)).epsilon(2e-3));
  CHECK(1.0 / (4.0 * oracle::pi * 3.0) == doctest::Approx(0.02653).epsilon(1e-3));
}

TEST_CASE("first order is the direct path plus six wall images") {
  RoomSpec room;
  room.dimensions = {7, 6, 3.5};
  room.reflection_coefficient = 0.8;
  room.max_reflection_order = 1;
  const Eigen::Vector3d s(2.1, 1.7, 1.3), m(4.6, 3.9, 1.9);
  const Rir r = simulate_rir(room, s, one_mic(m), 16000.0);

  std::vector<Eigen::Vector3d> images = {s};
  for (int d = 0; d < 3; ++d) {
    Eigen::Vector3d lo = s, hi = s;
    lo[d] = -s[d];
    hi[d] = 2 * room.dimensions[d] - s[d];
    images.push_back(lo);
    images.push_back(hi);
  }
  REQUIRE(images.size() == 7);
  std::vector<double> want(r.per_mic[0].size(), 0.0);
  for (std::size_t i = 0; i < images.size(); ++i) {
    const double d = (images[i] - m).norm();
    add_pulse(want, d * 16000.0 / 343.0, (i == 0 ? 1.0 : 0.8) / (4 * oracle::pi * d));
  }
  for (std::size_t n = 0; n < want.size(); ++n) CHECK(std::abs(r.per_mic[0][n] - want[n]) < 1e-12);
}

TEST_CASE("energy grows with reflection order") {
  RoomSpec room;
  room.reflection_coefficient = 0.7;
  const Eigen::Vector3d s(1.5, 2.0, 1.2), m(4.0, 3.1, 1.6);
  double prev = 0.0;
  for (int order = 0; order <= 4; ++order) {
    room.max_reflection_order = order;
    const double e = energy(simulate_rir(room, s, one_mic(m), 16000.0).per_mic[0]);
    CHECK(e >= prev);
    prev = e;
  }
}

TEST_CASE("Sabine reflection coefficient") {
  const Eigen::Vector3d d(6, 5, 3);
  for (double t60 : {0.2, 0.3, 0.6, 1.0}) {
    const double beta = reflection_for_t60(d, t60);
    const double v = 90.0, surf = 2 * (30 + 18 + 15);
    CHECK(0.161 * v / (surf * (1 - beta * beta)) == doctest::Approx(t60));
  }
  CHECK_THROWS_AS(reflection_for_t60(d, 0.0), Error);
}

TEST_CASE("placement errors") {
  RoomSpec room;
  CHECK_THROWS_AS(simulate_rir(room, {7, 1, 1}, one_mic({1, 1, 1}), 16000.0), Error);
  try {
    simulate_rir(room, {1, 1, 1}, one_mic({1, 1, 1}), 16000.0);
    FAIL("expected SingularDistance");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SingularDistance);
  }
  room.reflection_coefficient = 1.0;
  CHECK_THROWS_AS(room.validate(), Error);
}

TEST_CASE("pose maps array directions") {
  const auto g = ArrayGeometry::default_circular();
  ArrayPose pose;
  pose.yaw = deg2rad(30);
  const auto mics = pose.mic_positions(g);
  CHECK((mics.row(0).transpose() - pose.position).norm() < 1e-15);
  const Eigen::Vector3d p = pose.position + Eigen::Vector3d(0, 2, 0);  // world +y
  CHECK(pose.doa_of(p).azimuth_deg() == doctest::Approx(60));
}

TEST_CASE("window keeps 200 ms after the direct path") {
  RoomSpec room;
  room.reflection_coefficient = 0.9;
  room.max_reflection_order = 30;
  const Rir r = simulate_rir(room, {1.5, 2, 1.2}, one_mic({4, 3, 1.6}), 16000.0);
  const Rir w = window_rir(r);
  const auto cutoff = static_cast<std::size_t>(std::ceil(r.direct_delay[0] + 3200));
  CHECK(r.per_mic[0].size() > cutoff);
  for (std::size_t n = cutoff; n < w.per_mic[0].size(); ++n) CHECK(w.per_mic[0][n] == 0.0);
  const auto fade_start = static_cast<std::size_t>(r.direct_delay[0] + 3200 - 80) - 1;
  REQUIRE(w.per_mic[0].size() == r.per_mic[0].size());
  for (std::size_t n = 0; n < std::min(fade_start, r.per_mic[0].size()); ++n) CHECK(w.per_mic[0][n] == r.per_mic[0][n]);
}

TEST_CASE("diffuse noise is unit power and deterministic") {
  const auto g = ArrayGeometry::default_circular();
  const auto a = diffuse_noise(g, 8000, 16000.0, 5);
  const auto b = diffuse_noise(g, 8000, 16000.0, 5);
  const auto c = diffuse_noise(g, 8000, 16000.0, 6);
  REQUIRE(a.size() == 7);
  CHECK(a == b);
  CHECK(a != c);
  for (const auto& ch : a) CHECK(energy(ch) / 8000.0 == doctest::Approx(1.0).epsilon(1e-12));

  Coords single(1, 3);
  single << 0, 0, 0;
  const auto s = diffuse_noise(single, 343.0, 4000, 16000.0, 1);
  CHECK(energy(s[0]) / 4000.0 == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("diffuse noise coherence follows sinc") {
  const auto g = ArrayGeometry::default_circular();
  const auto n = diffuse_noise(g, 16000 * 10, 16000.0, 11);
  const auto coh = oracle::welch_coherence(n[1], n[4], 512);  // 8 cm apart
  double worst = 0.0;
  for (std::size_t f = 1; f <= 128; ++f) {
    const double x = 2 * oracle::pi * f * 31.25 * 0.08 / 343.0;
    worst = std::max(worst, std::abs(coh[f] - std::sin(x) / x));
  }
  // ~600 Welch segments leave a few hundredths of estimator spread
  CHECK(worst < 0.12);
}
