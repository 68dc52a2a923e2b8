#include <doctest.h>

#include "farsep/doa.hpp"
#include "farsep/error.hpp"
#include "oracles.hpp"

using namespace farsep;

namespace {

struct PlaneWaveMix {
  Spectrogram mixture;
  SpectrogramPair sources;
};

// Y(k, f, m) = a1(f, m) X1(k, f) + a2(f, m) X2(k, f) with random source spectra.
PlaneWaveMix plane_wave_mix(const ArrayGeometry& g, const Doa& d1, const Doa& d2, std::size_t frames, std::uint64_t seed) {
  const StftSpec s;
  std::mt19937_64 rng(seed);
  PlaneWaveMix p{Spectrogram(frames, s.num_bins(), g.num_mics(), s),
                 {Spectrogram(frames, s.num_bins(), 1, s), Spectrogram(frames, s.num_bins(), 1, s)}};
  for (auto* x : {&p.sources.first, &p.sources.second})
    for (auto& v : x->data()) v = oracle::random_complex(1, rng)[0];
  const auto a1 = steering_vector(g, d1, s), a2 = steering_vector(g, d2, s);
  for (std::size_t m = 0; m < g.num_mics(); ++m)
    for (std::size_t k = 0; k < frames; ++k)
      for (std::size_t f = 0; f < s.num_bins(); ++f) {
        const auto fi = static_cast<Eigen::Index>(f), mi = static_cast<Eigen::Index>(m);
        p.mixture(k, f, m) = a1.values(fi, mi) * p.sources.first(k, f, 0) + a2.values(fi, mi) * p.sources.second(k, f, 0);
      }
  return p;
}

}  // namespace

TEST_CASE("grid layout") {
  DoaGrid g;
  CHECK(g.azimuth_count() == 72);
  CHECK(g.elevation_count() == 1);
  const auto pts = g.points();
  REQUIRE(pts.size() == 72);
  CHECK(pts[0].azimuth_deg() == doctest::Approx(-180));
  CHECK(pts[71].azimuth_deg() == doctest::Approx(175));
  g.elevation_min_deg = -10;
  g.elevation_max_deg = 30;
  g.elevation_step_deg = 10;
  CHECK(g.elevation_count() == 5);
  CHECK(g.points().size() == 360);
  g.elevation_max_deg = 95;
  CHECK_THROWS_AS(g.validate(), Error);
}

TEST_CASE("canonical pair order") {
  const auto p = DoaPair::canonical(Doa::from_degrees(50, 0), Doa::from_degrees(-20, 10));
  CHECK(p.first.azimuth_deg() == doctest::Approx(-20));
  CHECK(p.second.azimuth_deg() == doctest::Approx(50));
  const auto q = DoaPair::canonical(Doa::from_degrees(190, 0), Doa::from_degrees(0, 0));
  CHECK(q.first.azimuth_deg() == doctest::Approx(-170));
}

TEST_CASE("SRP-PHAT finds two plane waves") {
  const auto g = ArrayGeometry::default_circular();
  const auto mix = plane_wave_mix(g, Doa::from_degrees(40, 0), Doa::from_degrees(-75, 0), 30, 1);
  const auto init = srp_init(mix.mixture, g);
  CHECK(init.first.azimuth_deg() == doctest::Approx(-75));
  CHECK(init.second.azimuth_deg() == doctest::Approx(40));

  const auto map = srp_phat(mix.mixture, g, DoaGrid{});
  for (std::size_t i = 1; i < map.size(); ++i) CHECK(map[i - 1].score >= map[i].score);
  const auto peaks = srp_peaks(map, DoaGrid{});
  REQUIRE(peaks.size() >= 2);
}

TEST_CASE("peaks wrap around in azimuth") {
  DoaGrid g;
  g.azimuth_step_deg = 90;  // -180, -90, 0, 90
  std::vector<ScoredDoa> map;
  const double scores[] = {5.0, 1.0, 3.0, 2.0};
  for (std::size_t i = 0; i < 4; ++i) map.push_back({g.points()[i], scores[i]});
  const auto peaks = srp_peaks(map, g);
  REQUIRE(peaks.size() == 2);
  CHECK(peaks[0].doa.azimuth_deg() == doctest::Approx(-180));
  CHECK(peaks[1].doa.azimuth_deg() == doctest::Approx(0));
}

TEST_CASE("silence has no peaks") {
  const auto g = ArrayGeometry::default_circular();
  Spectrogram z(5, 257, 7, StftSpec{});
  try {
    srp_init(z, g);
    FAIL("expected NoSignal");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoSignal);
  }
}

TEST_CASE("oracle directions recover plane-wave sources") {
  const auto g = ArrayGeometry::default_circular();
  const Doa d1 = Doa::from_degrees(10, 0), d2 = Doa::from_degrees(100, 0);
  const auto mix = plane_wave_mix(g, d1, d2, 8, 2);
  const auto out = separate_tf(mix.mixture, {d1, d2}, g, diffuse_coherence(g, StftSpec{}));
  for (std::size_t k = 0; k < 8; ++k)
    for (std::size_t f = 1; f < 257; ++f) {
      CHECK(std::abs(out.first(k, f, 0) - mix.sources.first(k, f, 0)) < 1e-6);
      CHECK(std::abs(out.second(k, f, 0) - mix.sources.second(k, f, 0)) < 1e-6);
    }
  CHECK_THROWS_AS(separate_tf(mix.mixture, {d1, d1}, g, diffuse_coherence(g, StftSpec{})), Error);

  SeparationOptions masked;
  masked.postmask = PostmaskParams{};
  const auto m = separate_tf(mix.mixture, {d1, d2}, g, diffuse_coherence(g, StftSpec{}), masked);
  for (std::size_t i = 0; i < m.first.data().size(); ++i)
    CHECK(std::abs(m.first.data()[i]) <= std::abs(out.first.data()[i]) + 1e-15);
}

TEST_CASE("time-domain chain keeps the input length") {
  const auto g = ArrayGeometry::default_circular();
  std::mt19937_64 rng(3);
  MultiSignal x(7);
  for (auto& ch : x) ch = oracle::random_signal(5000, rng);
  const auto y = separate(x, {Doa::from_degrees(0, 0), Doa::from_degrees(90, 0)}, g, StftSpec{});
  CHECK(y.first.size() == 5000);
  CHECK(y.second.size() == 5000);
  MultiSignal wrong(3, Signal(5000, 0.0));
  CHECK_THROWS_AS(separate(wrong, {Doa::from_degrees(0, 0), Doa::from_degrees(90, 0)}, g, StftSpec{}), Error);
}

TEST_CASE("loss-driven fit returns to the true directions") {
  const auto g = ArrayGeometry::default_circular();
  const Doa d1 = Doa::from_degrees(-30, 0), d2 = Doa::from_degrees(55, 0);
  const auto mix = plane_wave_mix(g, d1, d2, 20, 4);
  const DoaObjective obj(mix.mixture, mix.sources, LossSpec{}, g);
  const double at_truth = obj({d1, d2});
  CHECK(at_truth < obj({Doa::from_degrees(-27, 0), d2}));
  CHECK(obj({d1, d1}) == std::numeric_limits<double>::infinity());

  const DoaPair init{Doa::from_degrees(-35, 0), Doa::from_degrees(60, 0)};
  const auto fit = doa_fit(mix.mixture, mix.sources, LossSpec{}, init, g);
  CHECK(fit.loss <= fit.initial_loss);
  CHECK(fit.evaluations <= 400);
  CHECK(std::abs(fit.doas.first.azimuth_deg() - -30) < 0.5);
  CHECK(std::abs(fit.doas.second.azimuth_deg() - 55) < 0.5);
}
