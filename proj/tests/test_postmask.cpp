#include <doctest.h>

#include "farsep/postmask.hpp"
#include "oracles.hpp"

using namespace farsep;

namespace {

StftSpec spec8() {
  StftSpec s;
  s.frame_len = 8;
  s.hop = 4;
  s.fft_size = 8;
  return s;
}

Spectrogram random_spect(std::mt19937_64& rng) {
  Spectrogram s(6, 5, 1, spec8());
  for (auto& v : s.data()) v = oracle::random_complex(1, rng)[0];
  return s;
}

}  // namespace

TEST_CASE("equal magnitudes give one half") {
  std::mt19937_64 rng(1);
  auto a = random_spect(rng);
  auto b = a;
  for (auto& v : b.data()) v *= std::polar(1.0, 1.234);
  const auto m = ratio_mask({a, b}, {2.0, 0.0});
  for (std::size_t i = 0; i < m.first.size(); ++i) {
    CHECK(m.first[i] == doctest::Approx(0.5));
    CHECK(m.second[i] == doctest::Approx(0.5));
  }
}

TEST_CASE("a silent second output takes everything") {
  std::mt19937_64 rng(2);
  const auto a = random_spect(rng);
  Spectrogram b(6, 5, 1, spec8());
  const auto m = ratio_mask({a, b}, {2.0, 0.0});
  for (std::size_t i = 0; i < m.first.size(); ++i) {
    CHECK(m.first[i] == doctest::Approx(1.0));
    CHECK(m.second[i] == 0.0);
  }
}

TEST_CASE("masks follow the ratio formula") {
  std::mt19937_64 rng(3);
  const auto a = random_spect(rng);
  const auto b = random_spect(rng);
  for (double p : {1.0, 2.0, 3.5})
    for (double floor : {0.0, 0.05, 0.3}) {
      const auto m = ratio_mask({a, b}, {p, floor});
      REQUIRE(m.frames == 6);
      REQUIRE(m.bins == 5);
      for (std::size_t i = 0; i < m.first.size(); ++i) {
        const double x = std::pow(std::abs(a.data()[i]), p), y = std::pow(std::abs(b.data()[i]), p);
        CHECK(m.first[i] == doctest::Approx(std::max(floor, x / (x + y))).epsilon(1e-12));
        CHECK(m.second[i] == doctest::Approx(std::max(floor, y / (x + y))).epsilon(1e-12));
        CHECK(m.first[i] >= floor);
        CHECK(m.first[i] <= 1.0);
        if (floor == 0.0) CHECK(m.first[i] + m.second[i] == doctest::Approx(1.0));
      }
    }
}

TEST_CASE("swapping the inputs swaps the masks") {
  std::mt19937_64 rng(4);
  const auto a = random_spect(rng);
  const auto b = random_spect(rng);
  const auto m = ratio_mask({a, b});
  const auto n = ratio_mask({b, a});
  CHECK(m.first == n.second);
  CHECK(m.second == n.first);
}

TEST_CASE("masking never raises a magnitude") {
  std::mt19937_64 rng(5);
  const SpectrogramPair in{random_spect(rng), random_spect(rng)};
  const auto m = ratio_mask(in);
  const auto out = apply_masks(m, in);
  for (std::size_t i = 0; i < in.first.data().size(); ++i) {
    CHECK(std::abs(out.first.data()[i]) <= std::abs(in.first.data()[i]));
    CHECK(std::abs(out.second.data()[i]) <= std::abs(in.second.data()[i]));
    CHECK(out.first.data()[i] == m.first[i] * in.first.data()[i]);
  }
}
