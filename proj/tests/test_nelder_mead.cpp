#include <doctest.h>

#include <cmath>

#include "farsep/nelder_mead.hpp"

using namespace farsep;

TEST_CASE("quadratic bowl") {
  std::size_t calls = 0;
  auto f = [&](const std::vector<double>& x) {
    ++calls;
    return (x[0] - 3) * (x[0] - 3) + 4 * (x[1] + 1) * (x[1] + 1) + 0.5;
  };
  NelderMeadOptions o;
  o.simplex_tolerance = 1e-6;
  o.initial_step = {1.0, 1.0};
  o.max_evaluations = 1000;
  const auto r = nelder_mead(f, {0.0, 0.0}, o);
  CHECK(r.converged);
  CHECK(r.x[0] == doctest::Approx(3.0).epsilon(1e-4));
  CHECK(r.x[1] == doctest::Approx(-1.0).epsilon(1e-4));
  CHECK(r.value == doctest::Approx(0.5));
  CHECK(r.evaluations == calls);
}

TEST_CASE("rosenbrock") {
  auto f = [](const std::vector<double>& x) {
    return 100 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1 - x[0], 2);
  };
  NelderMeadOptions o;
  o.simplex_tolerance = 1e-8;
  o.initial_step = {0.5, 0.5};
  o.max_evaluations = 5000;
  const auto r = nelder_mead(f, {-1.2, 1.0}, o);
  CHECK(r.converged);
  CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(r.x[1] == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("budget is a hard cap and the result never exceeds the start") {
  for (std::size_t budget : {5u, 12u, 40u, 77u}) {
    std::size_t calls = 0;
    auto f = [&](const std::vector<double>& x) {
      ++calls;
      double s = 0;
      for (double v : x) s += std::cos(3 * v) + v * v;
      return s;
    };
    NelderMeadOptions o;
    o.max_evaluations = budget;
    o.simplex_tolerance = 0.0;
    o.initial_step = {0.3, 0.3, 0.3, 0.3};
    const std::vector<double> x0 = {1.0, -0.5, 2.0, 0.2};
    const auto r = nelder_mead(f, x0, o);
    CHECK(calls <= budget);
    CHECK(r.evaluations == calls);
    CHECK_FALSE(r.converged);
    CHECK(r.value <= f(x0));
  }
}

TEST_CASE("non-finite values are never preferred") {
  auto f = [](const std::vector<double>& x) {
    if (x[0] < 0) return std::numeric_limits<double>::infinity();
    return (x[0] - 0.5) * (x[0] - 0.5);
  };
  NelderMeadOptions o;
  o.initial_step = {1.0};
  o.simplex_tolerance = 1e-6;
  const auto r = nelder_mead(f, {0.2}, o);
  CHECK(std::isfinite(r.value));
  CHECK(r.x[0] == doctest::Approx(0.5).epsilon(1e-3));
}
