#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace farsep {

struct NelderMeadOptions {
  std::size_t max_evaluations = 400;
  // Converged once every vertex lies within this distance (max-norm) of the best.
  double simplex_tolerance = 0.05;
  // Converged once the objective spread across the simplex is at most this.
  double value_tolerance = 0.0;
  // Per-coordinate offsets of the initial simplex from x0.
  std::vector<double> initial_step;
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  std::size_t evaluations = 0;
  bool converged = false;
};

// Standard Nelder-Mead (reflection 1, expansion 2, contraction 1/2, shrink
// 1/2). The returned point is the best vertex seen, so value <= f(x0).
NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             std::vector<double> x0, const NelderMeadOptions& options);

}  // namespace farsep
