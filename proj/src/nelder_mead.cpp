#include "farsep/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "farsep/error.hpp"

namespace farsep {

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             std::vector<double> x0, const NelderMeadOptions& options) {
  const std::size_t n = x0.size();
  if (n == 0) fail(ErrorCode::InvalidArgument, "nelder_mead: empty parameter vector");
  if (options.initial_step.size() != n) fail(ErrorCode::InvalidArgument, "nelder_mead: initial_step size");

  NelderMeadResult result;
  auto eval = [&](const std::vector<double>& x) {
    ++result.evaluations;
    const double v = f(x);
    return std::isnan(v) ? INFINITY : v;
  };

  std::vector<std::vector<double>> pts(n + 1, x0);
  std::vector<double> vals(n + 1);
  vals[0] = eval(x0);
  for (std::size_t i = 0; i < n; ++i) {
    pts[i + 1][i] += options.initial_step[i];
    vals[i + 1] = eval(pts[i + 1]);
  }

  std::vector<std::size_t> order(n + 1);
  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    std::vector<std::vector<double>> p2(n + 1);
    std::vector<double> v2(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
      p2[i] = std::move(pts[order[i]]);
      v2[i] = vals[order[i]];
    }
    pts.swap(p2);
    vals.swap(v2);
  };
  auto converged = [&] {
    double size = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
      for (std::size_t d = 0; d < n; ++d) size = std::max(size, std::abs(pts[i][d] - pts[0][d]));
    }
    return size <= options.simplex_tolerance || vals[n] - vals[0] <= options.value_tolerance;
  };
  auto along = [&](const std::vector<double>& c, const std::vector<double>& p, double t) {
    std::vector<double> out(n);
    for (std::size_t d = 0; d < n; ++d) out[d] = c[d] + t * (p[d] - c[d]);
    return out;
  };

  sort_simplex();
  while (!converged()) {
    // an iteration costs at most n + 2 evaluations (reflection, contraction, shrink)
    if (result.evaluations + n + 2 > options.max_evaluations) break;
    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t d = 0; d < n; ++d) centroid[d] += pts[i][d];
    }
    for (double& c : centroid) c /= static_cast<double>(n);

    const auto xr = along(centroid, pts[n], -1.0);
    const double fr = eval(xr);
    if (fr < vals[0]) {
      const auto xe = along(centroid, pts[n], -2.0);
      const double fe = eval(xe);
      if (fe < fr) {
        pts[n] = xe;
        vals[n] = fe;
      } else {
        pts[n] = xr;
        vals[n] = fr;
      }
    } else if (fr < vals[n - 1]) {
      pts[n] = xr;
      vals[n] = fr;
    } else {
      const bool outside = fr < vals[n];
      const auto xc = outside ? along(centroid, pts[n], -0.5) : along(centroid, pts[n], 0.5);
      const double fc = eval(xc);
      if (fc < (outside ? fr : vals[n])) {
        pts[n] = xc;
        vals[n] = fc;
      } else {
        for (std::size_t i = 1; i <= n; ++i) {
          pts[i] = along(pts[0], pts[i], 0.5);
          vals[i] = eval(pts[i]);
        }
      }
    }
    sort_simplex();
  }

  result.converged = converged();
  result.x = pts[0];
  result.value = vals[0];
  return result;
}

}  // namespace farsep
