// Straight-line reference implementations used as test oracles. Nothing here
// shares code with the library.
#pragma once

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using cplx = std::complex<double>;
inline constexpr double pi = 3.14159265358979323846;

// X[f] = sum_n x[n] e^{-j 2 pi f n / N}, f = 0..N/2, x zero-padded to N.
inline std::vector<cplx> dft(const std::vector<double>& x, std::size_t n) {
  std::vector<cplx> out(n / 2 + 1);
  for (std::size_t f = 0; f < out.size(); ++f) {
    cplx acc = 0.0;
    for (std::size_t t = 0; t < x.size() && t < n; ++t) {
      const double ph = -2.0 * pi * static_cast<double>((f * t) % n) / static_cast<double>(n);
      acc += x[t] * cplx(std::cos(ph), std::sin(ph));
    }
    out[f] = acc;
  }
  return out;
}

inline double hann(std::size_t i, std::size_t n) {
  return 0.5 - 0.5 * std::cos(2.0 * pi * static_cast<double>(i) / static_cast<double>(n));
}

// argmin w^H G w subject to A^H w = g, via the dense KKT system
// [G A; A^H 0] [w; l] = [0; g].
inline Eigen::VectorXcd constrained_min(const Eigen::MatrixXcd& G, const Eigen::MatrixXcd& A, const Eigen::VectorXcd& g) {
  const Eigen::Index m = G.rows(), c = A.cols();
  Eigen::MatrixXcd K = Eigen::MatrixXcd::Zero(m + c, m + c);
  K.topLeftCorner(m, m) = G;
  K.topRightCorner(m, c) = A;
  K.bottomLeftCorner(c, m) = A.adjoint();
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(m + c);
  rhs.tail(c) = g;
  return K.fullPivLu().solve(rhs).head(m);
}

inline Eigen::MatrixXcd random_hpd(Eigen::Index m, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Eigen::MatrixXcd B(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) B(i, j) = cplx(n(rng), n(rng));
  return B * B.adjoint() + 0.1 * Eigen::MatrixXcd::Identity(m, m);
}

inline std::vector<double> random_signal(std::size_t n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> d(0.0, scale);
  std::vector<double> x(n);
  for (auto& v : x) v = d(rng);
  return x;
}

inline std::vector<cplx> random_complex(std::size_t n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> d(0.0, scale);
  std::vector<cplx> x(n);
  for (auto& v : x) v = cplx(d(rng), d(rng));
  return x;
}

}  // namespace oracle
