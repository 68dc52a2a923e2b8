#include "farsep/beamforming.hpp"

#include <cmath>

#include "farsep/error.hpp"
#include "farsep/simd/kernels.hpp"

namespace farsep {
namespace {

double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; }

// Solves gamma * X = rhs for Hermitian positive (semi)definite gamma.
Eigen::MatrixXcd hermitian_solve(const Eigen::MatrixXcd& gamma, const Eigen::MatrixXcd& rhs) {
  Eigen::LLT<Eigen::MatrixXcd> llt(gamma);
  if (llt.info() == Eigen::Success) return llt.solve(rhs);
  return gamma.completeOrthogonalDecomposition().solve(rhs);
}

}  // namespace

NoiseCovariance diffuse_coherence(const ArrayGeometry& geom, const StftSpec& spec) {
  const auto m = static_cast<Eigen::Index>(geom.num_mics());
  NoiseCovariance cov;
  cov.per_bin.reserve(spec.num_bins());
  for (std::size_t f = 0; f < spec.num_bins(); ++f) {
    const double omega_over_c = 2.0 * kPi * spec.bin_frequency(f) / geom.speed_of_sound();
    Eigen::MatrixXcd g(m, m);
    for (Eigen::Index p = 0; p < m; ++p) {
      g(p, p) = 1.0;
      for (Eigen::Index q = p + 1; q < m; ++q) {
        const double v = sinc(omega_over_c * geom.distance(static_cast<std::size_t>(p), static_cast<std::size_t>(q)));
        g(p, q) = v;
        g(q, p) = v;
      }
    }
    cov.per_bin.push_back(std::move(g));
  }
  return cov;
}

Eigen::MatrixXcd load_diagonal(const Eigen::MatrixXcd& gamma, double loading) {
  const double level = loading * gamma.trace().real() / static_cast<double>(gamma.rows());
  Eigen::MatrixXcd out = gamma;
  out.diagonal().array() += level;
  return out;
}

Eigen::VectorXcd mvdr_bin(const Eigen::VectorXcd& a_target, const Eigen::MatrixXcd& gamma_loaded) {
  const Eigen::VectorXcd b = hermitian_solve(gamma_loaded, a_target);
  const cplx denom = a_target.dot(b);  // a^H Gamma^-1 a
  if (!(std::abs(denom) > 0.0)) fail(ErrorCode::DegenerateSteering, "MVDR normalisation is zero");
  return b / denom;
}

Eigen::VectorXcd lcmv_bin(const Eigen::VectorXcd& a_target, const Eigen::VectorXcd& a_interf,
                          const Eigen::MatrixXcd& gamma_loaded, double max_condition) {
  const Eigen::Index m = a_target.size();
  Eigen::MatrixXcd a(m, 2);
  a.col(0) = a_target;
  a.col(1) = a_interf;
  const Eigen::MatrixXcd b = hermitian_solve(gamma_loaded, a);  // Gamma^-1 A
  Eigen::Matrix2cd g = a.adjoint() * b;
  g = 0.5 * (g + g.adjoint()).eval();

  // eigenvalues of the Hermitian 2 x 2 Gram matrix
  const double p = g(0, 0).real(), q = g(1, 1).real();
  const double disc = std::sqrt(0.25 * (p - q) * (p - q) + std::norm(g(0, 1)));
  const double lmax = 0.5 * (p + q) + disc;
  const double lmin = 0.5 * (p + q) - disc;
  if (!(lmin > 0.0) || lmax / lmin > max_condition) {
    fail(ErrorCode::DegenerateSteering, "constraint Gram matrix condition number " +
                                            std::to_string(lmin > 0.0 ? lmax / lmin : INFINITY));
  }

  const Eigen::Vector2cd target(1.0, 0.0);
  const auto g_solver = g.ldlt();
  Eigen::VectorXcd w = b * g_solver.solve(target);
  // Refinement stays inside range(Gamma^-1 A), so the minimum-variance
  // structure is kept while the constraint residual shrinks.
  for (int iter = 0; iter < 2; ++iter) {
    const Eigen::Vector2cd residual = target - a.adjoint() * w;
    w += b * g_solver.solve(residual);
  }
  return w;
}

BeamformerWeights lcmv_weights(const SteeringMatrix& a_target, const SteeringMatrix& a_interf,
                               const NoiseCovariance& noise, double loading, double max_condition) {
  const Eigen::Index bins = a_target.values.rows();
  const Eigen::Index mics = a_target.values.cols();
  if (a_interf.values.rows() != bins || a_interf.values.cols() != mics ||
      static_cast<Eigen::Index>(noise.per_bin.size()) != bins) {
    fail(ErrorCode::Shape, "steering/noise dimensions disagree");
  }
  if (loading < 0.0) fail(ErrorCode::InvalidArgument, "diagonal loading must be >= 0");

  BeamformerWeights out{Eigen::MatrixXcd(bins, mics), std::vector<bool>(static_cast<std::size_t>(bins), false)};
  Eigen::Index constrained = 0;
  for (Eigen::Index f = 0; f < bins; ++f) {
    const auto& gamma = noise.per_bin[static_cast<std::size_t>(f)];
    if (gamma.rows() != mics) fail(ErrorCode::Shape, "noise covariance size");
    const Eigen::MatrixXcd loaded = load_diagonal(gamma, loading);
    const Eigen::VectorXcd at = a_target.values.row(f).transpose();
    if (f > 0) {
      try {
        out.values.row(f) = lcmv_bin(at, a_interf.values.row(f).transpose(), loaded, max_condition).transpose();
        ++constrained;
        continue;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::DegenerateSteering) throw;
      }
    }
    out.values.row(f) = mvdr_bin(at, loaded).transpose();
    out.fallback[static_cast<std::size_t>(f)] = true;
  }
  if (bins > 1 && constrained == 0) {
    fail(ErrorCode::DegenerateSteering, "target and interferer steering coincide at every bin");
  }
  return out;
}

Spectrogram apply_beamformer(const BeamformerWeights& w, const Spectrogram& spect) {
  if (static_cast<std::size_t>(w.values.cols()) != spect.channels() ||
      static_cast<std::size_t>(w.values.rows()) != spect.bins()) {
    fail(ErrorCode::Shape, "weights are " + std::to_string(w.values.rows()) + "x" +
                               std::to_string(w.values.cols()) + " but spectrogram has " +
                               std::to_string(spect.bins()) + " bins, " +
                               std::to_string(spect.channels()) + " channels");
  }
  const auto& kern = simd::kernels();
  Spectrogram out = spect.like_mono();
  for (std::size_t m = 0; m < spect.channels(); ++m) {
    const cplx* wcol = w.values.col(static_cast<Eigen::Index>(m)).data();
    for (std::size_t k = 0; k < spect.frames(); ++k) {
      kern.cmac_conj(out.frame(0, k).data(), wcol, spect.frame(m, k).data(), spect.bins());
    }
  }
  return out;
}

}  // namespace farsep
