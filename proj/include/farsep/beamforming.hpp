#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "farsep/array_geometry.hpp"
#include "farsep/wola.hpp"

namespace farsep {

// Spherically isotropic noise coherence, one Hermitian M x M matrix per bin.
struct NoiseCovariance {
  std::vector<Eigen::MatrixXcd> per_bin;
};

// Gamma_pq(f) = sinc(2 pi f_Hz d_pq / c), sinc(x) = sin(x) / x.
NoiseCovariance diffuse_coherence(const ArrayGeometry& geom, const StftSpec& spec);

// Gamma + loading * (trace(Gamma) / M) * I
Eigen::MatrixXcd load_diagonal(const Eigen::MatrixXcd& gamma, double loading);

struct BeamformerWeights {
  Eigen::MatrixXcd values;     // bins F x channels M
  std::vector<bool> fallback;  // bins solved with the single-constraint rule
};

inline constexpr double kDefaultLoading = 1e-9;
inline constexpr double kMaxConstraintCondition = 1e12;

// Two-constraint LCMV weights for one bin: unit response to a_target, null
// towards a_interf. Throws DegenerateSteering when the 2 x 2 constraint Gram
// matrix A^H Gamma~^-1 A is too ill-conditioned to separate the directions.
Eigen::VectorXcd lcmv_bin(const Eigen::VectorXcd& a_target, const Eigen::VectorXcd& a_interf,
                          const Eigen::MatrixXcd& gamma_loaded,
                          double max_condition = kMaxConstraintCondition);

// Single-constraint (MVDR) weights: Gamma~^-1 a / (a^H Gamma~^-1 a).
Eigen::VectorXcd mvdr_bin(const Eigen::VectorXcd& a_target, const Eigen::MatrixXcd& gamma_loaded);

// Per-bin LCMV. Bin 0 and any degenerate bin use the MVDR fallback; throws
// DegenerateSteering when no bin above DC admits the two-constraint solution.
BeamformerWeights lcmv_weights(const SteeringMatrix& a_target, const SteeringMatrix& a_interf,
                               const NoiseCovariance& noise, double loading = kDefaultLoading,
                               double max_condition = kMaxConstraintCondition);

// output(k, f) = w(f)^H y(k, f); single-channel result.
Spectrogram apply_beamformer(const BeamformerWeights& w, const Spectrogram& spect);

}  // namespace farsep
