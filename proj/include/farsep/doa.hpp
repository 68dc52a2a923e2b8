#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "farsep/array_geometry.hpp"
#include "farsep/beamforming.hpp"
#include "farsep/losses.hpp"
#include "farsep/metrics.hpp"
#include "farsep/nelder_mead.hpp"
#include "farsep/postmask.hpp"
#include "farsep/wola.hpp"

namespace farsep {

// Two source directions in canonical order: smaller azimuth first.
struct DoaPair {
  Doa first;
  Doa second;

  static DoaPair canonical(const Doa& a, const Doa& b);
};

struct DoaGrid {
  double azimuth_step_deg = 5.0;
  double elevation_step_deg = 5.0;
  double elevation_min_deg = 0.0;
  double elevation_max_deg = 0.0;

  void validate() const;
  std::size_t azimuth_count() const;
  std::size_t elevation_count() const;
  // Row-major over (elevation, azimuth); azimuth covers [-180, 180).
  std::vector<Doa> points() const;
};

struct ScoredDoa {
  Doa doa;
  double score = 0.0;
};

// Steered response power with phase transform over bins 1..F-1 and all
// frames, for every grid point, in descending score order.
std::vector<ScoredDoa> srp_phat(const Spectrogram& spect, const ArrayGeometry& geom, const DoaGrid& grid);

// Grid-local maxima (azimuth wraps around), best first.
std::vector<ScoredDoa> srp_peaks(const std::vector<ScoredDoa>& map, const DoaGrid& grid);

// The two strongest SRP-PHAT peaks as a coarse initial guess.
DoaPair srp_init(const Spectrogram& spect, const ArrayGeometry& geom, const DoaGrid& grid = {});

struct SeparationOptions {
  double loading = kDefaultLoading;
  std::optional<PostmaskParams> postmask;
};

// Frequency-domain separation: LCMV towards each DOA with a null on the
// other, then the optional ratio post-mask. Outputs follow the pair order.
SpectrogramPair separate_tf(const Spectrogram& mixture, const DoaPair& doas, const ArrayGeometry& geom,
                            const NoiseCovariance& noise, const SeparationOptions& options = {});

// End-to-end time-domain chain: stft, beamform, optional post-mask, istft.
// Both outputs have the input length.
SignalPair separate(const MultiSignal& mixture, const DoaPair& doas, const ArrayGeometry& geom, const StftSpec& spec,
                    const SeparationOptions& options = {});

// Loading for the beamformer inside the fit objective. At 1e-9 the lowest
// bins amplify the STFT model mismatch by ~80 dB and that noise dominates
// the loss surface; 1e-3 keeps the surface minimum on the true DOAs.
inline constexpr double kFitLoading = 1e-3;

struct FitOptions {
  std::size_t max_evaluations = 400;
  double tolerance_deg = 0.05;
  double initial_step_deg = 3.0;
  double loading = kFitLoading;
};

struct FitResult {
  DoaPair doas;
  double loss = 0.0;
  double initial_loss = 0.0;
  std::size_t evaluations = 0;
  bool converged = false;
};

// The end-to-end objective used by doa_fit: uPIT loss of the LCMV outputs
// steered by doas against the reference-channel targets. +inf for a pair the
// beamformer cannot separate.
class DoaObjective {
 public:
  DoaObjective(const Spectrogram& mixture, SpectrogramPair targets, const LossSpec& loss, const ArrayGeometry& geom,
               double loading = kDefaultLoading);

  double operator()(const DoaPair& doas) const;

 private:
  const Spectrogram& mixture_;
  LossEvaluator evaluator_;
  const ArrayGeometry& geom_;
  NoiseCovariance noise_;
  SeparationOptions options_;
};

// Fits (az1, el1, az2, el2) by Nelder-Mead on the signal loss alone, starting
// from init. Never returns a loss above the loss at init; converged = false
// reports the best point found when the evaluation budget runs out.
FitResult doa_fit(const Spectrogram& mixture, const SpectrogramPair& targets, const LossSpec& loss,
                  const DoaPair& init, const ArrayGeometry& geom, const FitOptions& options = {});

}  // namespace farsep
