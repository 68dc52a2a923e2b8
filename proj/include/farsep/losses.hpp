#pragma once

#include <utility>

#include <nlohmann/json.hpp>

#include "farsep/wola.hpp"

namespace farsep {

enum class LossKind { MSE, cMSE, MAE, SDR };

const char* to_string(LossKind kind);
LossKind loss_kind_from_string(const std::string& name);

// alpha blends the complex-domain distance (alpha = 1) with the magnitude
// distance (alpha = 0). SDR only has a complex form.
struct LossSpec {
  LossKind kind = LossKind::cMSE;
  double alpha = 1.0;
  double compression = 0.3;
  double floor = 1e-12;

  void validate() const;
};

LossSpec loss_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const LossSpec& spec);

// Complex-domain term, e.g. log10(sum |X - Xest|^2 + eps) for MSE.
double complex_loss(const Spectrogram& est, const Spectrogram& tgt, const LossSpec& spec);
// Magnitude-domain term, e.g. log10(sum (|X| - |Xest|)^2 + eps) for MSE.
double magnitude_loss(const Spectrogram& est, const Spectrogram& tgt, const LossSpec& spec);

// alpha * complex + (1 - alpha) * magnitude, on single-channel spectra.
double spectral_loss(const Spectrogram& est, const Spectrogram& tgt, const LossSpec& spec);

enum class Permutation { Identity, Swap };

struct UpitResult {
  double loss = 0.0;
  Permutation permutation = Permutation::Identity;
};

using SpectrogramPair = std::pair<Spectrogram, Spectrogram>;

// Utterance-level PIT over two sources: the smaller summed loss of the two
// assignments. Ties resolve to Identity.
UpitResult upit_loss(const SpectrogramPair& ests, const SpectrogramPair& tgts, const LossSpec& spec);

}  // namespace farsep

namespace farsep {

// upit_loss with the target-side transforms (magnitudes, compression)
// computed once; used where the same targets are scored many times.
class LossEvaluator {
 public:
  LossEvaluator(SpectrogramPair targets, LossSpec spec);

  UpitResult upit(const SpectrogramPair& ests) const;
  const LossSpec& spec() const { return spec_; }
  const SpectrogramPair& targets() const { return targets_; }

 private:
  struct Prepared {
    std::vector<cplx> complex_form;   // X, or |X|^c e^{j phase} for cMSE
    std::vector<double> magnitude;    // |X|, or |X|^c for cMSE
    double energy = 0.0;
  };
  Prepared prepare(const Spectrogram& s) const;
  double pair_loss(const Prepared& est, const Prepared& tgt) const;

  SpectrogramPair targets_;
  LossSpec spec_;
  Prepared t1_, t2_;
};

}  // namespace farsep
