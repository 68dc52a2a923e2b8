#include "farsep/losses.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "farsep/error.hpp"
#include "farsep/simd/kernels.hpp"

namespace farsep {

const char* to_string(LossKind kind) {
  switch (kind) {
    case LossKind::MSE: return "MSE";
    case LossKind::cMSE: return "cMSE";
    case LossKind::MAE: return "MAE";
    case LossKind::SDR: return "SDR";
  }
  return "?";
}

LossKind loss_kind_from_string(const std::string& name) {
  if (name == "MSE") return LossKind::MSE;
  if (name == "cMSE") return LossKind::cMSE;
  if (name == "MAE") return LossKind::MAE;
  if (name == "SDR") return LossKind::SDR;
  fail(ErrorCode::InvalidArgument, "unknown loss kind '" + name + "' (expected MSE, cMSE, MAE or SDR)");
}

void LossSpec::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) fail(ErrorCode::InvalidArgument, "alpha must lie in [0, 1]");
  if (!(compression > 0.0 && compression <= 1.0)) {
    fail(ErrorCode::InvalidArgument, "compression exponent must lie in (0, 1]");
  }
  if (!(floor > 0.0)) fail(ErrorCode::InvalidArgument, "floor must be positive");
  if (kind == LossKind::SDR && alpha != 1.0) {
    fail(ErrorCode::UnsupportedCombination, "SDR has no magnitude form; alpha must be 1");
  }
}

LossSpec loss_spec_from_json(const nlohmann::json& j) {
  LossSpec s;
  try {
    if (j.contains("kind")) s.kind = loss_kind_from_string(j.at("kind").get<std::string>());
    s.alpha = j.value("alpha", s.alpha);
    s.compression = j.value("compression", s.compression);
    s.floor = j.value("floor", s.floor);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Format, std::string("loss JSON: ") + e.what());
  }
  s.validate();
  return s;
}

nlohmann::json to_json(const LossSpec& spec) {
  return {{"kind", to_string(spec.kind)},
          {"alpha", spec.alpha},
          {"compression", spec.compression},
          {"floor", spec.floor}};
}

namespace {

void check_pair(const Spectrogram& est, const Spectrogram& tgt) {
  if (!est.same_shape(tgt)) fail(ErrorCode::Shape, "estimate and target shapes differ");
  if (est.channels() != 1) fail(ErrorCode::Shape, "losses take single-channel spectra");
}

// |X|^c exp(j phase(X)); a zero coefficient has phase 0 and maps to 0.
std::vector<cplx> compress(std::span<const cplx> x, double c) {
  std::vector<cplx> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double mag = std::abs(x[i]);
    out[i] = mag > 0.0 ? x[i] * std::pow(mag, c - 1.0) : cplx{};
  }
  return out;
}

std::vector<double> magnitudes(std::span<const cplx> x, double c) {
  std::vector<double> out(x.size());
  simd::kernels().cmag(out.data(), x.data(), x.size());
  if (c != 1.0) {
    for (double& v : out) v = std::pow(v, c);
  }
  return out;
}

}  // namespace

double complex_loss(const Spectrogram& est, const Spectrogram& tgt, const LossSpec& spec) {
  check_pair(est, tgt);
  const auto& kern = simd::kernels();
  const auto x = tgt.data();
  const auto xe = est.data();
  switch (spec.kind) {
    case LossKind::MSE:
      return std::log10(kern.csq_dist(x.data(), xe.data(), x.size()) + spec.floor);
    case LossKind::cMSE: {
      if (spec.compression == 1.0) {
        return std::log10(kern.csq_dist(x.data(), xe.data(), x.size()) + spec.floor);
      }
      const auto cx = compress(x, spec.compression);
      const auto cxe = compress(xe, spec.compression);
      return std::log10(kern.csq_dist(cx.data(), cxe.data(), cx.size()) + spec.floor);
    }
    case LossKind::MAE:
      return std::log10(kern.cabs_dist(x.data(), xe.data(), x.size()) + spec.floor);
    case LossKind::SDR: {
      const double energy = kern.cenergy(x.data(), x.size());
      if (!(energy > 0.0)) fail(ErrorCode::DegenerateTarget, "SDR loss with an all-zero target");
      return -std::log10(energy / (kern.csq_dist(x.data(), xe.data(), x.size()) + spec.floor));
    }
  }
  return 0.0;
}

double magnitude_loss(const Spectrogram& est, const Spectrogram& tgt, const LossSpec& spec) {
  check_pair(est, tgt);
  const auto& kern = simd::kernels();
  switch (spec.kind) {
    case LossKind::MSE: {
      const auto m = magnitudes(tgt.data(), 1.0);
      const auto me = magnitudes(est.data(), 1.0);
      return std::log10(kern.sq_dist(m.data(), me.data(), m.size()) + spec.floor);
    }
    case LossKind::cMSE: {
      const auto m = magnitudes(tgt.data(), spec.compression);
      const auto me = magnitudes(est.data(), spec.compression);
      return std::log10(kern.sq_dist(m.data(), me.data(), m.size()) + spec.floor);
    }
    case LossKind::MAE: {
      const auto m = magnitudes(tgt.data(), 1.0);
      const auto me = magnitudes(est.data(), 1.0);
      return std::log10(kern.abs_dist(m.data(), me.data(), m.size()) + spec.floor);
    }
    case LossKind::SDR:
      fail(ErrorCode::UnsupportedCombination, "SDR has no magnitude form");
  }
  return 0.0;
}

double spectral_loss(const Spectrogram& est, const Spectrogram& tgt, const LossSpec& spec) {
  spec.validate();
  if (spec.alpha == 1.0) return complex_loss(est, tgt, spec);
  if (spec.alpha == 0.0) return magnitude_loss(est, tgt, spec);
  return spec.alpha * complex_loss(est, tgt, spec) + (1.0 - spec.alpha) * magnitude_loss(est, tgt, spec);
}

UpitResult upit_loss(const SpectrogramPair& ests, const SpectrogramPair& tgts, const LossSpec& spec) {
  const double identity = spectral_loss(ests.first, tgts.first, spec) + spectral_loss(ests.second, tgts.second, spec);
  const double swapped = spectral_loss(ests.second, tgts.first, spec) + spectral_loss(ests.first, tgts.second, spec);
  if (swapped < identity) return {swapped, Permutation::Swap};
  return {identity, Permutation::Identity};
}

}  // namespace farsep

namespace farsep {

LossEvaluator::LossEvaluator(SpectrogramPair targets, LossSpec spec)
    : targets_(std::move(targets)), spec_(spec) {
  spec_.validate();
  if (!targets_.first.same_shape(targets_.second)) fail(ErrorCode::Shape, "target shapes differ");
  t1_ = prepare(targets_.first);
  t2_ = prepare(targets_.second);
}

LossEvaluator::Prepared LossEvaluator::prepare(const Spectrogram& s) const {
  Prepared p;
  const auto x = s.data();
  if (spec_.alpha > 0.0) {
    if (spec_.kind == LossKind::cMSE && spec_.compression != 1.0) {
      p.complex_form = compress(x, spec_.compression);
    } else {
      p.complex_form.assign(x.begin(), x.end());
    }
    if (spec_.kind == LossKind::SDR) p.energy = simd::kernels().cenergy(x.data(), x.size());
  }
  if (spec_.alpha < 1.0) {
    p.magnitude = magnitudes(x, spec_.kind == LossKind::cMSE ? spec_.compression : 1.0);
  }
  return p;
}

double LossEvaluator::pair_loss(const Prepared& est, const Prepared& tgt) const {
  const auto& kern = simd::kernels();
  double complex_term = 0.0, magnitude_term = 0.0;
  if (spec_.alpha > 0.0) {
    const std::size_t n = tgt.complex_form.size();
    switch (spec_.kind) {
      case LossKind::MSE:
      case LossKind::cMSE:
        complex_term = std::log10(kern.csq_dist(tgt.complex_form.data(), est.complex_form.data(), n) + spec_.floor);
        break;
      case LossKind::MAE:
        complex_term = std::log10(kern.cabs_dist(tgt.complex_form.data(), est.complex_form.data(), n) + spec_.floor);
        break;
      case LossKind::SDR:
        if (!(tgt.energy > 0.0)) fail(ErrorCode::DegenerateTarget, "SDR loss with an all-zero target");
        complex_term = -std::log10(
            tgt.energy / (kern.csq_dist(tgt.complex_form.data(), est.complex_form.data(), n) + spec_.floor));
        break;
    }
  }
  if (spec_.alpha < 1.0) {
    const std::size_t n = tgt.magnitude.size();
    const double d = spec_.kind == LossKind::MAE ? kern.abs_dist(tgt.magnitude.data(), est.magnitude.data(), n)
                                                 : kern.sq_dist(tgt.magnitude.data(), est.magnitude.data(), n);
    magnitude_term = std::log10(d + spec_.floor);
  }
  if (spec_.alpha == 1.0) return complex_term;
  if (spec_.alpha == 0.0) return magnitude_term;
  return spec_.alpha * complex_term + (1.0 - spec_.alpha) * magnitude_term;
}

UpitResult LossEvaluator::upit(const SpectrogramPair& ests) const {
  if (!ests.first.same_shape(targets_.first) || !ests.second.same_shape(targets_.first)) {
    fail(ErrorCode::Shape, "estimate and target shapes differ");
  }
  const Prepared e1 = prepare(ests.first);
  const Prepared e2 = prepare(ests.second);
  const double identity = pair_loss(e1, t1_) + pair_loss(e2, t2_);
  const double swapped = pair_loss(e2, t1_) + pair_loss(e1, t2_);
  if (swapped < identity) return {swapped, Permutation::Swap};
  return {identity, Permutation::Identity};
}

}  // namespace farsep
