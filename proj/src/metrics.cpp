#include "farsep/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "farsep/error.hpp"
#include "farsep/simd/kernels.hpp"

namespace farsep {
namespace {

double cap(double db) {
  if (std::isnan(db)) return -kMetricCapDb;
  return std::clamp(db, -kMetricCapDb, kMetricCapDb);
}

// 10 log10(num / den) with the limits num = 0 -> -cap, den = 0 -> +cap.
double ratio_db(double num, double den) {
  if (!(den > 0.0)) return num > 0.0 ? kMetricCapDb : -kMetricCapDb;
  if (!(num > 0.0)) return -kMetricCapDb;
  return cap(10.0 * std::log10(num / den));
}

}  // namespace

double si_sdr(std::span<const double> est, std::span<const double> ref) {
  if (est.size() != ref.size()) fail(ErrorCode::Shape, "si_sdr: length mismatch");
  const auto& kern = simd::kernels();
  const double ref_energy = kern.dot(ref.data(), ref.data(), ref.size());
  if (!(ref_energy > 0.0)) fail(ErrorCode::DegenerateReference, "si_sdr: reference is all zeros");
  const double scale = kern.dot(est.data(), ref.data(), ref.size()) / ref_energy;
  double target_energy = 0.0, residual_energy = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const double s = scale * ref[i];
    const double e = est[i] - s;
    target_energy += s * s;
    residual_energy += e * e;
  }
  return ratio_db(target_energy, residual_energy);
}

double sir(std::span<const double> est, std::span<const double> target, std::span<const double> interferer) {
  if (est.size() != target.size() || est.size() != interferer.size()) {
    fail(ErrorCode::Shape, "sir: length mismatch");
  }
  const auto& kern = simd::kernels();
  const std::size_t n = est.size();
  const double tt = kern.dot(target.data(), target.data(), n);
  const double ii = kern.dot(interferer.data(), interferer.data(), n);
  const double ti = kern.dot(target.data(), interferer.data(), n);
  const double et = kern.dot(est.data(), target.data(), n);
  const double ei = kern.dot(est.data(), interferer.data(), n);
  const double det = tt * ii - ti * ti;
  if (!(tt > 0.0 && ii > 0.0) || det <= 1e-12 * tt * ii) {
    fail(ErrorCode::Decomposition, "sir: target and interferer are (nearly) collinear");
  }
  const double a = (ii * et - ti * ei) / det;
  const double b = (tt * ei - ti * et) / det;
  const double eps = 1e-12 * kern.dot(est.data(), est.data(), n);
  return ratio_db(a * a * tt, b * b * ii + eps);
}

EvalReport evaluate_scene(const SignalPair& separated, const SignalPair& targets, std::span<const double> mixture_ref) {
  const std::array<const Signal*, 2> tgt{&targets.first, &targets.second};
  const double identity = si_sdr(separated.first, targets.first) + si_sdr(separated.second, targets.second);
  const double swapped = si_sdr(separated.second, targets.first) + si_sdr(separated.first, targets.second);
  EvalReport report;
  report.permutation = swapped > identity ? Permutation::Swap : Permutation::Identity;
  const bool swap = report.permutation == Permutation::Swap;
  const std::array<const Signal*, 2> est{swap ? &separated.second : &separated.first,
                                         swap ? &separated.first : &separated.second};
  for (std::size_t i = 0; i < 2; ++i) {
    const Signal& t = *tgt[i];
    const Signal& other = *tgt[1 - i];
    auto& s = report.sources[i];
    s.si_sdr = si_sdr(*est[i], t);
    s.sir = sir(*est[i], t, other);
    s.baseline_si_sdr = si_sdr(mixture_ref, t);
    s.baseline_sir = sir(mixture_ref, t, other);
    s.delta_si_sdr = s.si_sdr - s.baseline_si_sdr;
    s.delta_sir = s.sir - s.baseline_sir;
  }
  return report;
}

nlohmann::json to_json(const EvalReport& report) {
  nlohmann::json sources = nlohmann::json::array();
  for (const auto& s : report.sources) {
    sources.push_back({{"si_sdr_db", s.si_sdr},
                       {"sir_db", s.sir},
                       {"baseline_si_sdr_db", s.baseline_si_sdr},
                       {"baseline_sir_db", s.baseline_sir},
                       {"delta_si_sdr_db", s.delta_si_sdr},
                       {"delta_sir_db", s.delta_sir}});
  }
  return {{"sources", sources},
          {"permutation", report.permutation == Permutation::Swap ? "swap" : "identity"},
          {"mean_delta_si_sdr_db", report.mean_delta_si_sdr()},
          {"mean_delta_sir_db", report.mean_delta_sir()}};
}

}  // namespace farsep
