#pragma once

#include <array>
#include <span>
#include <string>
#include <utility>

#include <nlohmann/json.hpp>

#include "farsep/losses.hpp"
#include "farsep/types.hpp"

namespace farsep {

inline constexpr double kMetricCapDb = 60.0;

// Scale-invariant SDR in dB, clamped to +/-60 dB.
double si_sdr(std::span<const double> est, std::span<const double> ref);

// SIR from a least-squares split est = a*target + b*interferer + e, in dB,
// clamped to +/-60 dB.
double sir(std::span<const double> est, std::span<const double> target, std::span<const double> interferer);

struct SourceMetrics {
  double si_sdr = 0.0;
  double sir = 0.0;
  double baseline_si_sdr = 0.0;
  double baseline_sir = 0.0;
  double delta_si_sdr = 0.0;
  double delta_sir = 0.0;
};

struct EvalReport {
  std::array<SourceMetrics, 2> sources;
  // Identity: separated.first estimates targets.first.
  Permutation permutation = Permutation::Identity;

  double mean_delta_si_sdr() const { return 0.5 * (sources[0].delta_si_sdr + sources[1].delta_si_sdr); }
  double mean_delta_sir() const { return 0.5 * (sources[0].delta_sir + sources[1].delta_sir); }
};

using SignalPair = std::pair<Signal, Signal>;

// Picks the output-to-target assignment with the larger total SI-SDR and
// reports each source against the unprocessed reference channel.
EvalReport evaluate_scene(const SignalPair& separated, const SignalPair& targets, std::span<const double> mixture_ref);

nlohmann::json to_json(const EvalReport& report);

}  // namespace farsep
