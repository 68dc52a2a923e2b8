#include "farsep/doa.hpp"

#include <algorithm>
#include <cmath>

#include "farsep/error.hpp"

namespace farsep {

DoaPair DoaPair::canonical(const Doa& a, const Doa& b) {
  const Doa na = normalize(a), nb = normalize(b);
  if (nb.azimuth < na.azimuth || (nb.azimuth == na.azimuth && nb.elevation < na.elevation)) return {nb, na};
  return {na, nb};
}

void DoaGrid::validate() const {
  if (!(azimuth_step_deg > 0.0) || !(elevation_step_deg > 0.0)) {
    fail(ErrorCode::InvalidArgument, "grid steps must be positive");
  }
  if (elevation_min_deg > elevation_max_deg || elevation_min_deg < -90.0 || elevation_max_deg > 90.0) {
    fail(ErrorCode::InvalidArgument, "elevation range must lie within [-90, 90]");
  }
}

std::size_t DoaGrid::azimuth_count() const {
  return static_cast<std::size_t>(std::ceil(360.0 / azimuth_step_deg - 1e-9));
}

std::size_t DoaGrid::elevation_count() const {
  return static_cast<std::size_t>(std::floor((elevation_max_deg - elevation_min_deg) / elevation_step_deg + 1e-9)) + 1;
}

std::vector<Doa> DoaGrid::points() const {
  validate();
  std::vector<Doa> pts;
  pts.reserve(azimuth_count() * elevation_count());
  for (std::size_t e = 0; e < elevation_count(); ++e) {
    const double el = elevation_min_deg + static_cast<double>(e) * elevation_step_deg;
    for (std::size_t a = 0; a < azimuth_count(); ++a) {
      pts.push_back(Doa::from_degrees(-180.0 + static_cast<double>(a) * azimuth_step_deg, el));
    }
  }
  return pts;
}

namespace {

// Grid scores in points() order.
std::vector<double> srp_map(const Spectrogram& spect, const ArrayGeometry& geom, const std::vector<Doa>& pts) {
  const std::size_t mics = spect.channels();
  if (mics != geom.num_mics()) fail(ErrorCode::Shape, "spectrogram channels do not match the geometry");
  const std::size_t bins = spect.bins();
  const auto m_idx = static_cast<Eigen::Index>(mics);

  // PHAT-weighted spatial covariance per bin
  std::vector<Eigen::MatrixXcd> cov(bins, Eigen::MatrixXcd::Zero(m_idx, m_idx));
  Eigen::VectorXcd y(m_idx);
  bool any = false;
  for (std::size_t f = 1; f < bins; ++f) {
    for (std::size_t k = 0; k < spect.frames(); ++k) {
      for (std::size_t m = 0; m < mics; ++m) {
        const cplx v = spect(k, f, m);
        const double mag = std::abs(v);
        y(static_cast<Eigen::Index>(m)) = mag > 0.0 ? v / mag : cplx{};
        any = any || mag > 0.0;
      }
      cov[f].selfadjointView<Eigen::Lower>().rankUpdate(y);
    }
    cov[f] = cov[f].selfadjointView<Eigen::Lower>();
  }
  if (!any) fail(ErrorCode::NoSignal, "SRP-PHAT on an all-zero spectrogram");

  std::vector<double> scores(pts.size(), 0.0);
  for (std::size_t p = 0; p < pts.size(); ++p) {
    const SteeringMatrix a = steering_vector(geom, pts[p], spect.spec());
    double s = 0.0;
    for (std::size_t f = 1; f < bins; ++f) {
      const Eigen::VectorXcd af = a.values.row(static_cast<Eigen::Index>(f)).transpose();
      s += af.dot(cov[f] * af).real();
    }
    scores[p] = s;
  }
  return scores;
}

}  // namespace

std::vector<ScoredDoa> srp_phat(const Spectrogram& spect, const ArrayGeometry& geom, const DoaGrid& grid) {
  const auto pts = grid.points();
  const auto scores = srp_map(spect, geom, pts);
  std::vector<ScoredDoa> out(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) out[i] = {pts[i], scores[i]};
  std::stable_sort(out.begin(), out.end(), [](const ScoredDoa& a, const ScoredDoa& b) { return a.score > b.score; });
  return out;
}

std::vector<ScoredDoa> srp_peaks(const std::vector<ScoredDoa>& map, const DoaGrid& grid) {
  const std::size_t naz = grid.azimuth_count();
  const std::size_t nel = grid.elevation_count();
  if (map.size() != naz * nel) fail(ErrorCode::Shape, "score map does not match the grid");
  std::vector<double> score(map.size(), -INFINITY);
  for (const auto& s : map) {
    const auto a = static_cast<std::size_t>(std::lround((s.doa.azimuth_deg() + 180.0) / grid.azimuth_step_deg)) % naz;
    const auto e = static_cast<std::size_t>(std::lround((s.doa.elevation_deg() - grid.elevation_min_deg) / grid.elevation_step_deg));
    score[std::min(e, nel - 1) * naz + a] = s.score;
  }
  const auto pts = grid.points();
  std::vector<ScoredDoa> peaks;
  for (std::size_t e = 0; e < nel; ++e) {
    for (std::size_t a = 0; a < naz; ++a) {
      const double v = score[e * naz + a];
      bool is_peak = true;
      for (int de = -1; de <= 1 && is_peak; ++de) {
        for (int da = -1; da <= 1; ++da) {
          if (de == 0 && da == 0) continue;
          const auto ee = static_cast<std::ptrdiff_t>(e) + de;
          if (ee < 0 || ee >= static_cast<std::ptrdiff_t>(nel)) continue;
          const auto aa = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(a + naz) + da) % naz;
          const double nv = score[static_cast<std::size_t>(ee) * naz + aa];
          // strict on one side so plateaus yield a single peak
          if (nv > v || (nv == v && (de < 0 || (de == 0 && da < 0)))) {
            is_peak = false;
            break;
          }
        }
      }
      if (is_peak) peaks.push_back({pts[e * naz + a], v});
    }
  }
  std::stable_sort(peaks.begin(), peaks.end(), [](const ScoredDoa& x, const ScoredDoa& y) { return x.score > y.score; });
  return peaks;
}

DoaPair srp_init(const Spectrogram& spect, const ArrayGeometry& geom, const DoaGrid& grid) {
  const auto map = srp_phat(spect, geom, grid);
  const auto peaks = srp_peaks(map, grid);
  if (peaks.size() >= 2) return DoaPair::canonical(peaks[0].doa, peaks[1].doa);
  // Single peak: take the best point at least two grid steps away from it.
  const double min_sep = deg2rad(2.0 * grid.azimuth_step_deg) - 1e-9;
  for (const auto& s : map) {
    if (angular_distance(s.doa, map.front().doa) >= min_sep) return DoaPair::canonical(map.front().doa, s.doa);
  }
  fail(ErrorCode::NoSignal, "SRP-PHAT map has no second direction");
}

namespace {

void check_distinct(const DoaPair& doas) {
  if (angular_distance(doas.first, doas.second) < 1e-9) {
    fail(ErrorCode::DegenerateSteering, "the two DOAs coincide");
  }
}

}  // namespace

SpectrogramPair separate_tf(const Spectrogram& mixture, const DoaPair& doas, const ArrayGeometry& geom,
                            const NoiseCovariance& noise, const SeparationOptions& options) {
  check_distinct(doas);
  if (mixture.channels() != geom.num_mics()) fail(ErrorCode::Shape, "mixture channels do not match the geometry");
  const StftSpec& spec = mixture.spec();
  const SteeringMatrix a1 = steering_vector(geom, doas.first, spec);
  const SteeringMatrix a2 = steering_vector(geom, doas.second, spec);
  SpectrogramPair out{apply_beamformer(lcmv_weights(a1, a2, noise, options.loading), mixture),
                      apply_beamformer(lcmv_weights(a2, a1, noise, options.loading), mixture)};
  if (options.postmask) out = apply_masks(ratio_mask(out, *options.postmask), out);
  return out;
}

SignalPair separate(const MultiSignal& mixture, const DoaPair& doas, const ArrayGeometry& geom, const StftSpec& spec,
                    const SeparationOptions& options) {
  check_distinct(doas);
  if (mixture.size() != geom.num_mics()) {
    fail(ErrorCode::Shape, "mixture has " + std::to_string(mixture.size()) + " channels, geometry has " +
                               std::to_string(geom.num_mics()));
  }
  const Spectrogram y = stft(mixture, spec, Padding::Edges);
  const auto beams = separate_tf(y, doas, geom, diffuse_coherence(geom, spec), options);
  auto s1 = istft(beams.first);
  auto s2 = istft(beams.second);
  return {std::move(s1.front()), std::move(s2.front())};
}

DoaObjective::DoaObjective(const Spectrogram& mixture, SpectrogramPair targets, const LossSpec& loss,
                           const ArrayGeometry& geom, double loading)
    : mixture_(mixture),
      evaluator_(std::move(targets), loss),
      geom_(geom),
      noise_(diffuse_coherence(geom, mixture.spec())),
      options_{loading, std::nullopt} {
  if (!evaluator_.targets().first.same_shape(mixture.like_mono())) {
    fail(ErrorCode::Shape, "targets must be single-channel spectra framed like the mixture");
  }
}

double DoaObjective::operator()(const DoaPair& doas) const {
  try {
    return evaluator_.upit(separate_tf(mixture_, doas, geom_, noise_, options_)).loss;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::DegenerateSteering) return INFINITY;
    throw;
  }
}

FitResult doa_fit(const Spectrogram& mixture, const SpectrogramPair& targets, const LossSpec& loss,
                  const DoaPair& init, const ArrayGeometry& geom, const FitOptions& options) {
  const DoaObjective objective(mixture, targets, loss, geom, options.loading);
  auto to_pair = [](const std::vector<double>& x) {
    return DoaPair{Doa::from_degrees(x[0], x[1]), Doa::from_degrees(x[2], x[3])};
  };
  const std::vector<double> x0{init.first.azimuth_deg(), init.first.elevation_deg(), init.second.azimuth_deg(),
                               init.second.elevation_deg()};

  NelderMeadOptions nm;
  nm.max_evaluations = options.max_evaluations;
  nm.simplex_tolerance = options.tolerance_deg;
  nm.initial_step.assign(4, options.initial_step_deg);
  double initial_loss = INFINITY;
  bool first_call = true;  // nelder_mead evaluates x0 first
  const auto result = nelder_mead(
      [&](const std::vector<double>& x) {
        const double v = objective(to_pair(x));
        if (first_call) initial_loss = v;
        first_call = false;
        return v;
      },
      x0, nm);

  const DoaPair best = to_pair(result.x);
  return {DoaPair::canonical(best.first, best.second), result.value, initial_loss, result.evaluations,
          result.converged};
}

}  // namespace farsep
