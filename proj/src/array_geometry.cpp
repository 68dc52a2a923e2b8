#include "farsep/array_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "farsep/error.hpp"

namespace farsep {

double wrap_angle(double rad) {
  double r = std::fmod(rad + kPi, 2.0 * kPi);
  if (r < 0) r += 2.0 * kPi;
  r -= kPi;
  // fmod rounding can land exactly on +pi
  return r >= kPi ? -kPi : r;
}

Doa normalize(Doa doa) {
  double el = wrap_angle(doa.elevation);
  double az = doa.azimuth;
  if (el > kPi / 2) {
    el = kPi - el;
    az += kPi;
  } else if (el < -kPi / 2) {
    el = -kPi - el;
    az += kPi;
  }
  return {wrap_angle(az), el};
}

Eigen::Vector3d unit_direction(const Doa& doa) {
  const double ce = std::cos(doa.elevation);
  return {ce * std::cos(doa.azimuth), ce * std::sin(doa.azimuth), std::sin(doa.elevation)};
}

Doa doa_from_vector(const Eigen::Vector3d& v) {
  const double n = v.norm();
  if (!(n > 0.0)) fail(ErrorCode::InvalidArgument, "zero direction vector");
  const Eigen::Vector3d u = v / n;
  return normalize({std::atan2(u.y(), u.x()), std::asin(std::clamp(u.z(), -1.0, 1.0))});
}

double angular_distance(const Doa& a, const Doa& b) {
  const double c = unit_direction(a).dot(unit_direction(b));
  return std::acos(std::clamp(c, -1.0, 1.0));
}

ArrayGeometry::ArrayGeometry(Coords coords, std::size_t reference, double speed_of_sound)
    : coords_(std::move(coords)), reference_(reference), speed_of_sound_(speed_of_sound) {
  if (coords_.rows() < 2) fail(ErrorCode::InvalidArgument, "array needs at least two microphones");
  if (reference_ >= num_mics()) fail(ErrorCode::InvalidArgument, "reference index out of range");
  if (!coords_.allFinite()) fail(ErrorCode::InvalidArgument, "non-finite microphone coordinate");
  if (!(speed_of_sound_ > 0.0)) fail(ErrorCode::InvalidArgument, "speed of sound must be positive");
}

ArrayGeometry ArrayGeometry::default_circular() {
  constexpr double radius = 0.04;
  Coords c(7, 3);
  c.row(0) << 0.0, 0.0, 0.0;
  for (int i = 0; i < 6; ++i) {
    const double phi = 2.0 * kPi * i / 6.0;
    c.row(i + 1) << radius * std::cos(phi), radius * std::sin(phi), 0.0;
  }
  return ArrayGeometry(std::move(c), 0);
}

ArrayGeometry geometry_from_json(const nlohmann::json& j) {
  try {
    const auto& rows = j.at("coords_m");
    Coords c(static_cast<Eigen::Index>(rows.size()), 3);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != 3) fail(ErrorCode::Format, "coords_m rows must have 3 entries");
      for (int d = 0; d < 3; ++d) c(static_cast<Eigen::Index>(i), d) = rows[i][d].get<double>();
    }
    const auto ref = j.value("reference", std::size_t{0});
    const double speed = j.value("speed_of_sound", ArrayGeometry::kDefaultSpeedOfSound);
    return ArrayGeometry(std::move(c), ref, speed);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Format, std::string("geometry JSON: ") + e.what());
  }
}

nlohmann::json to_json(const ArrayGeometry& geom) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < geom.coords().rows(); ++i) {
    rows.push_back({geom.coords()(i, 0), geom.coords()(i, 1), geom.coords()(i, 2)});
  }
  return {{"coords_m", rows}, {"reference", geom.reference()}, {"speed_of_sound", geom.speed_of_sound()}};
}

ArrayGeometry load_geometry(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open geometry file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Format, path.string() + ": " + e.what());
  }
  return geometry_from_json(j);
}

double wavenumber(std::size_t bin, const StftSpec& spec, double speed_of_sound) {
  return 2.0 * kPi * static_cast<double>(bin) * spec.sample_rate /
         (speed_of_sound * static_cast<double>(spec.fft_size));
}

SteeringMatrix steering_vector(const ArrayGeometry& geom, const Doa& doa, const StftSpec& spec) {
  const Eigen::VectorXd proj = geom.coords() * unit_direction(doa);  // metres, per mic
  const std::size_t bins = spec.num_bins();
  SteeringMatrix a{Eigen::MatrixXcd(static_cast<Eigen::Index>(bins), proj.size())};
  for (Eigen::Index m = 0; m < proj.size(); ++m) {
    for (std::size_t f = 0; f < bins; ++f) {
      const double phase = wavenumber(f, spec, geom.speed_of_sound()) * proj(m);
      a.values(static_cast<Eigen::Index>(f), m) = cplx(std::cos(phase), std::sin(phase));
    }
  }
  return a;
}

}  // namespace farsep
