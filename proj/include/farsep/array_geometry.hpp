#pragma once

#include <cstddef>
#include <filesystem>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "farsep/types.hpp"
#include "farsep/wola.hpp"

namespace farsep {

// Direction of arrival in radians. Azimuth is measured in the array's xy-plane
// from +x towards +y; elevation from the xy-plane towards +z.
struct Doa {
  double azimuth = 0.0;
  double elevation = 0.0;

  static Doa from_degrees(double az_deg, double el_deg) {
    return {deg2rad(az_deg), deg2rad(el_deg)};
  }
  double azimuth_deg() const { return rad2deg(azimuth); }
  double elevation_deg() const { return rad2deg(elevation); }
};

// Maps any angle pair onto az in [-pi, pi), el in [-pi/2, pi/2] while keeping
// the direction it denotes.
Doa normalize(Doa doa);

// Wraps an angle to [-pi, pi).
double wrap_angle(double rad);

// x = cos(el) cos(az), y = cos(el) sin(az), z = sin(el)
Eigen::Vector3d unit_direction(const Doa& doa);

// Inverse of unit_direction for any nonzero vector.
Doa doa_from_vector(const Eigen::Vector3d& v);

// Great-circle angle between two directions, radians.
double angular_distance(const Doa& a, const Doa& b);

using Coords = Eigen::Matrix<double, Eigen::Dynamic, 3>;

class ArrayGeometry {
 public:
  static constexpr double kDefaultSpeedOfSound = 343.0;

  ArrayGeometry(Coords coords, std::size_t reference, double speed_of_sound = kDefaultSpeedOfSound);

  // Six microphones on a 4 cm circle in the xy-plane plus one at the centre.
  // Channel 0 is the centre (reference); channel 1 sits on +x.
  static ArrayGeometry default_circular();

  std::size_t num_mics() const { return static_cast<std::size_t>(coords_.rows()); }
  const Coords& coords() const { return coords_; }
  std::size_t reference() const { return reference_; }
  double speed_of_sound() const { return speed_of_sound_; }

  double distance(std::size_t p, std::size_t q) const {
    return (coords_.row(p) - coords_.row(q)).norm();
  }

 private:
  Coords coords_;
  std::size_t reference_;
  double speed_of_sound_;
};

ArrayGeometry geometry_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ArrayGeometry& geom);
ArrayGeometry load_geometry(const std::filesystem::path& path);

// kappa(f) = 2 pi f fs / (c N_FFT), radians per metre.
double wavenumber(std::size_t bin, const StftSpec& spec, double speed_of_sound);

// Far-field relative transfer function, bins F x channels M.
struct SteeringMatrix {
  Eigen::MatrixXcd values;
};

// a(f, m) = exp(j kappa(f) <r_m, u(doa)>); identical for every frame.
SteeringMatrix steering_vector(const ArrayGeometry& geom, const Doa& doa, const StftSpec& spec);

}  // namespace farsep
