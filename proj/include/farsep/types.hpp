#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace farsep {

using cplx = std::complex<double>;

// Mono sample sequence.
using Signal = std::vector<double>;

// Channel-major multichannel samples; every channel has the same length.
using MultiSignal = std::vector<Signal>;

inline constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

}  // namespace farsep
