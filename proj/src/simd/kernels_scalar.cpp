#include <cmath>

#include "farsep/simd/kernels.hpp"

namespace farsep::simd {
namespace {

void cmac_conj(cplx* out, const cplx* w, const cplx* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double wr = w[i].real(), wi = w[i].imag();
    const double yr = y[i].real(), yi = y[i].imag();
    out[i] += cplx(wr * yr + wi * yi, wr * yi - wi * yr);
  }
}

void cmac(cplx* out, const cplx* a, const cplx* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double ar = a[i].real(), ai = a[i].imag();
    const double br = b[i].real(), bi = b[i].imag();
    out[i] += cplx(ar * br - ai * bi, ar * bi + ai * br);
  }
}

double csq_dist(const cplx* a, const cplx* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dr = a[i].real() - b[i].real();
    const double di = a[i].imag() - b[i].imag();
    acc += dr * dr + di * di;
  }
  return acc;
}

double cabs_dist(const cplx* a, const cplx* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dr = a[i].real() - b[i].real();
    const double di = a[i].imag() - b[i].imag();
    acc += std::sqrt(dr * dr + di * di);
  }
  return acc;
}

double cenergy(const cplx* a, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += a[i].real() * a[i].real() + a[i].imag() * a[i].imag();
  }
  return acc;
}

void cmag(double* out, const cplx* a, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = std::sqrt(a[i].real() * a[i].real() + a[i].imag() * a[i].imag());
  }
}

double dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double sq_dist(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

double abs_dist(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += std::abs(a[i] - b[i]);
  return acc;
}

void axpy(double* y, double alpha, const double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void vmul(double* out, const double* a, const double* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void vmac(double* out, const double* a, const double* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] += a[i] * b[i];
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{
      "scalar", cmac_conj, cmac,    csq_dist, cabs_dist, cenergy, cmag,
      dot,      sq_dist,   abs_dist, axpy,    vmul,      vmac,
  };
  return table;
}

}  // namespace farsep::simd
