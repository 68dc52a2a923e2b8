// Compiled with -mavx2 -mfma when FARSEP_ENABLE_AVX2 is on. std::complex<double>
// is laid out as {re, im}, so one __m256d holds two complex values.

#include "farsep/simd/kernels.hpp"

#if defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

#include <cmath>

namespace farsep::simd {
namespace {

inline const double* raw(const cplx* p) { return reinterpret_cast<const double*>(p); }
inline double* raw(cplx* p) { return reinterpret_cast<double*>(p); }

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

void cmac_conj(cplx* out, const cplx* w, const cplx* y, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d wv = _mm256_loadu_pd(raw(w + i));
    const __m256d yv = _mm256_loadu_pd(raw(y + i));
    const __m256d wr = _mm256_movedup_pd(wv);
    const __m256d wi = _mm256_permute_pd(wv, 0xF);
    const __m256d ysw = _mm256_permute_pd(yv, 0x5);
    // even lanes: wr*yr + wi*yi, odd lanes: wr*yi - wi*yr
    const __m256d prod = _mm256_fmsubadd_pd(wr, yv, _mm256_mul_pd(wi, ysw));
    double* o = raw(out + i);
    _mm256_storeu_pd(o, _mm256_add_pd(_mm256_loadu_pd(o), prod));
  }
  for (; i < n; ++i) out[i] += std::conj(w[i]) * y[i];
}

void cmac(cplx* out, const cplx* a, const cplx* b, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d av = _mm256_loadu_pd(raw(a + i));
    const __m256d bv = _mm256_loadu_pd(raw(b + i));
    const __m256d ar = _mm256_movedup_pd(av);
    const __m256d ai = _mm256_permute_pd(av, 0xF);
    const __m256d bsw = _mm256_permute_pd(bv, 0x5);
    const __m256d prod = _mm256_fmaddsub_pd(ar, bv, _mm256_mul_pd(ai, bsw));
    double* o = raw(out + i);
    _mm256_storeu_pd(o, _mm256_add_pd(_mm256_loadu_pd(o), prod));
  }
  for (; i < n; ++i) {
    const double ar = a[i].real(), ai = a[i].imag();
    const double br = b[i].real(), bi = b[i].imag();
    out[i] += cplx(ar * br - ai * bi, ar * bi + ai * br);
  }
}

double csq_dist(const cplx* a, const cplx* b, std::size_t n) {
  // n complex values are 2n doubles; the squared distance is the same sum.
  const double* pa = raw(a);
  const double* pb = raw(b);
  const std::size_t len = 2 * n;
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= len; i += 8) {
    const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(pa + i), _mm256_loadu_pd(pb + i));
    const __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(pa + i + 4), _mm256_loadu_pd(pb + i + 4));
    acc0 = _mm256_fmadd_pd(d0, d0, acc0);
    acc1 = _mm256_fmadd_pd(d1, d1, acc1);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < len; ++i) {
    const double d = pa[i] - pb[i];
    acc += d * d;
  }
  return acc;
}

double cabs_dist(const cplx* a, const cplx* b, std::size_t n) {
  const double* pa = raw(a);
  const double* pb = raw(b);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(pa + 2 * i), _mm256_loadu_pd(pb + 2 * i));
    const __m256d d1 =
        _mm256_sub_pd(_mm256_loadu_pd(pa + 2 * i + 4), _mm256_loadu_pd(pb + 2 * i + 4));
    // hadd interleaves the pairwise sums: |d_i|^2 for four values
    const __m256d m2 = _mm256_hadd_pd(_mm256_mul_pd(d0, d0), _mm256_mul_pd(d1, d1));
    acc = _mm256_add_pd(acc, _mm256_sqrt_pd(m2));
  }
  double total = hsum(acc);
  for (; i < n; ++i) total += std::abs(a[i] - b[i]);
  return total;
}

double cenergy(const cplx* a, std::size_t n) {
  const double* pa = raw(a);
  const std::size_t len = 2 * n;
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= len; i += 8) {
    const __m256d v0 = _mm256_loadu_pd(pa + i);
    const __m256d v1 = _mm256_loadu_pd(pa + i + 4);
    acc0 = _mm256_fmadd_pd(v0, v0, acc0);
    acc1 = _mm256_fmadd_pd(v1, v1, acc1);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < len; ++i) acc += pa[i] * pa[i];
  return acc;
}

void cmag(double* out, const cplx* a, std::size_t n) {
  const double* pa = raw(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v0 = _mm256_loadu_pd(pa + 2 * i);
    const __m256d v1 = _mm256_loadu_pd(pa + 2 * i + 4);
    const __m256d m2 = _mm256_hadd_pd(_mm256_mul_pd(v0, v0), _mm256_mul_pd(v1, v1));
    // hadd yields lanes {0, 2, 1, 3}; restore natural order
    const __m256d ordered = _mm256_permute4x64_pd(_mm256_sqrt_pd(m2), 0xD8);
    _mm256_storeu_pd(out + i, ordered);
  }
  for (; i < n; ++i) {
    out[i] = std::sqrt(a[i].real() * a[i].real() + a[i].imag() * a[i].imag());
  }
}

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double sq_dist(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    const __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4));
    acc0 = _mm256_fmadd_pd(d0, d0, acc0);
    acc1 = _mm256_fmadd_pd(d1, d1, acc1);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

double abs_dist(const double* a, const double* b, std::size_t n) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_add_pd(acc, _mm256_andnot_pd(sign, d));
  }
  double total = hsum(acc);
  for (; i < n; ++i) total += std::abs(a[i] - b[i]);
  return total;
}

void axpy(double* y, double alpha, const double* x, std::size_t n) {
  const __m256d av = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void vmul(double* out, const double* a, const double* b, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void vmac(double* out, const double* a, const double* b, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i),
                                              _mm256_loadu_pd(out + i)));
  }
  for (; i < n; ++i) out[i] += a[i] * b[i];
}

}  // namespace

const KernelTable* avx2_kernels() {
  static const KernelTable table{
      "avx2", cmac_conj, cmac,    csq_dist, cabs_dist, cenergy, cmag,
      dot,    sq_dist,   abs_dist, axpy,    vmul,      vmac,
  };
  return &table;
}

}  // namespace farsep::simd

#else

namespace farsep::simd {
const KernelTable* avx2_kernels() { return nullptr; }
}  // namespace farsep::simd

#endif
