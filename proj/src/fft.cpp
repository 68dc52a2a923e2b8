#include "farsep/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cstring>
#include <map>
#include <mutex>
#include <utility>

#include "farsep/error.hpp"

namespace farsep {
namespace {

struct PlanPair {
  fftw_plan forward;
  fftw_plan inverse;
};

// The FFTW planner is not thread-safe; execution with the new-array API is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

PlanPair plans_for(std::size_t n) {
  static std::map<std::size_t, PlanPair> cache;
  std::lock_guard lock(planner_mutex());
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  auto* re = static_cast<double*>(fftw_malloc(sizeof(double) * n));
  auto* sp = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1)));
  const int size = static_cast<int>(n);
  PlanPair p{fftw_plan_dft_r2c_1d(size, re, sp, FFTW_ESTIMATE),
             fftw_plan_dft_c2r_1d(size, sp, re, FFTW_ESTIMATE)};
  fftw_free(re);
  fftw_free(sp);
  cache.emplace(n, p);
  return p;
}

}  // namespace

RealFft::RealFft(std::size_t n) : n_(n) {
  if (n == 0) fail(ErrorCode::InvalidArgument, "FFT size must be positive");
  const PlanPair p = plans_for(n);
  forward_plan_ = p.forward;
  inverse_plan_ = p.inverse;
  real_ = static_cast<double*>(fftw_malloc(sizeof(double) * n));
  spec_ = reinterpret_cast<cplx*>(fftw_malloc(sizeof(fftw_complex) * bins()));
}

RealFft::~RealFft() {
  if (real_) fftw_free(real_);
  if (spec_) fftw_free(spec_);
}

RealFft::RealFft(RealFft&& other) noexcept
    : n_(std::exchange(other.n_, 0)),
      real_(std::exchange(other.real_, nullptr)),
      spec_(std::exchange(other.spec_, nullptr)),
      forward_plan_(other.forward_plan_),
      inverse_plan_(other.inverse_plan_) {}

RealFft& RealFft::operator=(RealFft&& other) noexcept {
  if (this != &other) {
    if (real_) fftw_free(real_);
    if (spec_) fftw_free(spec_);
    n_ = std::exchange(other.n_, 0);
    real_ = std::exchange(other.real_, nullptr);
    spec_ = std::exchange(other.spec_, nullptr);
    forward_plan_ = other.forward_plan_;
    inverse_plan_ = other.inverse_plan_;
  }
  return *this;
}

void RealFft::forward(std::span<const double> in, std::span<cplx> out) {
  if (in.size() != n_ || out.size() != bins()) fail(ErrorCode::Shape, "RealFft::forward size");
  std::copy(in.begin(), in.end(), real_);
  fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_plan_), real_,
                       reinterpret_cast<fftw_complex*>(spec_));
  std::copy(spec_, spec_ + bins(), out.begin());
}

void RealFft::inverse(std::span<const cplx> in, std::span<double> out) {
  if (in.size() != bins() || out.size() != n_) fail(ErrorCode::Shape, "RealFft::inverse size");
  std::copy(in.begin(), in.end(), spec_);
  // c2r assumes a Hermitian input; DC and Nyquist imaginary parts are ignored.
  fftw_execute_dft_c2r(static_cast<fftw_plan>(inverse_plan_),
                       reinterpret_cast<fftw_complex*>(spec_), real_);
  const double scale = 1.0 / static_cast<double>(n_);
  for (std::size_t i = 0; i < n_; ++i) out[i] = real_[i] * scale;
}

std::size_t fast_fft_size(std::size_t n) {
  if (n <= 1) return 1;
  for (std::size_t m = n;; ++m) {
    std::size_t r = m;
    for (std::size_t p : {2, 3, 5}) {
      while (r % p == 0) r /= p;
    }
    if (r == 1) return m;
  }
}

Signal fft_convolve(std::span<const double> x, std::span<const double> h, std::size_t out_len) {
  Signal y(out_len, 0.0);
  if (x.empty() || h.empty() || out_len == 0) return y;
  const std::size_t full = x.size() + h.size() - 1;
  const std::size_t n = fast_fft_size(full);
  RealFft fft(n);
  std::vector<double> buf(n, 0.0);
  std::vector<cplx> X(fft.bins()), H(fft.bins());
  std::copy(x.begin(), x.end(), buf.begin());
  fft.forward(buf, X);
  std::fill(buf.begin(), buf.end(), 0.0);
  std::copy(h.begin(), h.end(), buf.begin());
  fft.forward(buf, H);
  for (std::size_t f = 0; f < X.size(); ++f) X[f] *= H[f];
  fft.inverse(X, buf);
  std::copy_n(buf.begin(), std::min(out_len, full), y.begin());
  return y;
}

}  // namespace farsep
