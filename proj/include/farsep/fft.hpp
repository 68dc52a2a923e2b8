#pragma once

#include <cstddef>
#include <span>

#include "farsep/types.hpp"

namespace farsep {

// Real-input FFT of a fixed size backed by FFTW. Plans are shared per size;
// an instance owns aligned scratch buffers, so use one instance per thread.
class RealFft {
 public:
  explicit RealFft(std::size_t n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;
  RealFft(RealFft&&) noexcept;
  RealFft& operator=(RealFft&&) noexcept;

  std::size_t size() const { return n_; }
  std::size_t bins() const { return n_ / 2 + 1; }

  // X[f] = sum_n x[n] exp(-j 2 pi f n / N), f = 0..N/2
  void forward(std::span<const double> in, std::span<cplx> out);

  // Exact inverse of forward (includes the 1/N factor).
  void inverse(std::span<const cplx> in, std::span<double> out);

 private:
  std::size_t n_ = 0;
  double* real_ = nullptr;
  cplx* spec_ = nullptr;
  void* forward_plan_ = nullptr;
  void* inverse_plan_ = nullptr;
};

// Smallest n' >= n of the form 2^a 3^b 5^c.
std::size_t fast_fft_size(std::size_t n);

// Linear convolution of x and h, truncated to out_len samples.
Signal fft_convolve(std::span<const double> x, std::span<const double> h, std::size_t out_len);

}  // namespace farsep
