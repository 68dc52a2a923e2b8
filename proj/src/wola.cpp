#include "farsep/wola.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "farsep/error.hpp"
#include "farsep/fft.hpp"
#include "farsep/simd/kernels.hpp"

namespace farsep {

void StftSpec::validate() const {
  if (frame_len == 0 || hop == 0) fail(ErrorCode::InvalidArgument, "frame_len and hop must be positive");
  if (frame_len % hop != 0) fail(ErrorCode::InvalidArgument, "hop must divide frame_len");
  if (fft_size < frame_len) fail(ErrorCode::InvalidArgument, "fft_size must be >= frame_len");
  if ((fft_size & (fft_size - 1)) != 0) fail(ErrorCode::InvalidArgument, "fft_size must be a power of two");
  if (!(sample_rate > 0.0)) fail(ErrorCode::InvalidArgument, "sample_rate must be positive");
  const auto w = make_window(window, frame_len);
  double energy = 0.0;
  for (double v : w) energy += v * v;
  if (!(energy > 0.0)) fail(ErrorCode::InvalidArgument, "window energy is zero");
  // Overlap-add of w^2 must stay positive over a hop period, otherwise the
  // normalised synthesis cannot recover every interior sample.
  for (std::size_t n = 0; n < hop; ++n) {
    double sum = 0.0;
    for (std::size_t k = n; k < frame_len; k += hop) sum += w[k] * w[k];
    if (sum < 1e-8) fail(ErrorCode::InvalidArgument, "window/hop pair is not overlap-add invertible");
  }
}

std::vector<double> make_window(Window window, std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (window == Window::Hann) {
    // periodic Hann, sums to a constant at 50 % overlap
    for (std::size_t i = 0; i < n; ++i) {
      w[i] = 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(i) / static_cast<double>(n));
    }
  }
  return w;
}

Spectrogram::Spectrogram(std::size_t frames, std::size_t bins, std::size_t channels, StftSpec spec)
    : frames_(frames), bins_(bins), channels_(channels), spec_(spec),
      data_(frames * bins * channels, cplx{}) {}

Spectrogram Spectrogram::like_mono() const {
  Spectrogram out(frames_, bins_, 1, spec_);
  out.set_layout(signal_length_, leading_pad_);
  return out;
}

Spectrogram Spectrogram::extract_channel(std::size_t m) const {
  if (m >= channels_) fail(ErrorCode::Shape, "channel index out of range");
  Spectrogram out = like_mono();
  const auto src = channel(m);
  std::copy(src.begin(), src.end(), out.data_.begin());
  return out;
}

Spectrogram& Spectrogram::operator+=(const Spectrogram& other) {
  if (!same_shape(other)) fail(ErrorCode::Shape, "spectrogram shapes differ");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Spectrogram& Spectrogram::operator*=(cplx scale) {
  for (auto& v : data_) v *= scale;
  return *this;
}

namespace {

std::size_t lead_for(const StftSpec& spec, Padding padding) {
  return padding == Padding::Edges ? spec.frame_len - spec.hop : 0;
}

}  // namespace

std::size_t num_frames(std::size_t len, const StftSpec& spec, Padding padding) {
  if (len < spec.frame_len) {
    fail(ErrorCode::Length, "signal of " + std::to_string(len) + " samples is shorter than one frame (" +
                                std::to_string(spec.frame_len) + ")");
  }
  if (padding == Padding::None) return (len - spec.frame_len) / spec.hop + 1;
  return (len - 1 + lead_for(spec, padding)) / spec.hop + 1;
}

Spectrogram stft(const MultiSignal& signal, const StftSpec& spec, Padding padding) {
  spec.validate();
  if (signal.empty()) fail(ErrorCode::Shape, "no channels");
  const std::size_t len = signal.front().size();
  for (const auto& ch : signal) {
    if (ch.size() != len) fail(ErrorCode::Shape, "channels differ in length");
  }
  const std::size_t frames = num_frames(len, spec, padding);
  const std::size_t lead = lead_for(spec, padding);
  const auto window = make_window(spec.window, spec.frame_len);
  const auto& kern = simd::kernels();

  Spectrogram out(frames, spec.num_bins(), signal.size(), spec);
  out.set_layout(len, lead);
  RealFft fft(spec.fft_size);
  std::vector<double> buf(spec.fft_size, 0.0);
  for (std::size_t m = 0; m < signal.size(); ++m) {
    const auto& x = signal[m];
    for (const double v : x) {
      if (!std::isfinite(v)) fail(ErrorCode::InvalidArgument, "non-finite sample");
    }
    for (std::size_t k = 0; k < frames; ++k) {
      std::fill(buf.begin(), buf.end(), 0.0);
      // frame k covers [k*hop - lead, k*hop - lead + frame_len) of x
      const std::ptrdiff_t start = static_cast<std::ptrdiff_t>(k * spec.hop) - static_cast<std::ptrdiff_t>(lead);
      const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, -start);
      const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(spec.frame_len),
                                                         static_cast<std::ptrdiff_t>(len) - start);
      if (hi > lo) {
        kern.vmul(buf.data() + lo, x.data() + start + lo, window.data() + lo,
                  static_cast<std::size_t>(hi - lo));
      }
      fft.forward(buf, out.frame(m, k));
    }
  }
  return out;
}

Spectrogram stft(std::span<const double> signal, const StftSpec& spec, Padding padding) {
  return stft(MultiSignal{Signal(signal.begin(), signal.end())}, spec, padding);
}

MultiSignal istft(const Spectrogram& spect) {
  const StftSpec& spec = spect.spec();
  spec.validate();
  if (spect.bins() != spec.num_bins()) fail(ErrorCode::Shape, "bin count does not match fft_size");
  if (spect.frames() == 0 || spect.channels() == 0) fail(ErrorCode::Shape, "empty spectrogram");
  if (spect.data().size() != spect.frames() * spect.bins() * spect.channels()) {
    fail(ErrorCode::Shape, "tensor size does not match its dimensions");
  }
  const std::size_t frames = spect.frames();
  const std::size_t lead = spect.leading_pad();
  const std::size_t total = (frames - 1) * spec.hop + spec.frame_len;
  const std::size_t out_len = spect.signal_length() ? spect.signal_length() : total - lead;
  const auto window = make_window(spec.window, spec.frame_len);
  const auto& kern = simd::kernels();

  std::vector<double> norm(total, 0.0);
  for (std::size_t k = 0; k < frames; ++k) {
    kern.vmac(norm.data() + k * spec.hop, window.data(), window.data(), spec.frame_len);
  }

  RealFft fft(spec.fft_size);
  std::vector<double> buf(spec.fft_size);
  MultiSignal out(spect.channels(), Signal(out_len, 0.0));
  std::vector<double> acc(total);
  for (std::size_t m = 0; m < spect.channels(); ++m) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t k = 0; k < frames; ++k) {
      fft.inverse(spect.frame(m, k), buf);
      kern.vmac(acc.data() + k * spec.hop, buf.data(), window.data(), spec.frame_len);
    }
    for (std::size_t n = 0; n < out_len && n + lead < total; ++n) {
      const double d = norm[n + lead];
      out[m][n] = d > 1e-10 ? acc[n + lead] / d : 0.0;
    }
  }
  return out;
}

SampleRange interior(const Spectrogram& spect) {
  const StftSpec& spec = spect.spec();
  const std::size_t lead = spect.leading_pad();
  const std::size_t begin_padded = spec.frame_len - spec.hop;
  const std::size_t end_padded = spect.frames() * spec.hop;
  SampleRange r;
  r.begin = begin_padded > lead ? begin_padded - lead : 0;
  r.end = end_padded > lead ? std::min(end_padded - lead, spect.signal_length()) : 0;
  if (r.end < r.begin) r.end = r.begin;
  return r;
}

}  // namespace farsep
