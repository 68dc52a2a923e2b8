#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "farsep/types.hpp"

namespace farsep {

enum class Window { Hann, Rectangular };

// STFT framing. Defaults: 512-sample periodic Hann frames, 50 % overlap,
// 512-point FFT at 16 kHz.
struct StftSpec {
  std::size_t frame_len = 512;
  std::size_t hop = 256;
  std::size_t fft_size = 512;
  Window window = Window::Hann;
  double sample_rate = 16000.0;

  std::size_t num_bins() const { return fft_size / 2 + 1; }
  double bin_frequency(std::size_t bin) const {
    return static_cast<double>(bin) * sample_rate / static_cast<double>(fft_size);
  }

  // Throws InvalidArgument when an invariant is violated.
  void validate() const;

  friend bool operator==(const StftSpec&, const StftSpec&) = default;
};

std::vector<double> make_window(Window window, std::size_t n);

enum class Padding {
  None,   // frames start at sample 0; K = floor((len - frame_len) / hop) + 1
  Edges,  // frame_len - hop zeros before and enough after that every sample is fully overlapped
};

// Complex time-frequency tensor, frames K x bins F x channels M. Storage is
// channel-major with each frame's bins contiguous, so element (k, f, m) lives
// at (m * K + k) * F + f.
class Spectrogram {
 public:
  Spectrogram() = default;
  Spectrogram(std::size_t frames, std::size_t bins, std::size_t channels, StftSpec spec);

  std::size_t frames() const { return frames_; }
  std::size_t bins() const { return bins_; }
  std::size_t channels() const { return channels_; }
  const StftSpec& spec() const { return spec_; }

  cplx& operator()(std::size_t k, std::size_t f, std::size_t m) {
    return data_[(m * frames_ + k) * bins_ + f];
  }
  const cplx& operator()(std::size_t k, std::size_t f, std::size_t m) const {
    return data_[(m * frames_ + k) * bins_ + f];
  }

  std::span<cplx> frame(std::size_t m, std::size_t k) {
    return {data_.data() + (m * frames_ + k) * bins_, bins_};
  }
  std::span<const cplx> frame(std::size_t m, std::size_t k) const {
    return {data_.data() + (m * frames_ + k) * bins_, bins_};
  }
  std::span<cplx> channel(std::size_t m) {
    return {data_.data() + m * frames_ * bins_, frames_ * bins_};
  }
  std::span<const cplx> channel(std::size_t m) const {
    return {data_.data() + m * frames_ * bins_, frames_ * bins_};
  }
  std::span<cplx> data() { return data_; }
  std::span<const cplx> data() const { return data_; }

  // Synthesis bookkeeping: the analysed signal's length and the number of
  // leading padding samples, so istft can return the original length.
  std::size_t signal_length() const { return signal_length_; }
  std::size_t leading_pad() const { return leading_pad_; }
  void set_layout(std::size_t signal_length, std::size_t leading_pad) {
    signal_length_ = signal_length;
    leading_pad_ = leading_pad;
  }

  // Same layout and spec, one channel, zero-filled.
  Spectrogram like_mono() const;
  Spectrogram extract_channel(std::size_t m) const;

  bool same_shape(const Spectrogram& other) const {
    return frames_ == other.frames_ && bins_ == other.bins_ && channels_ == other.channels_;
  }

  Spectrogram& operator+=(const Spectrogram& other);
  Spectrogram& operator*=(cplx scale);

 private:
  std::size_t frames_ = 0;
  std::size_t bins_ = 0;
  std::size_t channels_ = 0;
  StftSpec spec_{};
  std::size_t signal_length_ = 0;
  std::size_t leading_pad_ = 0;
  std::vector<cplx> data_;
};

// Number of frames stft produces for a signal of len samples.
std::size_t num_frames(std::size_t len, const StftSpec& spec, Padding padding);

Spectrogram stft(const MultiSignal& signal, const StftSpec& spec, Padding padding = Padding::None);
Spectrogram stft(std::span<const double> signal, const StftSpec& spec,
                 Padding padding = Padding::None);

// Weighted overlap-add synthesis with the matched window, normalised per
// sample by the summed analysis*synthesis window. Returns signal_length()
// samples per channel.
MultiSignal istft(const Spectrogram& spect);

struct SampleRange {
  std::size_t begin = 0;
  std::size_t end = 0;
};

// Samples covered by frame_len / hop frames, in original signal coordinates.
SampleRange interior(const Spectrogram& spect);

}  // namespace farsep
