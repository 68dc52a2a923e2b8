#include "farsep/postmask.hpp"

#include <algorithm>
#include <cmath>

#include "farsep/error.hpp"
#include "farsep/simd/kernels.hpp"

namespace farsep {
namespace {

constexpr double kMaskEps = 1e-30;

void check(const SpectrogramPair& b) {
  if (!b.first.same_shape(b.second)) fail(ErrorCode::Shape, "beamformer outputs differ in shape");
  if (b.first.channels() != 1) fail(ErrorCode::Shape, "masks apply to single-channel outputs");
}

}  // namespace

MaskPair ratio_mask(const SpectrogramPair& beam_outputs, const PostmaskParams& params) {
  check(beam_outputs);
  if (!(params.exponent > 0.0)) fail(ErrorCode::InvalidArgument, "mask exponent must be positive");
  if (!(params.floor >= 0.0 && params.floor <= 1.0)) fail(ErrorCode::InvalidArgument, "mask floor must lie in [0, 1]");
  const auto b1 = beam_outputs.first.data();
  const auto b2 = beam_outputs.second.data();
  const std::size_t n = b1.size();

  MaskPair masks{std::vector<double>(n), std::vector<double>(n), beam_outputs.first.frames(),
                 beam_outputs.first.bins(), params};
  const auto& kern = simd::kernels();
  kern.cmag(masks.first.data(), b1.data(), n);
  kern.cmag(masks.second.data(), b2.data(), n);
  for (std::size_t i = 0; i < n; ++i) {
    double p1 = masks.first[i], p2 = masks.second[i];
    if (params.exponent == 2.0) {
      p1 *= p1;
      p2 *= p2;
    } else {
      p1 = std::pow(p1, params.exponent);
      p2 = std::pow(p2, params.exponent);
    }
    const double denom = p1 + p2 + kMaskEps;
    masks.first[i] = std::max(params.floor, p1 / denom);
    masks.second[i] = std::max(params.floor, p2 / denom);
  }
  return masks;
}

SpectrogramPair apply_masks(const MaskPair& masks, const SpectrogramPair& beam_outputs) {
  check(beam_outputs);
  if (masks.first.size() != beam_outputs.first.data().size()) fail(ErrorCode::Shape, "mask size mismatch");
  SpectrogramPair out = beam_outputs;
  auto d1 = out.first.data();
  auto d2 = out.second.data();
  for (std::size_t i = 0; i < d1.size(); ++i) {
    d1[i] *= masks.first[i];
    d2[i] *= masks.second[i];
  }
  return out;
}

}  // namespace farsep
