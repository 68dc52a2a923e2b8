#pragma once

#include <utility>
#include <vector>

#include "farsep/losses.hpp"
#include "farsep/wola.hpp"

namespace farsep {

struct PostmaskParams {
  double exponent = 2.0;
  double floor = 0.05;
};

// Real masks in [floor, 1], frames K x bins F, row-major like a mono frame.
struct MaskPair {
  std::vector<double> first;
  std::vector<double> second;
  std::size_t frames = 0;
  std::size_t bins = 0;
  PostmaskParams params;
};

// mask_i = max(floor, |B_i|^p / (|B_1|^p + |B_2|^p + eps))
MaskPair ratio_mask(const SpectrogramPair& beam_outputs, const PostmaskParams& params = {});

// mask_i * B_i
SpectrogramPair apply_masks(const MaskPair& masks, const SpectrogramPair& beam_outputs);

}  // namespace farsep
