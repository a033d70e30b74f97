#pragma once

#include <random>

#include "dctnet/tensor/tensor.hpp"

namespace dctnet::harness {

using tensor::Tensor;

// Mirror of a [192, Hb, Wb] DCT tensor about the vertical axis: block columns
// reversed, and within each block the coefficients with odd horizontal
// frequency negated. Exact, and its own inverse.
Tensor<float> flip_dct(const Tensor<float>& x);

// Mirror of a [C, H, W] pixel tensor about the vertical axis.
Tensor<float> flip_pixels(const Tensor<float>& x);

// [C, h, w] window at (top, left). Throws CropTooLarge when it does not fit.
Tensor<float> crop(const Tensor<float>& x, int top, int left, int h, int w);

// Random block-aligned crop_blocks x crop_blocks window (0 keeps the grid),
// then a flip with probability 1/2 when `flip` is set.
Tensor<float> augment_dct(const Tensor<float>& x, int crop_blocks, bool flip, std::mt19937_64& rng);
// Same for pixels with a crop side of `crop` pixels at any offset.
Tensor<float> augment_pixels(const Tensor<float>& x, int crop, bool flip, std::mt19937_64& rng);

// Centered window, offset rounded down; side 0 keeps the input.
Tensor<float> center_crop(const Tensor<float>& x, int side);

}  // namespace dctnet::harness
