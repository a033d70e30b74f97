#pragma once

#include "dctnet/jpeg/types.hpp"
#include "dctnet/tensor/tensor.hpp"

namespace dctnet::model {

// [192, Hb, Wb] with channel = component * 64 + zig-zag index. Chroma grids of
// half the luma size are upsampled by block duplication. Throws
// GeometryMismatch for any other chroma geometry.
tensor::Tensor<float> assemble_dct_input(const jpeg::DctBlockGrid& y, const jpeg::DctBlockGrid& cb,
                                         const jpeg::DctBlockGrid& cr);

}  // namespace dctnet::model
