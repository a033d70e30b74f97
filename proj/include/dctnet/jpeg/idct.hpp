#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace dctnet::jpeg {

// Orthonormal 8x8 type-III DCT with +128 level shift, clamped to [0, 255].
// Input in raster frequency order. Used only on the verification path.
std::array<double, 64> inverse_dct_block(std::span<const int32_t, 64> block);

// Number of inverse_dct_block calls made so far by this process.
uint64_t idct_invocations();

}  // namespace dctnet::jpeg
