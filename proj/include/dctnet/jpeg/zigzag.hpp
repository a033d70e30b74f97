#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <utility>

namespace dctnet::jpeg {

// kZigzagToRaster[k] is the raster index (row * 8 + col) of the k-th
// coefficient in the JPEG zig-zag scan.
inline constexpr std::array<int, 64> kZigzagToRaster = {
    0,  1,  8,  16, 9,  2,  3,  10, 17, 24, 32, 25, 18, 11, 4,  5,
    12, 19, 26, 33, 40, 48, 41, 34, 27, 20, 13, 6,  7,  14, 21, 28,
    35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23, 30, 37, 44, 51,
    58, 59, 52, 45, 38, 31, 39, 46, 53, 60, 61, 54, 47, 55, 62, 63};

inline constexpr std::array<int, 64> kRasterToZigzag = [] {
  std::array<int, 64> inv{};
  for (int k = 0; k < 64; ++k) inv[kZigzagToRaster[k]] = k;
  return inv;
}();

// (row, col) = (vertical frequency, horizontal frequency) of zig-zag index k.
constexpr std::pair<int, int> zigzag_position(int k) {
  return {kZigzagToRaster[k] / 8, kZigzagToRaster[k] % 8};
}

template <typename T>
std::array<T, 64> zigzag_to_raster(std::span<const T, 64> zz) {
  std::array<T, 64> out{};
  for (int k = 0; k < 64; ++k) out[kZigzagToRaster[k]] = zz[k];
  return out;
}

template <typename T>
std::array<T, 64> raster_to_zigzag(std::span<const T, 64> raster) {
  std::array<T, 64> out{};
  for (int k = 0; k < 64; ++k) out[k] = raster[kZigzagToRaster[k]];
  return out;
}

}  // namespace dctnet::jpeg
