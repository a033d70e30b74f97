#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dctnet/jpeg/types.hpp"

namespace dctnet::jpeg {

DctBlockGrid dequantize(const QuantizedBlocks& quantized, const QuantTable& table);

struct DecodedDct {
  int width = 0;
  int height = 0;
  ChromaLayout chroma = ChromaLayout::Gray;
  std::vector<ComponentLayout> layouts;
  std::vector<DctBlockGrid> components;
};

// parse -> entropy decode -> dequantize for every component.
DecodedDct decode_dct(std::span<const uint8_t> bytes);

struct DctTriplet {
  DctBlockGrid y;
  DctBlockGrid cb;
  DctBlockGrid cr;
  ChromaLayout chroma = ChromaLayout::Yuv420;
};

// Requires a three-component 4:2:0 or 4:4:4 stream. No inverse transform.
DctTriplet decode_dct_tensor(std::span<const uint8_t> bytes);

struct Image {
  int width = 0;
  int height = 0;
  int channels = 0;  // 1 (gray) or 3 (RGB)
  std::vector<uint8_t> pixels;  // interleaved, row-major
};

// Verification pipeline: partial decode, oracle IDCT, nearest-neighbour
// chroma upsampling, JFIF YCbCr -> RGB.
Image decode_pixels(std::span<const uint8_t> bytes);
Image pixels_from_dct(const DecodedDct& decoded);

}  // namespace dctnet::jpeg
