#pragma once

// Thin wrapper over the system libjpeg, used by the tests as the reference
// encoder and decoder. Not part of the toolkit proper.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace dctnet::testing {

struct EncodeOptions {
  int quality = 75;
  bool subsample_420 = true;  // false: 4:4:4
  int restart_interval = 0;   // in MCUs, 0 disables restarts
  bool optimize_coding = false;
  bool progressive = false;
};

// pixels: interleaved RGB (channels = 3) or gray (channels = 1).
std::vector<uint8_t> reference_encode(std::span<const uint8_t> pixels, int width, int height, int channels,
                                      const EncodeOptions& options);

struct ReferenceCoefficients {
  struct Component {
    int width_blocks = 0;   // blocks covering the component area
    int height_blocks = 0;
    int quant_id = 0;
    std::vector<int16_t> coeffs;  // [height_blocks][width_blocks][64], natural (raster) order
  };
  std::vector<Component> components;
  std::vector<std::array<uint16_t, 64>> quant_tables;  // natural order, index by table id
};

// Zig-zag -> natural order table exported by the reference library.
std::span<const int, 64> reference_natural_order();

ReferenceCoefficients reference_read_coefficients(std::span<const uint8_t> jpeg);

struct ReferenceImage {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<uint8_t> pixels;
};

// Decodes with float IDCT and replicated (non-fancy) chroma upsampling.
ReferenceImage reference_decode(std::span<const uint8_t> jpeg);

}  // namespace dctnet::testing
