#include "dctnet/jpeg/decoder.hpp"

#include <algorithm>
#include <cmath>

#include "dctnet/error.hpp"
#include "dctnet/jpeg/entropy.hpp"
#include "dctnet/jpeg/idct.hpp"
#include "dctnet/jpeg/parser.hpp"
#include "dctnet/jpeg/zigzag.hpp"

namespace dctnet::jpeg {

DctBlockGrid dequantize(const QuantizedBlocks& quantized, const QuantTable& table) {
  DctBlockGrid grid;
  grid.component_id = quantized.component_id;
  grid.width_blocks = quantized.width_blocks;
  grid.height_blocks = quantized.height_blocks;
  grid.coeffs.resize(quantized.coeffs.size());
  const size_t blocks = quantized.coeffs.size() / 64;
  for (size_t b = 0; b < blocks; ++b) {
    const int32_t* zz = quantized.coeffs.data() + b * 64;
    int32_t* raster = grid.coeffs.data() + b * 64;
    for (int k = 0; k < 64; ++k) raster[kZigzagToRaster[k]] = zz[k] * static_cast<int32_t>(table.values[k]);
  }
  return grid;
}

DecodedDct decode_dct(std::span<const uint8_t> bytes) {
  ParsedJpeg parsed = parse_jpeg(bytes);
  std::vector<QuantizedBlocks> quantized = entropy_decode(parsed);

  DecodedDct out;
  out.width = parsed.width;
  out.height = parsed.height;
  out.chroma = parsed.chroma;
  out.layouts = parsed.components;
  for (size_t i = 0; i < quantized.size(); ++i)
    out.components.push_back(dequantize(quantized[i], *parsed.quant_tables[parsed.components[i].quant_id]));
  return out;
}

DctTriplet decode_dct_tensor(std::span<const uint8_t> bytes) {
  DecodedDct d = decode_dct(bytes);
  if (d.components.size() != 3)
    throw Error(Errc::UnsupportedSampling, "DCT tensor decoding needs a three-component image");
  return DctTriplet{std::move(d.components[0]), std::move(d.components[1]), std::move(d.components[2]), d.chroma};
}

namespace {

uint8_t to_u8(double v) { return static_cast<uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

// Ties to even, as the reference float IDCT does; exact .5 outputs are common
// for DC-only chroma blocks at low quality.
uint8_t idct_to_u8(double v) { return static_cast<uint8_t>(std::clamp(std::nearbyint(v), 0.0, 255.0)); }

// Reconstructs one component's sample plane over its padded block grid.
std::vector<uint8_t> sample_plane(const DctBlockGrid& grid) {
  const int stride = grid.width_blocks * 8;
  std::vector<uint8_t> plane(static_cast<size_t>(stride) * grid.height_blocks * 8);
  for (int br = 0; br < grid.height_blocks; ++br)
    for (int bc = 0; bc < grid.width_blocks; ++bc) {
      auto px = inverse_dct_block(grid.block(br, bc));
      for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x)
          plane[static_cast<size_t>(br * 8 + y) * stride + bc * 8 + x] = idct_to_u8(px[y * 8 + x]);
    }
  return plane;
}

}  // namespace

Image pixels_from_dct(const DecodedDct& decoded) {
  Image img;
  img.width = decoded.width;
  img.height = decoded.height;

  if (decoded.components.size() == 1) {
    img.channels = 1;
    const auto& g = decoded.components[0];
    auto plane = sample_plane(g);
    img.pixels.resize(static_cast<size_t>(img.width) * img.height);
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x)
        img.pixels[static_cast<size_t>(y) * img.width + x] = plane[static_cast<size_t>(y) * g.width_blocks * 8 + x];
    return img;
  }

  img.channels = 3;
  int max_h = 1, max_v = 1;
  for (const auto& l : decoded.layouts) {
    max_h = std::max(max_h, l.h);
    max_v = std::max(max_v, l.v);
  }
  std::array<std::vector<uint8_t>, 3> planes;
  std::array<int, 3> strides{}, sx{}, sy{};
  for (int c = 0; c < 3; ++c) {
    planes[c] = sample_plane(decoded.components[c]);
    strides[c] = decoded.components[c].width_blocks * 8;
    sx[c] = max_h / decoded.layouts[c].h;
    sy[c] = max_v / decoded.layouts[c].v;
  }
  img.pixels.resize(static_cast<size_t>(img.width) * img.height * 3);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      auto sample = [&](int c) {
        return static_cast<double>(planes[c][static_cast<size_t>(y / sy[c]) * strides[c] + x / sx[c]]);
      };
      double Y = sample(0), Cb = sample(1) - 128.0, Cr = sample(2) - 128.0;
      uint8_t* p = &img.pixels[(static_cast<size_t>(y) * img.width + x) * 3];
      p[0] = to_u8(Y + 1.402 * Cr);
      p[1] = to_u8(Y - 0.344136 * Cb - 0.714136 * Cr);
      p[2] = to_u8(Y + 1.772 * Cb);
    }
  return img;
}

Image decode_pixels(std::span<const uint8_t> bytes) { return pixels_from_dct(decode_dct(bytes)); }

}  // namespace dctnet::jpeg
