#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace dctnet::jpeg {

struct QuantTable {
  int id = 0;
  std::array<uint16_t, 64> values{};  // zig-zag order, all >= 1
};

enum class HuffmanClass { DC = 0, AC = 1 };

struct HuffmanTable {
  HuffmanClass table_class = HuffmanClass::DC;
  int id = 0;
  std::array<uint8_t, 16> code_lengths{};  // counts of codes of length 1..16
  std::vector<uint8_t> symbols;
};

struct ComponentLayout {
  int id = 0;
  int h = 1;
  int v = 1;
  int quant_id = 0;
  // Blocks covering the component's own sample area.
  int width_blocks = 0;
  int height_blocks = 0;
  // Block grid padded out to whole MCUs; edge MCUs are decoded in full.
  int padded_width_blocks = 0;
  int padded_height_blocks = 0;
};

enum class ChromaLayout { Gray, Yuv444, Yuv420 };

struct ScanComponent {
  int component_index = 0;  // index into ParsedJpeg::components
  HuffmanTable dc_table;
  HuffmanTable ac_table;
};

struct Scan {
  std::vector<ScanComponent> components;
  int restart_interval = 0;
  std::vector<uint8_t> data;  // entropy-coded bytes, stuffing and RSTn kept
};

struct ParsedJpeg {
  int width = 0;
  int height = 0;
  int precision = 8;
  ChromaLayout chroma = ChromaLayout::Gray;
  int max_h = 1;
  int max_v = 1;
  std::vector<ComponentLayout> components;
  std::array<std::optional<QuantTable>, 4> quant_tables;
  int restart_interval = 0;  // last DRI value seen
  std::vector<Scan> scans;

  int mcu_cols() const { return (width + 8 * max_h - 1) / (8 * max_h); }
  int mcu_rows() const { return (height + 8 * max_v - 1) / (8 * max_v); }
};

// Entropy-decoded but not dequantized coefficients, zig-zag order per block.
struct QuantizedBlocks {
  int component_id = 0;
  int width_blocks = 0;
  int height_blocks = 0;
  std::vector<int32_t> coeffs;  // [height_blocks][width_blocks][64]

  std::span<int32_t, 64> block(int row, int col) {
    return std::span<int32_t, 64>(coeffs.data() + (static_cast<size_t>(row) * width_blocks + col) * 64, 64);
  }
  std::span<const int32_t, 64> block(int row, int col) const {
    return std::span<const int32_t, 64>(coeffs.data() + (static_cast<size_t>(row) * width_blocks + col) * 64,
                                        64);
  }
};

// Dequantized DCT blocks in raster frequency order (row = vertical frequency).
struct DctBlockGrid {
  int component_id = 0;
  int width_blocks = 0;
  int height_blocks = 0;
  std::vector<int32_t> coeffs;  // [height_blocks][width_blocks][64]

  std::span<const int32_t, 64> block(int row, int col) const {
    return std::span<const int32_t, 64>(coeffs.data() + (static_cast<size_t>(row) * width_blocks + col) * 64,
                                        64);
  }
  std::span<int32_t, 64> block(int row, int col) {
    return std::span<int32_t, 64>(coeffs.data() + (static_cast<size_t>(row) * width_blocks + col) * 64, 64);
  }
};

}  // namespace dctnet::jpeg
