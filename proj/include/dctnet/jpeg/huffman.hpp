#pragma once

#include <array>
#include <cstdint>
#include <span>

#include "dctnet/jpeg/types.hpp"

namespace dctnet::jpeg {

class BitReader;

// Canonical Huffman decoder (T.81 Annex F.2.2.3) with a 9-bit lookahead
// table for the common short codes.
class HuffmanDecoder {
 public:
  HuffmanDecoder() = default;
  explicit HuffmanDecoder(const HuffmanTable& table);

  // Throws InvalidHuffmanCode when the bit pattern matches no code.
  int decode(BitReader& reader) const;

 private:
  static constexpr int kLookaheadBits = 9;

  std::array<int32_t, 18> maxcode_{};
  std::array<int32_t, 17> mincode_{};
  std::array<int32_t, 17> valptr_{};
  std::array<uint8_t, 256> symbols_{};
  // (length << 8) | symbol, or 0 when the code is longer than the lookahead.
  std::array<uint16_t, 1 << kLookaheadBits> lookahead_{};
};

// Reads entropy-coded bits MSB first, removing 0xFF00 stuffing. A marker
// stops the feed; further reads see zero bits until restart() consumes it.
class BitReader {
 public:
  explicit BitReader(std::span<const uint8_t> data) : data_(data) {}

  uint32_t peek(int count);
  void skip(int count);
  uint32_t get(int count) {
    uint32_t v = peek(count);
    skip(count);
    return v;
  }

  // Drops buffered bits and consumes the RSTn marker expected next.
  void restart(int expected_index);

 private:
  void fill();

  std::span<const uint8_t> data_;
  size_t pos_ = 0;
  uint64_t acc_ = 0;
  int bits_ = 0;
  int64_t real_bits_ = 0;  // bits in acc_ that came from the stream
  bool at_marker_ = false;
};

}  // namespace dctnet::jpeg
