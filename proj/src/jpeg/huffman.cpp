#include "dctnet/jpeg/huffman.hpp"

#include "dctnet/error.hpp"

namespace dctnet::jpeg {

HuffmanDecoder::HuffmanDecoder(const HuffmanTable& table) {
  size_t total = 0;
  for (auto n : table.code_lengths) total += n;
  if (total != table.symbols.size() || total > symbols_.size())
    throw Error(Errc::InvalidHuffmanCode, "symbol count does not match code lengths");
  std::copy(table.symbols.begin(), table.symbols.end(), symbols_.begin());

  int32_t code = 0;
  int32_t k = 0;
  for (int len = 1; len <= 16; ++len) {
    int count = table.code_lengths[len - 1];
    valptr_[len] = k;
    mincode_[len] = code;
    code += count;
    k += count;
    maxcode_[len] = count ? code - 1 : -1;
    if (code > (1 << len)) throw Error(Errc::InvalidHuffmanCode, "code lengths are over-subscribed");
    code <<= 1;
  }
  maxcode_[17] = 0x7FFFFFFF;  // sentinel

  for (int len = 1; len <= kLookaheadBits; ++len) {
    for (int32_t c = mincode_[len]; c <= maxcode_[len]; ++c) {
      uint16_t entry = static_cast<uint16_t>((len << 8) | symbols_[valptr_[len] + c - mincode_[len]]);
      int shift = kLookaheadBits - len;
      for (int fill = 0; fill < (1 << shift); ++fill) lookahead_[(c << shift) | fill] = entry;
    }
  }
}

int HuffmanDecoder::decode(BitReader& reader) const {
  uint32_t peek = reader.peek(kLookaheadBits);
  if (uint16_t entry = lookahead_[peek]; entry != 0) {
    reader.skip(entry >> 8);
    return entry & 0xFF;
  }
  uint32_t bits16 = reader.peek(16);
  for (int len = kLookaheadBits + 1; len <= 16; ++len) {
    int32_t code = static_cast<int32_t>(bits16 >> (16 - len));
    if (code <= maxcode_[len]) {
      reader.skip(len);
      return symbols_[valptr_[len] + code - mincode_[len]];
    }
  }
  throw Error(Errc::InvalidHuffmanCode, "bit pattern matches no Huffman code");
}

void BitReader::fill() {
  while (bits_ <= 56) {
    uint8_t byte = 0;
    bool real = false;
    if (!at_marker_ && pos_ < data_.size()) {
      byte = data_[pos_];
      if (byte == 0xFF) {
        size_t next = pos_ + 1;
        while (next < data_.size() && data_[next] == 0xFF) ++next;
        if (next < data_.size() && data_[next] == 0x00) {
          pos_ = next + 1;
          real = true;
        } else {
          at_marker_ = true;
          pos_ = next - 1;  // leave the cursor on the marker's 0xFF
          byte = 0;
        }
      } else {
        ++pos_;
        real = true;
      }
    }
    acc_ |= static_cast<uint64_t>(byte) << (56 - bits_);
    bits_ += 8;
    if (real) real_bits_ += 8;
  }
}

uint32_t BitReader::peek(int count) {
  if (bits_ < count) fill();
  return static_cast<uint32_t>(acc_ >> (64 - count));
}

void BitReader::skip(int count) {
  if (bits_ < count) fill();
  acc_ <<= count;
  bits_ -= count;
  real_bits_ -= count;
  if (real_bits_ < 0) throw Error(Errc::TruncatedStream, "entropy-coded data exhausted");
}

void BitReader::restart(int expected_index) {
  acc_ = 0;
  bits_ = 0;
  real_bits_ = 0;
  // Skip to the marker (remaining pad bits of the last byte were dropped above).
  while (!at_marker_ && pos_ < data_.size()) {
    if (data_[pos_] == 0xFF && pos_ + 1 < data_.size() && data_[pos_ + 1] != 0x00) {
      at_marker_ = true;
      break;
    }
    ++pos_;
  }
  size_t m = pos_;
  while (m < data_.size() && data_[m] == 0xFF) ++m;
  if (m >= data_.size() || data_[m] != 0xD0 + (expected_index & 7))
    throw Error(Errc::BadMarker, "expected RST" + std::to_string(expected_index & 7));
  pos_ = m + 1;
  at_marker_ = false;
}

}  // namespace dctnet::jpeg
