#pragma once

#include <cstdint>
#include <span>

#include "dctnet/jpeg/types.hpp"

namespace dctnet::jpeg {

// Parses a baseline sequential (SOF0) Huffman JPEG. Throws Error with
// UnsupportedFrame for progressive/lossless/arithmetic frames,
// UnsupportedSampling for layouts other than gray/4:4:4/4:2:0,
// TruncatedStream when the stream ends before EOI and BadMarker for
// malformed segments.
ParsedJpeg parse_jpeg(std::span<const uint8_t> bytes);

}  // namespace dctnet::jpeg
