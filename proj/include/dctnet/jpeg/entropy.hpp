#pragma once

#include <vector>

#include "dctnet/jpeg/types.hpp"

namespace dctnet::jpeg {

// Huffman/run-length decodes every scan of a parsed stream. Returns one
// grid per frame component (padded to whole MCUs), coefficients in zig-zag
// order, DC values already accumulated from their differentials.
std::vector<QuantizedBlocks> entropy_decode(const ParsedJpeg& jpeg);

}  // namespace dctnet::jpeg
