#pragma once

#include <iosfwd>
#include <string>

#include "dctnet/jpeg/decoder.hpp"

namespace dctnet::jpeg {

// Debug dump: a 16-byte little-endian header
//   "DCTG" | u16 version | u16 component count |
//   u16 luma height_blocks | u16 luma width_blocks |
//   u8[3] sampling (h << 4 | v) per component | u8 reserved
// followed by int32 LE coefficients in
// (component, block-row, block-col, raster-frequency) order.
// Component grid dims are luma dims scaled by (h / max_h, v / max_v).
inline constexpr char kDumpMagic[4] = {'D', 'C', 'T', 'G'};

void write_coefficient_dump(std::ostream& out, const DecodedDct& decoded);
DecodedDct read_coefficient_dump(std::istream& in);

}  // namespace dctnet::jpeg
