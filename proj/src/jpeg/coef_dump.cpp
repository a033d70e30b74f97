#include "dctnet/jpeg/coef_dump.hpp"

#include <algorithm>
#include <cstring>
#include <istream>
#include <ostream>

#include "dctnet/error.hpp"

namespace dctnet::jpeg {
namespace {

void put_u16(std::ostream& out, uint16_t v) {
  const char b[2] = {static_cast<char>(v & 0xFF), static_cast<char>(v >> 8)};
  out.write(b, 2);
}

void put_i32(std::ostream& out, int32_t v) {
  uint32_t u = static_cast<uint32_t>(v);
  const char b[4] = {static_cast<char>(u & 0xFF), static_cast<char>((u >> 8) & 0xFF),
                     static_cast<char>((u >> 16) & 0xFF), static_cast<char>(u >> 24)};
  out.write(b, 4);
}

uint16_t get_u16(const unsigned char* p) { return static_cast<uint16_t>(p[0] | (p[1] << 8)); }

}  // namespace

void write_coefficient_dump(std::ostream& out, const DecodedDct& decoded) {
  const auto& comps = decoded.components;
  if (comps.empty() || comps.size() > 3) throw Error(Errc::BadConfig, "dump needs 1 to 3 components");
  out.write(kDumpMagic, 4);
  put_u16(out, 1);
  put_u16(out, static_cast<uint16_t>(comps.size()));
  put_u16(out, static_cast<uint16_t>(comps[0].height_blocks));
  put_u16(out, static_cast<uint16_t>(comps[0].width_blocks));
  char sampling[4] = {0, 0, 0, 0};
  for (size_t c = 0; c < comps.size(); ++c)
    sampling[c] = static_cast<char>((decoded.layouts[c].h << 4) | decoded.layouts[c].v);
  out.write(sampling, 4);
  for (const auto& g : comps)
    for (int32_t v : g.coeffs) put_i32(out, v);
  if (!out) throw Error(Errc::UnreadablePath, "failed writing coefficient dump");
}

DecodedDct read_coefficient_dump(std::istream& in) {
  unsigned char header[16];
  if (!in.read(reinterpret_cast<char*>(header), 16)) throw Error(Errc::TruncatedStream, "dump header truncated");
  if (std::memcmp(header, kDumpMagic, 4) != 0) throw Error(Errc::BadMarker, "not a coefficient dump");
  int count = get_u16(header + 6);
  int luma_h = get_u16(header + 8);
  int luma_w = get_u16(header + 10);
  if (count < 1 || count > 3) throw Error(Errc::BadMarker, "bad component count in dump");

  DecodedDct d;
  d.chroma = count == 1 ? ChromaLayout::Gray : ChromaLayout::Yuv444;
  int max_h = 1, max_v = 1;
  for (int c = 0; c < count; ++c) {
    ComponentLayout l;
    l.id = c + 1;
    l.h = header[12 + c] >> 4;
    l.v = header[12 + c] & 0x0F;
    if (l.h < 1 || l.v < 1) throw Error(Errc::BadMarker, "bad sampling factors in dump");
    max_h = std::max(max_h, l.h);
    max_v = std::max(max_v, l.v);
    d.layouts.push_back(l);
  }
  if (count == 3 && max_h == 2) d.chroma = ChromaLayout::Yuv420;
  for (int c = 0; c < count; ++c) {
    auto& l = d.layouts[c];
    DctBlockGrid g;
    g.component_id = l.id;
    g.width_blocks = luma_w * l.h / max_h;
    g.height_blocks = luma_h * l.v / max_v;
    l.padded_width_blocks = l.width_blocks = g.width_blocks;
    l.padded_height_blocks = l.height_blocks = g.height_blocks;
    g.coeffs.resize(static_cast<size_t>(g.width_blocks) * g.height_blocks * 64);
    for (auto& v : g.coeffs) {
      unsigned char b[4];
      if (!in.read(reinterpret_cast<char*>(b), 4)) throw Error(Errc::TruncatedStream, "dump payload truncated");
      v = static_cast<int32_t>(static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
                               (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24));
    }
    d.components.push_back(std::move(g));
  }
  d.width = luma_w * 8;
  d.height = luma_h * 8;
  return d;
}

}  // namespace dctnet::jpeg
