#include "dctnet/jpeg/parser.hpp"

#include <algorithm>
#include <string>

#include "dctnet/error.hpp"

namespace dctnet::jpeg {
namespace {

constexpr uint8_t kSOI = 0xD8;
constexpr uint8_t kEOI = 0xD9;
constexpr uint8_t kSOF0 = 0xC0;
constexpr uint8_t kDHT = 0xC4;
constexpr uint8_t kDAC = 0xCC;
constexpr uint8_t kDQT = 0xDB;
constexpr uint8_t kDRI = 0xDD;
constexpr uint8_t kSOS = 0xDA;

bool is_sof(uint8_t m) { return m >= 0xC0 && m <= 0xCF && m != kDHT && m != kDAC && m != 0xC8; }
bool is_rst(uint8_t m) { return m >= 0xD0 && m <= 0xD7; }

class Cursor {
 public:
  explicit Cursor(std::span<const uint8_t> bytes) : bytes_(bytes) {}

  bool done() const { return pos_ >= bytes_.size(); }
  size_t pos() const { return pos_; }
  size_t remaining() const { return bytes_.size() - pos_; }

  uint8_t u8() {
    if (pos_ >= bytes_.size()) throw Error(Errc::TruncatedStream, "unexpected end of stream");
    return bytes_[pos_++];
  }
  uint16_t u16() {
    uint16_t hi = u8();
    return static_cast<uint16_t>((hi << 8) | u8());
  }
  std::span<const uint8_t> take(size_t n) {
    if (remaining() < n) throw Error(Errc::TruncatedStream, "segment runs past end of stream");
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::span<const uint8_t> rest() const { return bytes_.subspan(pos_); }
  void advance(size_t n) { pos_ += n; }

 private:
  std::span<const uint8_t> bytes_;
  size_t pos_ = 0;
};

class SegmentReader {
 public:
  explicit SegmentReader(std::span<const uint8_t> seg) : seg_(seg) {}
  uint8_t u8() {
    if (pos_ >= seg_.size()) throw Error(Errc::BadMarker, "segment shorter than its contents");
    return seg_[pos_++];
  }
  uint16_t u16() {
    uint16_t hi = u8();
    return static_cast<uint16_t>((hi << 8) | u8());
  }
  size_t remaining() const { return seg_.size() - pos_; }

 private:
  std::span<const uint8_t> seg_;
  size_t pos_ = 0;
};

void read_dqt(SegmentReader& r, ParsedJpeg& out) {
  while (r.remaining() > 0) {
    uint8_t pq_tq = r.u8();
    int precision = pq_tq >> 4;
    int id = pq_tq & 0x0F;
    if (id > 3 || precision > 1) throw Error(Errc::BadMarker, "bad DQT table header");
    QuantTable table;
    table.id = id;
    for (auto& v : table.values) {
      v = precision == 0 ? r.u8() : r.u16();
      if (v == 0) throw Error(Errc::BadMarker, "quantization value of zero");
    }
    out.quant_tables[id] = table;
  }
}

void read_dht(SegmentReader& r, std::array<std::optional<HuffmanTable>, 4>& dc,
              std::array<std::optional<HuffmanTable>, 4>& ac) {
  while (r.remaining() > 0) {
    uint8_t tc_th = r.u8();
    int tc = tc_th >> 4;
    int th = tc_th & 0x0F;
    if (tc > 1 || th > 3) throw Error(Errc::BadMarker, "bad DHT table header");
    HuffmanTable table;
    table.table_class = tc == 0 ? HuffmanClass::DC : HuffmanClass::AC;
    table.id = th;
    int total = 0;
    for (auto& n : table.code_lengths) {
      n = r.u8();
      total += n;
    }
    if (total > 256) throw Error(Errc::BadMarker, "DHT declares more than 256 symbols");
    table.symbols.resize(static_cast<size_t>(total));
    for (auto& s : table.symbols) s = r.u8();
    (tc == 0 ? dc : ac)[th] = std::move(table);
  }
}

void read_sof0(SegmentReader& r, ParsedJpeg& out) {
  out.precision = r.u8();
  out.height = r.u16();
  out.width = r.u16();
  int count = r.u8();
  if (out.precision != 8) throw Error(Errc::UnsupportedFrame, "only 8-bit baseline precision is supported");
  if (out.width == 0 || out.height == 0) throw Error(Errc::UnsupportedFrame, "zero image dimension (DNL not supported)");
  if (count != 1 && count != 3) throw Error(Errc::UnsupportedSampling, "component count must be 1 or 3");
  for (int i = 0; i < count; ++i) {
    ComponentLayout c;
    c.id = r.u8();
    uint8_t hv = r.u8();
    c.h = hv >> 4;
    c.v = hv & 0x0F;
    c.quant_id = r.u8();
    if (c.quant_id > 3) throw Error(Errc::BadMarker, "quantization table id out of range");
    out.components.push_back(c);
  }

  if (count == 1) {
    // A lone component is coded non-interleaved; its factors do not matter.
    out.components[0].h = out.components[0].v = 1;
    out.chroma = ChromaLayout::Gray;
  } else {
    const auto& y = out.components[0];
    const auto& cb = out.components[1];
    const auto& cr = out.components[2];
    auto unit = [](const ComponentLayout& c) { return c.h == 1 && c.v == 1; };
    if (unit(y) && unit(cb) && unit(cr)) {
      out.chroma = ChromaLayout::Yuv444;
    } else if (y.h == 2 && y.v == 2 && unit(cb) && unit(cr)) {
      out.chroma = ChromaLayout::Yuv420;
    } else {
      throw Error(Errc::UnsupportedSampling, "only 4:4:4 and 4:2:0 chroma layouts are supported");
    }
  }

  out.max_h = 1;
  out.max_v = 1;
  for (const auto& c : out.components) {
    out.max_h = std::max(out.max_h, c.h);
    out.max_v = std::max(out.max_v, c.v);
  }
  for (auto& c : out.components) {
    int cw = (out.width * c.h + out.max_h - 1) / out.max_h;
    int ch = (out.height * c.v + out.max_v - 1) / out.max_v;
    c.width_blocks = (cw + 7) / 8;
    c.height_blocks = (ch + 7) / 8;
    if (count == 1) {
      c.padded_width_blocks = c.width_blocks;
      c.padded_height_blocks = c.height_blocks;
    } else {
      c.padded_width_blocks = out.mcu_cols() * c.h;
      c.padded_height_blocks = out.mcu_rows() * c.v;
    }
  }
}

// Copies entropy-coded bytes up to (not including) the first marker that
// is neither stuffing (FF00) nor a restart marker.
std::vector<uint8_t> read_entropy_segment(Cursor& cur) {
  auto rest = cur.rest();
  size_t i = 0;
  while (true) {
    if (i >= rest.size()) throw Error(Errc::TruncatedStream, "entropy-coded segment not terminated");
    if (rest[i] != 0xFF) {
      ++i;
      continue;
    }
    size_t j = i + 1;
    while (j < rest.size() && rest[j] == 0xFF) ++j;  // fill bytes
    if (j >= rest.size()) throw Error(Errc::TruncatedStream, "entropy-coded segment not terminated");
    if (rest[j] == 0x00 || is_rst(rest[j])) {
      i = j + 1;
      continue;
    }
    break;
  }
  std::vector<uint8_t> data(rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(i));
  cur.advance(i);
  return data;
}

}  // namespace

ParsedJpeg parse_jpeg(std::span<const uint8_t> bytes) {
  Cursor cur(bytes);
  if (cur.remaining() < 2 || cur.u8() != 0xFF || cur.u8() != kSOI)
    throw Error(Errc::BadMarker, "stream does not start with SOI");

  ParsedJpeg out;
  std::array<std::optional<HuffmanTable>, 4> dc_tables, ac_tables;
  bool have_frame = false;

  while (true) {
    if (cur.done()) throw Error(Errc::TruncatedStream, "missing EOI marker");
    uint8_t b = cur.u8();
    if (b != 0xFF) throw Error(Errc::BadMarker, "expected marker at offset " + std::to_string(cur.pos() - 1));
    uint8_t marker = cur.u8();
    while (marker == 0xFF) marker = cur.u8();

    if (marker == kEOI) break;
    if (marker == kSOI || is_rst(marker) || marker == 0x01 || marker == 0x00)
      throw Error(Errc::BadMarker, "unexpected standalone marker");

    uint16_t length = cur.u16();
    if (length < 2) throw Error(Errc::BadMarker, "segment length below 2");
    SegmentReader seg(cur.take(length - 2u));

    if (is_sof(marker)) {
      if (marker != kSOF0)
        throw Error(Errc::UnsupportedFrame, "only baseline sequential (SOF0) frames are supported");
      if (have_frame) throw Error(Errc::BadMarker, "multiple SOF segments");
      read_sof0(seg, out);
      have_frame = true;
    } else if (marker == kDHT) {
      read_dht(seg, dc_tables, ac_tables);
    } else if (marker == kDAC) {
      throw Error(Errc::UnsupportedFrame, "arithmetic coding is not supported");
    } else if (marker == kDQT) {
      read_dqt(seg, out);
    } else if (marker == kDRI) {
      out.restart_interval = seg.u16();
    } else if (marker == kSOS) {
      if (!have_frame) throw Error(Errc::BadMarker, "SOS before SOF");
      Scan scan;
      scan.restart_interval = out.restart_interval;
      int ns = seg.u8();
      if (ns < 1 || ns > static_cast<int>(out.components.size())) throw Error(Errc::BadMarker, "bad scan component count");
      for (int i = 0; i < ns; ++i) {
        int id = seg.u8();
        uint8_t td_ta = seg.u8();
        auto it = std::find_if(out.components.begin(), out.components.end(),
                               [id](const ComponentLayout& c) { return c.id == id; });
        if (it == out.components.end()) throw Error(Errc::BadMarker, "scan references unknown component");
        int td = td_ta >> 4;
        int ta = td_ta & 0x0F;
        if (td > 3 || ta > 3 || !dc_tables[td] || !ac_tables[ta])
          throw Error(Errc::BadMarker, "scan references undefined Huffman table");
        ScanComponent sc;
        sc.component_index = static_cast<int>(it - out.components.begin());
        sc.dc_table = *dc_tables[td];
        sc.ac_table = *ac_tables[ta];
        scan.components.push_back(std::move(sc));
      }
      int ss = seg.u8();
      int se = seg.u8();
      int ah_al = seg.u8();
      if (ss != 0 || se != 63 || ah_al != 0) throw Error(Errc::UnsupportedFrame, "scan is not a sequential full-spectrum scan");
      for (const auto& sc : scan.components) {
        if (!out.quant_tables[out.components[sc.component_index].quant_id])
          throw Error(Errc::BadMarker, "component quantization table not defined");
      }
      scan.data = read_entropy_segment(cur);
      out.scans.push_back(std::move(scan));
    }
    // APPn, COM and anything else with a length field is skipped.
  }

  if (!have_frame) throw Error(Errc::BadMarker, "no frame header");
  if (out.scans.empty()) throw Error(Errc::BadMarker, "no scan");
  return out;
}

}  // namespace dctnet::jpeg
