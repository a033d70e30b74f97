#include "dctnet/jpeg/entropy.hpp"

#include <string>

#include "dctnet/error.hpp"
#include "dctnet/jpeg/huffman.hpp"

namespace dctnet::jpeg {
namespace {

int32_t extend(uint32_t value, int size) {
  if (size == 0) return 0;
  int32_t v = static_cast<int32_t>(value);
  return v < (1 << (size - 1)) ? v - (1 << size) + 1 : v;
}

struct ComponentState {
  HuffmanDecoder dc;
  HuffmanDecoder ac;
  int32_t predictor = 0;
};

void decode_block(BitReader& reader, ComponentState& state, std::span<int32_t, 64> out) {
  int dc_size = state.dc.decode(reader);
  if (dc_size > 11) throw Error(Errc::InvalidHuffmanCode, "DC magnitude category above 11");
  state.predictor += extend(reader.get(dc_size), dc_size);
  out[0] = state.predictor;

  for (int k = 1; k < 64;) {
    int rs = state.ac.decode(reader);
    int run = rs >> 4;
    int size = rs & 0x0F;
    if (size == 0) {
      if (run != 15) break;  // EOB
      k += 16;
      if (k > 64) throw Error(Errc::CoefficientIndexOverflow, "zero run past coefficient 63");
      continue;
    }
    k += run;
    if (k > 63) throw Error(Errc::CoefficientIndexOverflow, "run past coefficient 63");
    out[k] = extend(reader.get(size), size);
    ++k;
  }
}

}  // namespace

std::vector<QuantizedBlocks> entropy_decode(const ParsedJpeg& jpeg) {
  std::vector<QuantizedBlocks> grids;
  for (const auto& c : jpeg.components) {
    QuantizedBlocks g;
    g.component_id = c.id;
    g.width_blocks = c.padded_width_blocks;
    g.height_blocks = c.padded_height_blocks;
    g.coeffs.assign(static_cast<size_t>(g.width_blocks) * g.height_blocks * 64, 0);
    grids.push_back(std::move(g));
  }

  for (const auto& scan : jpeg.scans) {
    std::vector<ComponentState> states;
    for (const auto& sc : scan.components) states.push_back({HuffmanDecoder(sc.dc_table), HuffmanDecoder(sc.ac_table), 0});

    BitReader reader(scan.data);
    const bool interleaved = scan.components.size() > 1;
    int mcu_cols, mcu_rows;
    if (interleaved) {
      mcu_cols = jpeg.mcu_cols();
      mcu_rows = jpeg.mcu_rows();
    } else {
      const auto& c = jpeg.components[scan.components[0].component_index];
      mcu_cols = c.width_blocks;
      mcu_rows = c.height_blocks;
    }

    const long total = static_cast<long>(mcu_cols) * mcu_rows;
    int restart_index = 0;
    for (long mcu = 0; mcu < total; ++mcu) {
      if (scan.restart_interval > 0 && mcu > 0 && mcu % scan.restart_interval == 0) {
        reader.restart(restart_index++);
        for (auto& s : states) s.predictor = 0;
      }
      int mrow = static_cast<int>(mcu / mcu_cols);
      int mcol = static_cast<int>(mcu % mcu_cols);
      for (size_t i = 0; i < scan.components.size(); ++i) {
        int ci = scan.components[i].component_index;
        const auto& layout = jpeg.components[ci];
        auto& grid = grids[ci];
        if (interleaved) {
          for (int by = 0; by < layout.v; ++by)
            for (int bx = 0; bx < layout.h; ++bx)
              decode_block(reader, states[i], grid.block(mrow * layout.v + by, mcol * layout.h + bx));
        } else {
          decode_block(reader, states[i], grid.block(mrow, mcol));
        }
      }
    }
  }
  return grids;
}

}  // namespace dctnet::jpeg
