#include "dctnet/model/dct_input.hpp"

#include "dctnet/error.hpp"
#include "dctnet/jpeg/zigzag.hpp"

namespace dctnet::model {

tensor::Tensor<float> assemble_dct_input(const jpeg::DctBlockGrid& y, const jpeg::DctBlockGrid& cb,
                                         const jpeg::DctBlockGrid& cr) {
  const int h = y.height_blocks, w = y.width_blocks;
  auto dims = [](const jpeg::DctBlockGrid& g) {
    return std::to_string(g.height_blocks) + "x" + std::to_string(g.width_blocks);
  };
  if (cb.height_blocks != cr.height_blocks || cb.width_blocks != cr.width_blocks)
    throw Error(Errc::GeometryMismatch, "Cb grid " + dims(cb) + " differs from Cr grid " + dims(cr));
  int factor = 0;
  if (cb.height_blocks == h && cb.width_blocks == w)
    factor = 1;
  else if (2 * cb.height_blocks == h && 2 * cb.width_blocks == w)
    factor = 2;
  else
    throw Error(Errc::GeometryMismatch, "chroma grid " + dims(cb) + " is neither equal to nor half of luma " + dims(y));

  auto out = tensor::Tensor<float>::zeros({192, h, w});
  float* data = out.data();
  const size_t plane = size_t(h) * w;
  const jpeg::DctBlockGrid* grids[3] = {&y, &cb, &cr};
  for (int comp = 0; comp < 3; ++comp) {
    const int f = comp == 0 ? 1 : factor;
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < w; ++c) {
        auto blk = grids[comp]->block(r / f, c / f);
        for (int k = 0; k < 64; ++k)
          data[size_t(comp * 64 + k) * plane + size_t(r) * w + c] = float(blk[jpeg::kZigzagToRaster[k]]);
      }
  }
  return out;
}

}  // namespace dctnet::model
