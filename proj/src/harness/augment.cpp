#include "dctnet/harness/augment.hpp"

#include "dctnet/error.hpp"
#include "dctnet/jpeg/zigzag.hpp"

namespace dctnet::harness {

namespace {

void require_rank3(const Tensor<float>& x, const char* what) {
  if (!x.defined() || x.rank() != 3) throw Error(Errc::ShapeMismatch, std::string(what) + " expects [C, H, W]");
}

// Uniform integer in [0, n) from the raw generator output, independent of
// the standard library's distribution implementation.
int draw(std::mt19937_64& rng, int n) { return n <= 1 ? 0 : int(rng() % uint64_t(n)); }

}  // namespace

Tensor<float> flip_dct(const Tensor<float>& x) {
  require_rank3(x, "flip_dct");
  const int64_t c = x.dim(0), h = x.dim(1), w = x.dim(2);
  if (c % 64 != 0) throw Error(Errc::ShapeMismatch, "flip_dct expects 64 coefficient channels per component");
  auto y = Tensor<float>::zeros(x.shape());
  const float* src = x.data();
  float* dst = y.data();
  for (int64_t ch = 0; ch < c; ++ch) {
    // Horizontal frequency is the raster column of the zig-zag position.
    const float sign = (jpeg::kZigzagToRaster[size_t(ch % 64)] % 8) % 2 ? -1.f : 1.f;
    for (int64_t r = 0; r < h; ++r)
      for (int64_t col = 0; col < w; ++col)
        dst[(ch * h + r) * w + col] = sign * src[(ch * h + r) * w + (w - 1 - col)];
  }
  return y;
}

Tensor<float> flip_pixels(const Tensor<float>& x) {
  require_rank3(x, "flip_pixels");
  const int64_t c = x.dim(0), h = x.dim(1), w = x.dim(2);
  auto y = Tensor<float>::zeros(x.shape());
  for (int64_t i = 0; i < c * h; ++i)
    for (int64_t col = 0; col < w; ++col) y.data()[i * w + col] = x.data()[i * w + (w - 1 - col)];
  return y;
}

Tensor<float> crop(const Tensor<float>& x, int top, int left, int h, int w) {
  require_rank3(x, "crop");
  const int64_t c = x.dim(0), hh = x.dim(1), ww = x.dim(2);
  if (h < 1 || w < 1 || top < 0 || left < 0 || top + h > hh || left + w > ww)
    throw Error(Errc::CropTooLarge, std::to_string(h) + "x" + std::to_string(w) + " window at (" +
                                        std::to_string(top) + "," + std::to_string(left) + ") does not fit " +
                                        tensor::shape_string(x.shape()));
  auto y = Tensor<float>::zeros({c, h, w});
  for (int64_t ch = 0; ch < c; ++ch)
    for (int r = 0; r < h; ++r)
      for (int col = 0; col < w; ++col) y.data()[(ch * h + r) * w + col] = x.data()[(ch * hh + top + r) * ww + left + col];
  return y;
}

namespace {

Tensor<float> random_crop(const Tensor<float>& x, int side, std::mt19937_64& rng) {
  require_rank3(x, "augment");
  if (side == 0) return x;
  const int h = int(x.dim(1)), w = int(x.dim(2));
  if (side > h || side > w) return crop(x, 0, 0, side, side);  // throws CropTooLarge
  const int top = draw(rng, h - side + 1);
  const int left = draw(rng, w - side + 1);
  return crop(x, top, left, side, side);
}

}  // namespace

Tensor<float> augment_dct(const Tensor<float>& x, int crop_blocks, bool flip, std::mt19937_64& rng) {
  auto y = random_crop(x, crop_blocks, rng);
  if (flip && draw(rng, 2) == 1) y = flip_dct(y);
  return y;
}

Tensor<float> augment_pixels(const Tensor<float>& x, int side, bool flip, std::mt19937_64& rng) {
  auto y = random_crop(x, side, rng);
  if (flip && draw(rng, 2) == 1) y = flip_pixels(y);
  return y;
}

Tensor<float> center_crop(const Tensor<float>& x, int side) {
  require_rank3(x, "center_crop");
  if (side == 0) return x;
  const int h = int(x.dim(1)), w = int(x.dim(2));
  if (side > h || side > w) return crop(x, 0, 0, side, side);  // throws CropTooLarge
  return crop(x, (h - side) / 2, (w - side) / 2, side, side);
}

}  // namespace dctnet::harness
