#include "synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace dctnet::testing {
namespace {
uint8_t clamp_u8(double v) { return static_cast<uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }
}  // namespace

std::vector<uint8_t> synth_image(int width, int height, int channels, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 6.0);

  struct Blob {
    double cx, cy, r, amp[3];
  };
  std::vector<Blob> blobs(4);
  for (auto& b : blobs) {
    b.cx = u(rng) * width;
    b.cy = u(rng) * height;
    b.r = 4.0 + u(rng) * std::max(width, height) / 3.0;
    for (double& a : b.amp) a = (u(rng) - 0.5) * 200.0;
  }
  double base[3], gx[3], gy[3];
  for (int c = 0; c < 3; ++c) {
    base[c] = 60.0 + u(rng) * 130.0;
    gx[c] = (u(rng) - 0.5) * 120.0 / std::max(1, width);
    gy[c] = (u(rng) - 0.5) * 120.0 / std::max(1, height);
  }

  std::vector<uint8_t> px(static_cast<size_t>(width) * height * channels);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      for (int c = 0; c < channels; ++c) {
        double v = base[c] + gx[c] * x + gy[c] * y;
        for (const auto& b : blobs) {
          double d2 = ((x - b.cx) * (x - b.cx) + (y - b.cy) * (y - b.cy)) / (b.r * b.r);
          v += b.amp[c] * std::exp(-d2);
        }
        px[(static_cast<size_t>(y) * width + x) * channels + c] = clamp_u8(v + noise(rng));
      }
  return px;
}

std::vector<uint8_t> flat_image(int width, int height, int channels, uint8_t level) {
  return std::vector<uint8_t>(static_cast<size_t>(width) * height * channels, level);
}

std::vector<uint8_t> stripe_image(int width, int height, int label, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 10.0);
  double period = 4.0 + u(rng) * 8.0;
  double phase = u(rng) * 2.0 * std::numbers::pi;
  double fg[3], bg[3];
  const bool dark_fg = u(rng) < 0.5;
  for (int c = 0; c < 3; ++c) {
    double dark = 20.0 + u(rng) * 80.0;
    double light = 155.0 + u(rng) * 80.0;
    fg[c] = dark_fg ? dark : light;
    bg[c] = dark_fg ? light : dark;
  }
  std::vector<uint8_t> px(static_cast<size_t>(width) * height * 3);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      double t = label == 0 ? y : x;
      double w = 0.5 + 0.5 * std::sin(2.0 * std::numbers::pi * t / period + phase);
      for (int c = 0; c < 3; ++c)
        px[(static_cast<size_t>(y) * width + x) * 3 + c] = clamp_u8(w * fg[c] + (1.0 - w) * bg[c] + noise(rng));
    }
  return px;
}

}  // namespace dctnet::testing
