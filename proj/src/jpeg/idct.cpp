#include "dctnet/jpeg/idct.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>

namespace dctnet::jpeg {
namespace {

std::atomic<uint64_t> g_idct_calls{0};

// basis[x][u] = C(u)/2 * cos((2x+1) u pi / 16)
const std::array<std::array<double, 8>, 8>& basis() {
  static const auto table = [] {
    std::array<std::array<double, 8>, 8> t{};
    for (int x = 0; x < 8; ++x)
      for (int u = 0; u < 8; ++u) {
        double cu = u == 0 ? 1.0 / std::numbers::sqrt2 : 1.0;
        t[x][u] = 0.5 * cu * std::cos((2 * x + 1) * u * std::numbers::pi / 16.0);
      }
    return t;
  }();
  return table;
}

}  // namespace

std::array<double, 64> inverse_dct_block(std::span<const int32_t, 64> block) {
  g_idct_calls.fetch_add(1, std::memory_order_relaxed);
  const auto& b = basis();

  // Rows first (horizontal frequencies), then columns.
  std::array<double, 64> tmp{};
  for (int v = 0; v < 8; ++v)
    for (int x = 0; x < 8; ++x) {
      double s = 0.0;
      for (int u = 0; u < 8; ++u) s += b[x][u] * block[v * 8 + u];
      tmp[v * 8 + x] = s;
    }
  std::array<double, 64> out{};
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) {
      double s = 0.0;
      for (int v = 0; v < 8; ++v) s += b[y][v] * tmp[v * 8 + x];
      out[y * 8 + x] = std::clamp(s + 128.0, 0.0, 255.0);
    }
  return out;
}

uint64_t idct_invocations() { return g_idct_calls.load(std::memory_order_relaxed); }

}  // namespace dctnet::jpeg
