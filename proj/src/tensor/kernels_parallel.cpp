// OpenMP kernels. Every output element is produced by exactly one thread with
// a fixed summation order, so results do not depend on the thread count.
#include <algorithm>
#include <cmath>
#include <cstring>
#include <vector>

#include "dctnet/tensor/kernels.hpp"

namespace dctnet::kernels::parallel {

namespace {

constexpr int kRowTile = 4;
constexpr int kColBlock = 512;
constexpr int kDepthBlock = 256;

template <typename T>
void transpose(int rows, int cols, const T* src, T* dst) {
#pragma omp parallel for schedule(static)
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) dst[int64_t(j) * rows + i] = src[int64_t(i) * cols + j];
}

// C[m,n] (+)= A[m,k] B[k,n], all row-major and contiguous.
template <typename T>
void gemm_nn(int m, int n, int k, const T* a, const T* b, T* c, bool accumulate) {
  const int tiles = (m + kRowTile - 1) / kRowTile;
#pragma omp parallel for schedule(static)
  for (int t = 0; t < tiles; ++t) {
    const int i0 = t * kRowTile;
    const int rows = std::min(kRowTile, m - i0);
    if (!accumulate)
      for (int r = 0; r < rows; ++r) std::fill_n(c + int64_t(i0 + r) * n, n, T(0));
    for (int j0 = 0; j0 < n; j0 += kColBlock) {
      const int cols = std::min(kColBlock, n - j0);
      for (int p0 = 0; p0 < k; p0 += kDepthBlock) {
        const int pend = std::min(k, p0 + kDepthBlock);
        if (rows == kRowTile) {
          T* c0 = c + int64_t(i0) * n + j0;
          T* c1 = c0 + n;
          T* c2 = c1 + n;
          T* c3 = c2 + n;
          for (int p = p0; p < pend; ++p) {
            const T a0 = a[int64_t(i0) * k + p];
            const T a1 = a[int64_t(i0 + 1) * k + p];
            const T a2 = a[int64_t(i0 + 2) * k + p];
            const T a3 = a[int64_t(i0 + 3) * k + p];
            const T* __restrict brow = b + int64_t(p) * n + j0;
#pragma omp simd
            for (int j = 0; j < cols; ++j) {
              const T bv = brow[j];
              c0[j] += a0 * bv;
              c1[j] += a1 * bv;
              c2[j] += a2 * bv;
              c3[j] += a3 * bv;
            }
          }
        } else {
          for (int r = 0; r < rows; ++r) {
            T* __restrict crow = c + int64_t(i0 + r) * n + j0;
            for (int p = p0; p < pend; ++p) {
              const T av = a[int64_t(i0 + r) * k + p];
              const T* __restrict brow = b + int64_t(p) * n + j0;
#pragma omp simd
              for (int j = 0; j < cols; ++j) crow[j] += av * brow[j];
            }
          }
        }
      }
    }
  }
}

// cols[(c*kh+ky)*kw+kx, n*ho*wo + oy*wo + ox]
template <typename T>
void im2col(const ConvGeometry& g, const T* x, T* cols) {
  const int64_t width = int64_t(g.n) * g.out_plane();
  const int rows = static_cast<int>(g.patch());
#pragma omp parallel for schedule(static)
  for (int row = 0; row < rows; ++row) {
    const int kx = row % g.kw;
    const int ky = (row / g.kw) % g.kh;
    const int c = row / (g.kw * g.kh);
    T* out = cols + int64_t(row) * width;
    for (int n = 0; n < g.n; ++n) {
      const T* plane = x + (int64_t(n) * g.c + c) * g.h * g.w;
      for (int oy = 0; oy < g.ho; ++oy) {
        const int iy = oy * g.stride - g.pad + ky;
        for (int ox = 0; ox < g.wo; ++ox) {
          const int ix = ox * g.stride - g.pad + kx;
          *out++ = (iy < 0 || iy >= g.h || ix < 0 || ix >= g.w) ? T(0) : plane[int64_t(iy) * g.w + ix];
        }
      }
    }
  }
}

// Inverse scatter of im2col; one thread per input channel keeps writes disjoint.
template <typename T>
void col2im(const ConvGeometry& g, const T* cols, T* dx) {
  const int64_t width = int64_t(g.n) * g.out_plane();
#pragma omp parallel for schedule(static)
  for (int c = 0; c < g.c; ++c) {
    for (int n = 0; n < g.n; ++n) std::fill_n(dx + (int64_t(n) * g.c + c) * g.h * g.w, int64_t(g.h) * g.w, T(0));
    for (int ky = 0; ky < g.kh; ++ky)
      for (int kx = 0; kx < g.kw; ++kx) {
        const T* in = cols + (int64_t(c * g.kh + ky) * g.kw + kx) * width;
        for (int n = 0; n < g.n; ++n) {
          T* plane = dx + (int64_t(n) * g.c + c) * g.h * g.w;
          for (int oy = 0; oy < g.ho; ++oy) {
            const int iy = oy * g.stride - g.pad + ky;
            for (int ox = 0; ox < g.wo; ++ox, ++in) {
              const int ix = ox * g.stride - g.pad + kx;
              if (iy >= 0 && iy < g.h && ix >= 0 && ix < g.w) plane[int64_t(iy) * g.w + ix] += *in;
            }
          }
        }
      }
  }
}

bool is_pointwise(const ConvGeometry& g) { return g.kh == 1 && g.kw == 1 && g.stride == 1 && g.pad == 0; }

}  // namespace

template <typename T>
void gemm(bool trans_a, bool trans_b, int m, int n, int k, const T* a, const T* b, T* c, bool accumulate) {
  std::vector<T> at, bt;
  if (trans_a) {
    at.resize(size_t(m) * k);
    transpose(k, m, a, at.data());
    a = at.data();
  }
  if (trans_b) {
    bt.resize(size_t(k) * n);
    transpose(n, k, b, bt.data());
    b = bt.data();
  }
  gemm_nn(m, n, k, a, b, c, accumulate);
}

template <typename T>
void conv2d_forward(const ConvGeometry& g, const T* x, const T* w, const T* bias, T* y) {
  const int64_t plane = g.out_plane();
  const int64_t width = int64_t(g.n) * plane;
  const int depth = static_cast<int>(g.patch());

  std::vector<T> cols;
  const T* b = x;
  if (!(is_pointwise(g) && g.n == 1)) {
    cols.resize(size_t(depth) * width);
    im2col(g, x, cols.data());
    b = cols.data();
  }
  std::vector<T> out;
  T* c = y;
  if (g.n != 1) {
    out.resize(size_t(g.f) * width);
    c = out.data();
  }
  gemm_nn(g.f, static_cast<int>(width), depth, w, b, c, false);

#pragma omp parallel for schedule(static)
  for (int f = 0; f < g.f; ++f) {
    const T bv = bias ? bias[f] : T(0);
    for (int n = 0; n < g.n; ++n) {
      T* dst = y + (int64_t(n) * g.f + f) * plane;
      const T* src = c + int64_t(f) * width + int64_t(n) * plane;
      for (int64_t i = 0; i < plane; ++i) dst[i] = src[i] + bv;
    }
  }
}

template <typename T>
void conv2d_backward(const ConvGeometry& g, const T* x, const T* w, const T* dy, T* dx, T* dw, T* db) {
  const int64_t plane = g.out_plane();
  const int64_t width = int64_t(g.n) * plane;
  const int depth = static_cast<int>(g.patch());

  // dy as [F, N*HoWo]
  std::vector<T> dyt(size_t(g.f) * width);
#pragma omp parallel for schedule(static)
  for (int f = 0; f < g.f; ++f) {
    for (int n = 0; n < g.n; ++n)
      std::memcpy(dyt.data() + int64_t(f) * width + int64_t(n) * plane, dy + (int64_t(n) * g.f + f) * plane,
                  sizeof(T) * plane);
    if (db) {
      T s = 0;
      for (int64_t i = 0; i < width; ++i) s += dyt[int64_t(f) * width + i];
      db[f] += s;
    }
  }

  if (dw) {
    std::vector<T> cols;
    const T* b = x;
    if (!(is_pointwise(g) && g.n == 1)) {
      cols.resize(size_t(depth) * width);
      im2col(g, x, cols.data());
      b = cols.data();
    }
    gemm(false, true, g.f, depth, static_cast<int>(width), dyt.data(), b, dw, true);
  }
  if (dx) {
    std::vector<T> dcols(size_t(depth) * width);
    gemm(true, false, depth, static_cast<int>(width), g.f, w, dyt.data(), dcols.data(), false);
    col2im(g, dcols.data(), dx);
  }
}

template <typename T>
void batch_norm_stats(const BatchNormGeometry& g, const T* x, T* mean, T* var) {
  const double count = double(g.n) * g.hw;
#pragma omp parallel for schedule(static)
  for (int c = 0; c < g.c; ++c) {
    T s = 0;
    for (int n = 0; n < g.n; ++n) {
      const T* p = x + (int64_t(n) * g.c + c) * g.hw;
      for (int i = 0; i < g.hw; ++i) s += p[i];
    }
    const T mu = s / T(count);
    T q = 0;
    for (int n = 0; n < g.n; ++n) {
      const T* p = x + (int64_t(n) * g.c + c) * g.hw;
      for (int i = 0; i < g.hw; ++i) q += (p[i] - mu) * (p[i] - mu);
    }
    mean[c] = mu;
    var[c] = q / T(count);
  }
}

template <typename T>
void batch_norm_apply(const BatchNormGeometry& g, const T* x, const T* mean, const T* var, const T* gamma,
                      const T* beta, T eps, T* y) {
#pragma omp parallel for collapse(2) schedule(static)
  for (int n = 0; n < g.n; ++n)
    for (int c = 0; c < g.c; ++c) {
      const T scale = gamma[c] / std::sqrt(var[c] + eps);
      const T shift = beta[c] - mean[c] * scale;
      const int64_t base = (int64_t(n) * g.c + c) * g.hw;
#pragma omp simd
      for (int i = 0; i < g.hw; ++i) y[base + i] = x[base + i] * scale + shift;
    }
}

template <typename T>
void batch_norm_backward_train(const BatchNormGeometry& g, const T* x, const T* mean, const T* var, const T* gamma,
                               const T* dy, T eps, T* dx, T* dgamma, T* dbeta) {
  const T count = T(double(g.n) * g.hw);
#pragma omp parallel for schedule(static)
  for (int c = 0; c < g.c; ++c) {
    const T inv = T(1) / std::sqrt(var[c] + eps);
    T sum_dy = 0, sum_dy_xhat = 0;
    for (int n = 0; n < g.n; ++n) {
      const int64_t base = (int64_t(n) * g.c + c) * g.hw;
      for (int i = 0; i < g.hw; ++i) {
        sum_dy += dy[base + i];
        sum_dy_xhat += dy[base + i] * (x[base + i] - mean[c]) * inv;
      }
    }
    if (dgamma) dgamma[c] += sum_dy_xhat;
    if (dbeta) dbeta[c] += sum_dy;
    if (!dx) continue;
    const T k = gamma[c] * inv / count;
    for (int n = 0; n < g.n; ++n) {
      const int64_t base = (int64_t(n) * g.c + c) * g.hw;
      for (int i = 0; i < g.hw; ++i) {
        const T xhat = (x[base + i] - mean[c]) * inv;
        dx[base + i] = k * (count * dy[base + i] - sum_dy - xhat * sum_dy_xhat);
      }
    }
  }
}

#define DCTNET_INSTANTIATE(T)                                                                                  \
  template void gemm<T>(bool, bool, int, int, int, const T*, const T*, T*, bool);                             \
  template void conv2d_forward<T>(const ConvGeometry&, const T*, const T*, const T*, T*);                     \
  template void conv2d_backward<T>(const ConvGeometry&, const T*, const T*, const T*, T*, T*, T*);            \
  template void batch_norm_stats<T>(const BatchNormGeometry&, const T*, T*, T*);                              \
  template void batch_norm_apply<T>(const BatchNormGeometry&, const T*, const T*, const T*, const T*,         \
                                    const T*, T, T*);                                                          \
  template void batch_norm_backward_train<T>(const BatchNormGeometry&, const T*, const T*, const T*, const T*, \
                                             const T*, T, T*, T*, T*);
DCTNET_INSTANTIATE(float)
DCTNET_INSTANTIATE(double)
#undef DCTNET_INSTANTIATE

}  // namespace dctnet::kernels::parallel
