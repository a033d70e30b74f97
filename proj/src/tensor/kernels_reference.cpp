// Direct-loop kernels. Slow and obvious on purpose: the parallel kernels are
// tested against these.
#include <cmath>

#include "dctnet/tensor/kernels.hpp"

namespace dctnet::kernels::reference {

template <typename T>
void gemm(bool trans_a, bool trans_b, int m, int n, int k, const T* a, const T* b, T* c, bool accumulate) {
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      T s = accumulate ? c[int64_t(i) * n + j] : T(0);
      for (int p = 0; p < k; ++p) {
        T av = trans_a ? a[int64_t(p) * m + i] : a[int64_t(i) * k + p];
        T bv = trans_b ? b[int64_t(j) * k + p] : b[int64_t(p) * n + j];
        s += av * bv;
      }
      c[int64_t(i) * n + j] = s;
    }
}

template <typename T>
void conv2d_forward(const ConvGeometry& g, const T* x, const T* w, const T* bias, T* y) {
  for (int n = 0; n < g.n; ++n)
    for (int f = 0; f < g.f; ++f)
      for (int oy = 0; oy < g.ho; ++oy)
        for (int ox = 0; ox < g.wo; ++ox) {
          T s = bias ? bias[f] : T(0);
          for (int c = 0; c < g.c; ++c)
            for (int ky = 0; ky < g.kh; ++ky)
              for (int kx = 0; kx < g.kw; ++kx) {
                int iy = oy * g.stride - g.pad + ky;
                int ix = ox * g.stride - g.pad + kx;
                if (iy < 0 || iy >= g.h || ix < 0 || ix >= g.w) continue;
                s += x[((int64_t(n) * g.c + c) * g.h + iy) * g.w + ix] * w[((int64_t(f) * g.c + c) * g.kh + ky) * g.kw + kx];
              }
          y[((int64_t(n) * g.f + f) * g.ho + oy) * g.wo + ox] = s;
        }
}

template <typename T>
void conv2d_backward(const ConvGeometry& g, const T* x, const T* w, const T* dy, T* dx, T* dw, T* db) {
  if (dx)
    for (int64_t i = 0; i < int64_t(g.n) * g.c * g.h * g.w; ++i) dx[i] = T(0);
  for (int n = 0; n < g.n; ++n)
    for (int f = 0; f < g.f; ++f)
      for (int oy = 0; oy < g.ho; ++oy)
        for (int ox = 0; ox < g.wo; ++ox) {
          T d = dy[((int64_t(n) * g.f + f) * g.ho + oy) * g.wo + ox];
          if (db) db[f] += d;
          for (int c = 0; c < g.c; ++c)
            for (int ky = 0; ky < g.kh; ++ky)
              for (int kx = 0; kx < g.kw; ++kx) {
                int iy = oy * g.stride - g.pad + ky;
                int ix = ox * g.stride - g.pad + kx;
                if (iy < 0 || iy >= g.h || ix < 0 || ix >= g.w) continue;
                int64_t xi = ((int64_t(n) * g.c + c) * g.h + iy) * g.w + ix;
                int64_t wi = ((int64_t(f) * g.c + c) * g.kh + ky) * g.kw + kx;
                if (dw) dw[wi] += d * x[xi];
                if (dx) dx[xi] += d * w[wi];
              }
        }
}

template <typename T>
void batch_norm_stats(const BatchNormGeometry& g, const T* x, T* mean, T* var) {
  const double count = double(g.n) * g.hw;
  for (int c = 0; c < g.c; ++c) {
    T s = 0;
    for (int n = 0; n < g.n; ++n)
      for (int i = 0; i < g.hw; ++i) s += x[(int64_t(n) * g.c + c) * g.hw + i];
    T mu = s / T(count);
    T q = 0;
    for (int n = 0; n < g.n; ++n)
      for (int i = 0; i < g.hw; ++i) {
        T d = x[(int64_t(n) * g.c + c) * g.hw + i] - mu;
        q += d * d;
      }
    mean[c] = mu;
    var[c] = q / T(count);
  }
}

template <typename T>
void batch_norm_apply(const BatchNormGeometry& g, const T* x, const T* mean, const T* var, const T* gamma,
                      const T* beta, T eps, T* y) {
  for (int n = 0; n < g.n; ++n)
    for (int c = 0; c < g.c; ++c) {
      T inv = T(1) / std::sqrt(var[c] + eps);
      for (int i = 0; i < g.hw; ++i) {
        int64_t idx = (int64_t(n) * g.c + c) * g.hw + i;
        y[idx] = gamma[c] * (x[idx] - mean[c]) * inv + beta[c];
      }
    }
}

template <typename T>
void batch_norm_backward_train(const BatchNormGeometry& g, const T* x, const T* mean, const T* var, const T* gamma,
                               const T* dy, T eps, T* dx, T* dgamma, T* dbeta) {
  const T count = T(double(g.n) * g.hw);
  for (int c = 0; c < g.c; ++c) {
    T inv = T(1) / std::sqrt(var[c] + eps);
    T sum_dy = 0, sum_dy_xhat = 0;
    for (int n = 0; n < g.n; ++n)
      for (int i = 0; i < g.hw; ++i) {
        int64_t idx = (int64_t(n) * g.c + c) * g.hw + i;
        sum_dy += dy[idx];
        sum_dy_xhat += dy[idx] * (x[idx] - mean[c]) * inv;
      }
    if (dgamma) dgamma[c] += sum_dy_xhat;
    if (dbeta) dbeta[c] += sum_dy;
    if (!dx) continue;
    for (int n = 0; n < g.n; ++n)
      for (int i = 0; i < g.hw; ++i) {
        int64_t idx = (int64_t(n) * g.c + c) * g.hw + i;
        T xhat = (x[idx] - mean[c]) * inv;
        dx[idx] = gamma[c] * inv / count * (count * dy[idx] - sum_dy - xhat * sum_dy_xhat);
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

}  // namespace dctnet::kernels::reference
