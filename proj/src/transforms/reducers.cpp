#include "dctnet/transforms/reducers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dctnet/error.hpp"
#include "dctnet/tensor/kernels.hpp"
#include "dctnet/tensor/ops.hpp"

namespace dctnet::transforms {

using tensor::Shape;

std::string_view to_string(ReducerKind kind) {
  switch (kind) {
    case ReducerKind::FBS: return "fbs";
    case ReducerKind::LP: return "lp";
    case ReducerKind::LA: return "la";
    case ReducerKind::CCPP: return "ccpp";
  }
  return "?";
}

std::optional<ReducerKind> parse_reducer_kind(std::string_view name) {
  for (ReducerKind k : {ReducerKind::FBS, ReducerKind::LP, ReducerKind::LA, ReducerKind::CCPP})
    if (to_string(k) == name) return k;
  return std::nullopt;
}

ReducerSpec ReducerSpec::fbs(int k) { return {ReducerKind::FBS, kDctChannels, 3 * k}; }

void ReducerSpec::validate() const {
  if (n <= 0 || m <= 0) throw Error(Errc::ShapeMismatch, "reducer channel counts must be positive");
  switch (kind) {
    case ReducerKind::FBS:
      if (n != kDctChannels || m % 3 != 0 || m / 3 < 1 || m / 3 > kCoefficientsPerComponent)
        throw Error(Errc::KOutOfRange, "FBS needs m = 3k with 1 <= k <= 64, got m = " + std::to_string(m));
      break;
    case ReducerKind::LA:
      if (n % m != 0)
        throw Error(Errc::GroupingError, std::to_string(m) + " does not divide " + std::to_string(n));
      break;
    case ReducerKind::LP:
    case ReducerKind::CCPP:
      break;
  }
}

Shape ReducerSpec::weight_shape() const {
  switch (kind) {
    case ReducerKind::FBS: return {};
    case ReducerKind::LA: return {m, n / m};
    default: return {m, n};
  }
}

std::string ReducerSpec::label() const {
  switch (kind) {
    case ReducerKind::FBS: return "FBS (3x" + std::to_string(m / 3) + ")";
    case ReducerKind::LP: return "LP (1x" + std::to_string(m) + ")";
    case ReducerKind::LA: return "LA (1x" + std::to_string(m) + ")";
    case ReducerKind::CCPP: return "CCPP (1x" + std::to_string(m) + ")";
  }
  return "?";
}

namespace {

template <typename T>
Tensor<T> batched(const Tensor<T>& x) {
  if (x.defined() && x.rank() == 4) return x;
  if (x.defined() && x.rank() == 3) return tensor::reshape(x, {1, x.dim(0), x.dim(1), x.dim(2)});
  throw Error(Errc::ShapeMismatch, "expected [C,H,W] or [N,C,H,W]");
}

template <typename T>
Tensor<T> restore_rank(const Tensor<T>& y, const Tensor<T>& like) {
  if (like.rank() == 4) return y;
  return tensor::reshape(y, {y.dim(1), y.dim(2), y.dim(3)});
}

template <typename T>
Tensor<T> as_pointwise_kernel(const Tensor<T>& w, int64_t n) {
  if (w.rank() != 2 || w.dim(1) != n)
    throw Error(Errc::ShapeMismatch, "weight " + tensor::shape_string(w.shape()) + " does not take " +
                                         std::to_string(n) + " input channels");
  return tensor::reshape(w, {w.dim(0), w.dim(1), 1, 1});
}

}  // namespace

std::vector<int> fbs_channels(int k) {
  if (k < 1 || k > kCoefficientsPerComponent)
    throw Error(Errc::KOutOfRange, "k must be in [1, 64], got " + std::to_string(k));
  std::vector<int> ch;
  for (int comp = 0; comp < 3; ++comp)
    for (int i = 0; i < k; ++i) ch.push_back(comp * kCoefficientsPerComponent + i);
  return ch;
}

template <typename T>
Tensor<T> fbs_select(const Tensor<T>& x, int k) {
  const auto ch = fbs_channels(k);
  Tensor<T> xb = batched(x);
  if (xb.dim(1) != kDctChannels)
    throw Error(Errc::ShapeMismatch, "FBS expects 192 DCT channels, got " + std::to_string(xb.dim(1)));
  return restore_rank(tensor::select_channels(xb, std::span<const int>(ch)), x);
}

template <typename T>
Tensor<T> lp_project(const Tensor<T>& x, const Tensor<T>& ws) {
  Tensor<T> xb = batched(x);
  return restore_rank(tensor::conv2d(xb, as_pointwise_kernel(ws, xb.dim(1)), Tensor<T>(), 1, 0), x);
}

template <typename T>
Tensor<T> ccpp(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b) {
  Tensor<T> xb = batched(x);
  if (!b.defined() || b.rank() != 1 || b.dim(0) != w.dim(0))
    throw Error(Errc::ShapeMismatch, "CCPP bias must have one entry per output channel");
  return restore_rank(tensor::relu(tensor::conv2d(xb, as_pointwise_kernel(w, xb.dim(1)), b, 1, 0)), x);
}

namespace {

struct AttentionGeometry {
  int64_t batch, n, m, group, hw;
};

template <typename T>
AttentionGeometry attention_geometry(const Tensor<T>& xb, const Tensor<T>& w) {
  if (w.rank() != 2) throw Error(Errc::ShapeMismatch, "LA weight must be [m, n/m]");
  const int64_t n = xb.dim(1), m = w.dim(0);
  if (m <= 0 || n % m != 0) throw Error(Errc::GroupingError, std::to_string(m) + " does not divide " + std::to_string(n));
  if (w.dim(1) != n / m)
    throw Error(Errc::ShapeMismatch, "LA weight " + tensor::shape_string(w.shape()) + " for n = " + std::to_string(n));
  return {xb.dim(0), n, m, n / m, xb.dim(2) * xb.dim(3)};
}

// a[(b*m + i)*group + j][p], computed stably per location.
template <typename T>
void attention_forward(const AttentionGeometry& g, const T* x, const T* w, T* a, T* y) {
#pragma omp parallel for collapse(2) schedule(static)
  for (int64_t b = 0; b < g.batch; ++b)
    for (int64_t i = 0; i < g.m; ++i) {
      const T* r = x + (b * g.n + i * g.group) * g.hw;
      const T* wi = w + i * g.group;
      T* ai = a + (b * g.m + i) * g.group * g.hw;
      T* yi = y + (b * g.m + i) * g.hw;
      for (int64_t p = 0; p < g.hw; ++p) {
        T mx = -std::numeric_limits<T>::infinity();
        for (int64_t j = 0; j < g.group; ++j) mx = std::max(mx, wi[j] * r[j * g.hw + p]);
        T z = 0;
        for (int64_t j = 0; j < g.group; ++j) z += (ai[j * g.hw + p] = std::exp(wi[j] * r[j * g.hw + p] - mx));
        T acc = 0;
        for (int64_t j = 0; j < g.group; ++j) {
          ai[j * g.hw + p] /= z;
          acc += ai[j * g.hw + p] * r[j * g.hw + p];
        }
        yi[p] = acc;
      }
    }
}

}  // namespace

template <typename T>
Tensor<T> local_attention(const Tensor<T>& x, const Tensor<T>& w) {
  Tensor<T> xb = batched(x);
  const AttentionGeometry g = attention_geometry(xb, w);
  std::vector<T> a(size_t(g.batch * g.n * g.hw));
  std::vector<T> y(size_t(g.batch * g.m * g.hw));
  attention_forward(g, xb.data(), w.data(), a.data(), y.data());
  kernels::add_macs(uint64_t(2 * g.batch * g.n * g.hw));

  std::vector<T> ysaved = y;
  Tensor<T> out = tensor::make_result<T>(
      {g.batch, g.m, xb.dim(2), xb.dim(3)}, std::move(y), {xb, w},
      [xb, w, g, a = std::move(a), ysaved = std::move(ysaved)](tensor::detail::Node<T>& node) {
        // dL/ds_j = dy * a_j (r_j - y); s_j = w_ij r_j.
        T* dx = xb.requires_grad() ? xb.node()->grad_buffer().data() : nullptr;
        T* dw = w.requires_grad() ? w.node()->grad_buffer().data() : nullptr;
        const T* x = xb.data();
#pragma omp parallel for schedule(static)
        for (int64_t i = 0; i < g.m; ++i) {
          const T* wi = w.data() + i * g.group;
          for (int64_t b = 0; b < g.batch; ++b) {
            const T* r = x + (b * g.n + i * g.group) * g.hw;
            const T* ai = a.data() + (b * g.m + i) * g.group * g.hw;
            const T* yi = ysaved.data() + (b * g.m + i) * g.hw;
            const T* dyi = node.grad.data() + (b * g.m + i) * g.hw;
            T* dri = dx ? dx + (b * g.n + i * g.group) * g.hw : nullptr;
            for (int64_t j = 0; j < g.group; ++j) {
              T dwij = 0;
              for (int64_t p = 0; p < g.hw; ++p) {
                const T rj = r[j * g.hw + p], aj = ai[j * g.hw + p];
                const T ds = dyi[p] * aj * (rj - yi[p]);
                if (dri) dri[j * g.hw + p] += dyi[p] * aj + ds * wi[j];
                dwij += ds * rj;
              }
              if (dw) dw[i * g.group + j] += dwij;
            }
          }
        }
      });
  return restore_rank(out, x);
}

template <typename T>
Tensor<T> local_attention_weights(const Tensor<T>& x, const Tensor<T>& w) {
  Tensor<T> xb = batched(x);
  const AttentionGeometry g = attention_geometry(xb, w);
  std::vector<T> a(size_t(g.batch * g.n * g.hw));
  std::vector<T> y(size_t(g.batch * g.m * g.hw));
  attention_forward(g, xb.data(), w.data(), a.data(), y.data());
  Shape shape = {g.batch, g.m, g.group, xb.dim(2), xb.dim(3)};
  if (x.rank() == 3) shape.erase(shape.begin());
  return Tensor<T>::from(std::move(shape), std::move(a));
}

#define DCTNET_INSTANTIATE(T)                                                           \
  template Tensor<T> fbs_select<T>(const Tensor<T>&, int);                              \
  template Tensor<T> lp_project<T>(const Tensor<T>&, const Tensor<T>&);                 \
  template Tensor<T> local_attention<T>(const Tensor<T>&, const Tensor<T>&);            \
  template Tensor<T> local_attention_weights<T>(const Tensor<T>&, const Tensor<T>&);    \
  template Tensor<T> ccpp<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);
DCTNET_INSTANTIATE(float)
DCTNET_INSTANTIATE(double)
#undef DCTNET_INSTANTIATE

}  // namespace dctnet::transforms
