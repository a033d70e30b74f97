#include "dctnet/tensor/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dctnet/error.hpp"
#include "dctnet/tensor/kernels.hpp"

namespace dctnet::tensor {

namespace {

using kernels::Backend;
using kernels::BatchNormGeometry;
using kernels::ConvGeometry;

template <typename T>
using NodeT = detail::Node<T>;

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(Errc::ShapeMismatch, what);
}

template <typename T>
void require_rank(const Tensor<T>& t, int rank, const char* op) {
  require(t.defined() && t.rank() == rank,
          std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
              (t.defined() ? shape_string(t.shape()) : std::string("undefined")));
}

bool reference_backend() { return kernels::backend() == Backend::Reference; }

template <typename T>
void gemm(bool ta, bool tb, int m, int n, int k, const T* a, const T* b, T* c, bool acc) {
  if (reference_backend())
    kernels::reference::gemm(ta, tb, m, n, k, a, b, c, acc);
  else
    kernels::parallel::gemm(ta, tb, m, n, k, a, b, c, acc);
}

template <typename T>
void add_into(const Tensor<T>& t, const std::vector<T>& g) {
  auto& buf = t.node()->grad_buffer();
  for (size_t i = 0; i < buf.size(); ++i) buf[i] += g[i];
}

// Returns a writable buffer for an overwrite-style kernel output. When the
// target grad is still empty the kernel writes into it directly.
template <typename T>
struct GradSink {
  const Tensor<T>* target = nullptr;
  std::vector<T> scratch;
  T* ptr = nullptr;
  bool direct = false;

  explicit GradSink(const Tensor<T>& t) {
    if (!t.defined() || !t.requires_grad()) return;
    target = &t;
    auto& g = t.node()->grad;
    direct = g.empty();
    if (direct) {
      g.assign(t.numel(), T(0));
      ptr = g.data();
    } else {
      scratch.assign(t.numel(), T(0));
      ptr = scratch.data();
    }
  }
  void commit() {
    if (target && !direct) add_into(*target, scratch);
  }
};

template <typename T>
T* grad_ptr(const Tensor<T>& t) {
  return t.defined() && t.requires_grad() ? t.node()->grad_buffer().data() : nullptr;
}

}  // namespace

template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, int stride, int padding) {
  require_rank(x, 4, "conv2d input");
  require_rank(w, 4, "conv2d weight");
  require(x.dim(1) == w.dim(1), "conv2d: input channels " + std::to_string(x.dim(1)) + " vs weight " +
                                    shape_string(w.shape()));
  if (b.defined()) require(b.rank() == 1 && b.dim(0) == w.dim(0), "conv2d: bias shape " + shape_string(b.shape()));
  ConvGeometry g{int(x.dim(0)), int(x.dim(1)), int(x.dim(2)), int(x.dim(3)), int(w.dim(0)), int(w.dim(2)),
                 int(w.dim(3)), stride, padding, 0, 0};
  require(kernels::make_conv_geometry(g), "conv2d: window does not fit input " + shape_string(x.shape()));

  std::vector<T> y(size_t(g.n) * g.f * g.out_plane());
  const T* bias = b.defined() ? b.data() : nullptr;
  if (reference_backend())
    kernels::reference::conv2d_forward(g, x.data(), w.data(), bias, y.data());
  else
    kernels::parallel::conv2d_forward(g, x.data(), w.data(), bias, y.data());
  kernels::add_macs(uint64_t(g.n) * g.f * g.patch() * g.out_plane());

  return make_result<T>({g.n, g.f, g.ho, g.wo}, std::move(y), {x, w, b}, [x, w, b, g](NodeT<T>& out) {
    GradSink<T> dx(x);
    T* dw = grad_ptr(w);
    T* db = grad_ptr(b);
    if (reference_backend())
      kernels::reference::conv2d_backward(g, x.data(), w.data(), out.grad.data(), dx.ptr, dw, db);
    else
      kernels::parallel::conv2d_backward(g, x.data(), w.data(), out.grad.data(), dx.ptr, dw, db);
    dx.commit();
  });
}

template <typename T>
Tensor<T> batch_norm2d(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta, Tensor<T>& running_mean,
                       Tensor<T>& running_var, const BatchNormOptions& options) {
  require(x.defined() && (x.rank() == 4 || x.rank() == 2), "batch_norm2d: expected [N,C,H,W] or [N,C]");
  const int64_t c = x.dim(1);
  for (const Tensor<T>* p : std::initializer_list<const Tensor<T>*>{&gamma, &beta, &running_mean, &running_var})
    require(p->defined() && p->rank() == 1 && p->dim(0) == c, "batch_norm2d: per-channel parameter length != C");
  BatchNormGeometry g{int(x.dim(0)), int(c), x.rank() == 4 ? int(x.dim(2) * x.dim(3)) : 1};
  const T eps = T(options.eps);

  std::vector<T> mean(size_t(g.c)), var(size_t(g.c));
  if (options.training) {
    if (reference_backend())
      kernels::reference::batch_norm_stats(g, x.data(), mean.data(), var.data());
    else
      kernels::parallel::batch_norm_stats(g, x.data(), mean.data(), var.data());
    const double count = double(g.n) * g.hw;
    const double unbias = count > 1 ? count / (count - 1) : 1.0;
    const T m = T(options.momentum);
    for (int i = 0; i < g.c; ++i) {
      running_mean.data()[i] = (T(1) - m) * running_mean.data()[i] + m * mean[i];
      running_var.data()[i] = (T(1) - m) * running_var.data()[i] + m * T(var[i] * unbias);
    }
  } else {
    mean = running_mean.values();
    var = running_var.values();
  }

  std::vector<T> y(x.numel());
  if (reference_backend())
    kernels::reference::batch_norm_apply(g, x.data(), mean.data(), var.data(), gamma.data(), beta.data(), eps, y.data());
  else
    kernels::parallel::batch_norm_apply(g, x.data(), mean.data(), var.data(), gamma.data(), beta.data(), eps, y.data());

  const bool training = options.training;
  return make_result<T>(x.shape(), std::move(y), {x, gamma, beta},
                        [x, gamma, beta, g, eps, training, mean = std::move(mean), var = std::move(var)](NodeT<T>& out) {
    const T* dy = out.grad.data();
    T* dgamma = grad_ptr(gamma);
    T* dbeta = grad_ptr(beta);
    GradSink<T> dx(x);
    if (training) {
      if (reference_backend())
        kernels::reference::batch_norm_backward_train(g, x.data(), mean.data(), var.data(), gamma.data(), dy, eps,
                                                      dx.ptr, dgamma, dbeta);
      else
        kernels::parallel::batch_norm_backward_train(g, x.data(), mean.data(), var.data(), gamma.data(), dy, eps,
                                                     dx.ptr, dgamma, dbeta);
    } else {
      // Running statistics are constants here.
      for (int c = 0; c < g.c; ++c) {
        const T inv = T(1) / std::sqrt(var[c] + eps);
        T sdy = 0, sdyx = 0;
        for (int n = 0; n < g.n; ++n)
          for (int i = 0; i < g.hw; ++i) {
            const int64_t idx = (int64_t(n) * g.c + c) * g.hw + i;
            sdy += dy[idx];
            sdyx += dy[idx] * (x.data()[idx] - mean[c]) * inv;
            if (dx.ptr) dx.ptr[idx] = dy[idx] * gamma.data()[c] * inv;
          }
        if (dgamma) dgamma[c] += sdyx;
        if (dbeta) dbeta[c] += sdy;
      }
    }
    dx.commit();
  });
}

template <typename T>
Tensor<T> relu(const Tensor<T>& x) {
  std::vector<T> y(x.numel());
  const T* xd = x.data();
  for (size_t i = 0; i < y.size(); ++i) y[i] = xd[i] > T(0) ? xd[i] : T(0);
  return make_result<T>(x.shape(), std::move(y), {x}, [x](NodeT<T>& out) {
    auto& g = x.node()->grad_buffer();
    const T* xd = x.data();
    for (size_t i = 0; i < g.size(); ++i)
      if (xd[i] > T(0)) g[i] += out.grad[i];
  });
}

namespace {

struct AxisSplit {
  int64_t outer = 1, extent = 1, inner = 1;
};

template <typename T>
AxisSplit split_axis(const Tensor<T>& x, int& axis) {
  const int r = x.rank();
  if (axis < 0) axis += r;
  if (axis < 0 || axis >= r)
    throw Error(Errc::AxisOutOfRange, "axis out of range for shape " + shape_string(x.shape()));
  AxisSplit s;
  for (int i = 0; i < axis; ++i) s.outer *= x.dim(i);
  s.extent = x.dim(axis);
  for (int i = axis + 1; i < r; ++i) s.inner *= x.dim(i);
  return s;
}

}  // namespace

template <typename T>
Tensor<T> softmax(const Tensor<T>& x, int axis) {
  AxisSplit s = split_axis(x, axis);
  std::vector<T> y(x.numel());
  const T* xd = x.data();
  for (int64_t o = 0; o < s.outer; ++o)
    for (int64_t i = 0; i < s.inner; ++i) {
      const int64_t base = o * s.extent * s.inner + i;
      T mx = -std::numeric_limits<T>::infinity();
      for (int64_t k = 0; k < s.extent; ++k) mx = std::max(mx, xd[base + k * s.inner]);
      T z = 0;
      for (int64_t k = 0; k < s.extent; ++k) z += (y[base + k * s.inner] = std::exp(xd[base + k * s.inner] - mx));
      for (int64_t k = 0; k < s.extent; ++k) y[base + k * s.inner] /= z;
    }
  std::vector<T> saved = y;
  return make_result<T>(x.shape(), std::move(y), {x}, [x, s, saved = std::move(saved)](NodeT<T>& out) {
    auto& g = x.node()->grad_buffer();
    for (int64_t o = 0; o < s.outer; ++o)
      for (int64_t i = 0; i < s.inner; ++i) {
        const int64_t base = o * s.extent * s.inner + i;
        T dot = 0;
        for (int64_t k = 0; k < s.extent; ++k) dot += out.grad[base + k * s.inner] * saved[base + k * s.inner];
        for (int64_t k = 0; k < s.extent; ++k) {
          const int64_t idx = base + k * s.inner;
          g[idx] += saved[idx] * (out.grad[idx] - dot);
        }
      }
  });
}

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  require(a.shape() == b.shape(), "add: " + shape_string(a.shape()) + " vs " + shape_string(b.shape()));
  std::vector<T> y(a.numel());
  for (size_t i = 0; i < y.size(); ++i) y[i] = a.data()[i] + b.data()[i];
  return make_result<T>(a.shape(), std::move(y), {a, b}, [a, b](NodeT<T>& out) {
    if (a.requires_grad()) add_into(a, out.grad);
    if (b.requires_grad()) add_into(b, out.grad);
  });
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  require(a.shape() == b.shape(), "mul: " + shape_string(a.shape()) + " vs " + shape_string(b.shape()));
  std::vector<T> y(a.numel());
  for (size_t i = 0; i < y.size(); ++i) y[i] = a.data()[i] * b.data()[i];
  return make_result<T>(a.shape(), std::move(y), {a, b}, [a, b](NodeT<T>& out) {
    if (a.requires_grad()) {
      auto& g = a.node()->grad_buffer();
      for (size_t i = 0; i < g.size(); ++i) g[i] += out.grad[i] * b.data()[i];
    }
    if (b.requires_grad()) {
      auto& g = b.node()->grad_buffer();
      for (size_t i = 0; i < g.size(); ++i) g[i] += out.grad[i] * a.data()[i];
    }
  });
}

template <typename T>
Tensor<T> sum(const Tensor<T>& x) {
  T s = 0;
  for (size_t i = 0; i < x.numel(); ++i) s += x.data()[i];
  return make_result<T>({}, {s}, {x}, [x](NodeT<T>& out) {
    auto& g = x.node()->grad_buffer();
    for (auto& v : g) v += out.grad[0];
  });
}

template <typename T>
Tensor<T> linear(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b) {
  require_rank(x, 2, "linear input");
  require_rank(w, 2, "linear weight");
  require(x.dim(1) == w.dim(1), "linear: input width " + std::to_string(x.dim(1)) + " vs weight " +
                                    shape_string(w.shape()));
  const int n = int(x.dim(0)), in = int(x.dim(1)), outw = int(w.dim(0));
  if (b.defined()) require(b.rank() == 1 && b.dim(0) == outw, "linear: bias shape " + shape_string(b.shape()));
  std::vector<T> y(size_t(n) * outw);
  gemm(false, true, n, outw, in, x.data(), w.data(), y.data(), false);
  if (b.defined())
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < outw; ++j) y[size_t(i) * outw + j] += b.data()[j];
  kernels::add_macs(uint64_t(n) * in * outw);

  return make_result<T>({n, outw}, std::move(y), {x, w, b}, [x, w, b, n, in, outw](NodeT<T>& out) {
    const T* dy = out.grad.data();
    if (x.requires_grad()) gemm(false, false, n, in, outw, dy, w.data(), x.node()->grad_buffer().data(), true);
    if (w.requires_grad()) gemm(true, false, outw, in, n, dy, x.data(), w.node()->grad_buffer().data(), true);
    if (b.defined() && b.requires_grad()) {
      auto& g = b.node()->grad_buffer();
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < outw; ++j) g[j] += dy[size_t(i) * outw + j];
    }
  });
}

template <typename T>
Tensor<T> global_avg_pool(const Tensor<T>& x) {
  require_rank(x, 4, "global_avg_pool");
  const int64_t nc = x.dim(0) * x.dim(1), hw = x.dim(2) * x.dim(3);
  std::vector<T> y(static_cast<size_t>(nc));
  for (int64_t i = 0; i < nc; ++i) {
    T s = 0;
    for (int64_t k = 0; k < hw; ++k) s += x.data()[i * hw + k];
    y[i] = s / T(hw);
  }
  return make_result<T>({x.dim(0), x.dim(1)}, std::move(y), {x}, [x, nc, hw](NodeT<T>& out) {
    auto& g = x.node()->grad_buffer();
    for (int64_t i = 0; i < nc; ++i)
      for (int64_t k = 0; k < hw; ++k) g[i * hw + k] += out.grad[i] / T(hw);
  });
}

template <typename T>
Tensor<T> max_pool2d(const Tensor<T>& x, int kernel, int stride, int padding) {
  require_rank(x, 4, "max_pool2d");
  require(padding < kernel, "max_pool2d: padding must be smaller than the window");
  ConvGeometry g{int(x.dim(0)), int(x.dim(1)), int(x.dim(2)), int(x.dim(3)), int(x.dim(1)), kernel, kernel,
                 stride, padding, 0, 0};
  require(kernels::make_conv_geometry(g), "max_pool2d: window does not fit input " + shape_string(x.shape()));
  const int64_t planes = int64_t(g.n) * g.c;
  std::vector<T> y(size_t(planes) * g.out_plane());
  std::vector<int64_t> argmax(y.size());
  for (int64_t p = 0; p < planes; ++p) {
    const T* in = x.data() + p * g.h * g.w;
    for (int oy = 0; oy < g.ho; ++oy)
      for (int ox = 0; ox < g.wo; ++ox) {
        T best = -std::numeric_limits<T>::infinity();
        int64_t at = -1;
        for (int ky = 0; ky < kernel; ++ky)
          for (int kx = 0; kx < kernel; ++kx) {
            const int iy = oy * stride - padding + ky, ix = ox * stride - padding + kx;
            if (iy < 0 || iy >= g.h || ix < 0 || ix >= g.w) continue;
            const int64_t idx = int64_t(iy) * g.w + ix;
            if (at < 0 || in[idx] > best) {
              best = in[idx];
              at = idx;
            }
          }
        const int64_t o = p * g.out_plane() + int64_t(oy) * g.wo + ox;
        y[o] = best;
        argmax[o] = p * g.h * g.w + at;
      }
  }
  return make_result<T>({g.n, g.c, g.ho, g.wo}, std::move(y), {x}, [x, argmax = std::move(argmax)](NodeT<T>& out) {
    auto& gx = x.node()->grad_buffer();
    for (size_t i = 0; i < argmax.size(); ++i) gx[argmax[i]] += out.grad[i];
  });
}

template <typename T>
Tensor<T> cross_entropy(const Tensor<T>& logits, std::span<const int> labels) {
  require_rank(logits, 2, "cross_entropy logits");
  const int64_t n = logits.dim(0), k = logits.dim(1);
  require(int64_t(labels.size()) == n, "cross_entropy: label count != batch");
  std::vector<T> prob(logits.numel());
  T loss = 0;
  for (int64_t i = 0; i < n; ++i) {
    require(labels[i] >= 0 && labels[i] < k, "cross_entropy: label out of range");
    const T* row = logits.data() + i * k;
    T mx = *std::max_element(row, row + k);
    T z = 0;
    for (int64_t j = 0; j < k; ++j) z += std::exp(row[j] - mx);
    const T logz = mx + std::log(z);
    for (int64_t j = 0; j < k; ++j) prob[i * k + j] = std::exp(row[j] - logz);
    loss += logz - row[labels[i]];
  }
  loss /= T(n);
  std::vector<int> lab(labels.begin(), labels.end());
  return make_result<T>({}, {loss}, {logits},
                        [logits, n, k, prob = std::move(prob), lab = std::move(lab)](NodeT<T>& out) {
    auto& g = logits.node()->grad_buffer();
    const T scale = out.grad[0] / T(n);
    for (int64_t i = 0; i < n; ++i)
      for (int64_t j = 0; j < k; ++j) g[i * k + j] += scale * (prob[i * k + j] - (j == lab[i] ? T(1) : T(0)));
  });
}

template <typename T>
Tensor<T> reshape(const Tensor<T>& x, Shape shape) {
  require(numel_of(shape) == x.numel(), "reshape: " + shape_string(x.shape()) + " -> " + shape_string(shape));
  return make_result<T>(std::move(shape), x.values(), {x}, [x](NodeT<T>& out) { add_into(x, out.grad); });
}

template <typename T>
Tensor<T> select_channels(const Tensor<T>& x, std::span<const int> channels) {
  require_rank(x, 4, "select_channels");
  const int64_t n = x.dim(0), c = x.dim(1), hw = x.dim(2) * x.dim(3);
  const int64_t m = int64_t(channels.size());
  for (int ch : channels) require(ch >= 0 && ch < c, "select_channels: channel out of range");
  std::vector<T> y(size_t(n * m * hw));
  for (int64_t i = 0; i < n; ++i)
    for (int64_t j = 0; j < m; ++j)
      std::copy_n(x.data() + (i * c + channels[j]) * hw, hw, y.data() + (i * m + j) * hw);
  std::vector<int> chans(channels.begin(), channels.end());
  return make_result<T>({n, m, x.dim(2), x.dim(3)}, std::move(y), {x},
                        [x, n, c, m, hw, chans = std::move(chans)](NodeT<T>& out) {
    auto& g = x.node()->grad_buffer();
    for (int64_t i = 0; i < n; ++i)
      for (int64_t j = 0; j < m; ++j)
        for (int64_t p = 0; p < hw; ++p) g[(i * c + chans[j]) * hw + p] += out.grad[(i * m + j) * hw + p];
  });
}

#define DCTNET_INSTANTIATE(T)                                                                                  \
  template Tensor<T> conv2d<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, int, int);               \
  template Tensor<T> batch_norm2d<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, Tensor<T>&,         \
                                     Tensor<T>&, const BatchNormOptions&);                                    \
  template Tensor<T> relu<T>(const Tensor<T>&);                                                                \
  template Tensor<T> softmax<T>(const Tensor<T>&, int);                                                        \
  template Tensor<T> add<T>(const Tensor<T>&, const Tensor<T>&);                                               \
  template Tensor<T> mul<T>(const Tensor<T>&, const Tensor<T>&);                                               \
  template Tensor<T> sum<T>(const Tensor<T>&);                                                                 \
  template Tensor<T> linear<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);                          \
  template Tensor<T> global_avg_pool<T>(const Tensor<T>&);                                                     \
  template Tensor<T> max_pool2d<T>(const Tensor<T>&, int, int, int);                                           \
  template Tensor<T> cross_entropy<T>(const Tensor<T>&, std::span<const int>);                                 \
  template Tensor<T> reshape<T>(const Tensor<T>&, Shape);                                                      \
  template Tensor<T> select_channels<T>(const Tensor<T>&, std::span<const int>);
DCTNET_INSTANTIATE(float)
DCTNET_INSTANTIATE(double)
#undef DCTNET_INSTANTIATE

}  // namespace dctnet::tensor
