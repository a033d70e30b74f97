#pragma once

#include <cstdint>

namespace dctnet::kernels {

struct ConvGeometry {
  int n, c, h, w;      // input
  int f, kh, kw;       // filters
  int stride, pad;
  int ho, wo;          // output, derived by make_conv_geometry

  int64_t patch() const { return int64_t(c) * kh * kw; }
  int64_t out_plane() const { return int64_t(ho) * wo; }
};

// Fills ho/wo; returns false when the window does not fit.
bool make_conv_geometry(ConvGeometry& g);

struct BatchNormGeometry {
  int n, c, hw;
};

enum class Backend { Reference, Parallel };

// Process-wide selection used by the tensor ops; Parallel by default.
Backend backend();
void set_backend(Backend b);

class BackendGuard {
 public:
  explicit BackendGuard(Backend b);
  ~BackendGuard();
  BackendGuard(const BackendGuard&) = delete;
  BackendGuard& operator=(const BackendGuard&) = delete;

 private:
  Backend previous_;
};

// Multiply-accumulates executed by forward conv/linear/attention ops since the last reset.
uint64_t mac_tally();
void reset_mac_tally();
void add_macs(uint64_t n);

// Each backend exposes the same kernel set. Inputs and outputs are row-major
// NCHW. Backward kernels accumulate into dw/db and overwrite dx; any output
// pointer may be null to skip it.
#define DCTNET_KERNEL_SET                                                                                   \
  template <typename T>                                                                                     \
  void gemm(bool trans_a, bool trans_b, int m, int n, int k, const T* a, const T* b, T* c, bool accumulate); \
  template <typename T>                                                                                     \
  void conv2d_forward(const ConvGeometry& g, const T* x, const T* w, const T* bias, T* y);                  \
  template <typename T>                                                                                     \
  void conv2d_backward(const ConvGeometry& g, const T* x, const T* w, const T* dy, T* dx, T* dw, T* db);    \
  template <typename T>                                                                                     \
  void batch_norm_stats(const BatchNormGeometry& g, const T* x, T* mean, T* var);                           \
  template <typename T>                                                                                     \
  void batch_norm_apply(const BatchNormGeometry& g, const T* x, const T* mean, const T* var,                \
                        const T* gamma, const T* beta, T eps, T* y);                                        \
  template <typename T>                                                                                     \
  void batch_norm_backward_train(const BatchNormGeometry& g, const T* x, const T* mean, const T* var,       \
                                 const T* gamma, const T* dy, T eps, T* dx, T* dgamma, T* dbeta);

namespace reference {
DCTNET_KERNEL_SET
}

namespace parallel {
DCTNET_KERNEL_SET
}

#undef DCTNET_KERNEL_SET

}  // namespace dctnet::kernels
