#pragma once

#include <span>

#include "dctnet/tensor/tensor.hpp"

namespace dctnet::tensor {

// x [N,C,H,W], w [F,C,kh,kw], b [F] or undefined.
template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, int stride, int padding);

struct BatchNormOptions {
  bool training = true;
  double momentum = 0.1;
  double eps = 1e-5;
};

// x [N,C,H,W] or [N,C]. Training mode normalizes with biased batch variance
// and folds the unbiased estimate into running_var.
template <typename T>
Tensor<T> batch_norm2d(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta, Tensor<T>& running_mean,
                       Tensor<T>& running_var, const BatchNormOptions& options);

template <typename T>
Tensor<T> relu(const Tensor<T>& x);

template <typename T>
Tensor<T> softmax(const Tensor<T>& x, int axis);

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);

template <typename T>
Tensor<T> sum(const Tensor<T>& x);

// x [N,in], w [out,in], b [out] or undefined.
template <typename T>
Tensor<T> linear(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b);

// [N,C,H,W] -> [N,C]
template <typename T>
Tensor<T> global_avg_pool(const Tensor<T>& x);

// Padding behaves as -infinity.
template <typename T>
Tensor<T> max_pool2d(const Tensor<T>& x, int kernel, int stride, int padding = 0);

// Mean over the batch of -log softmax(logits)[label]; logits [N,K].
template <typename T>
Tensor<T> cross_entropy(const Tensor<T>& logits, std::span<const int> labels);

template <typename T>
Tensor<T> reshape(const Tensor<T>& x, Shape shape);

// Keeps the listed channels of [N,C,H,W] in the given order.
template <typename T>
Tensor<T> select_channels(const Tensor<T>& x, std::span<const int> channels);

}  // namespace dctnet::tensor
