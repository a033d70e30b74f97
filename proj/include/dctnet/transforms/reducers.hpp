#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dctnet/tensor/tensor.hpp"

namespace dctnet::transforms {

using tensor::Tensor;

// Native DCT channel layout: Y zig-zag 0..63, Cb 0..63, Cr 0..63.
constexpr int kDctChannels = 192;
constexpr int kCoefficientsPerComponent = 64;

enum class ReducerKind { FBS, LP, LA, CCPP };

std::string_view to_string(ReducerKind kind);
std::optional<ReducerKind> parse_reducer_kind(std::string_view name);

struct ReducerSpec {
  ReducerKind kind = ReducerKind::CCPP;
  int n = kDctChannels;
  int m = 64;  // for FBS, always 3k

  static ReducerSpec fbs(int k);
  static ReducerSpec lp(int m) { return {ReducerKind::LP, kDctChannels, m}; }
  static ReducerSpec la(int m) { return {ReducerKind::LA, kDctChannels, m}; }
  static ReducerSpec ccpp(int m) { return {ReducerKind::CCPP, kDctChannels, m}; }

  int fbs_k() const { return m / 3; }
  // Throws KOutOfRange / GroupingError / ShapeMismatch when the invariants fail.
  void validate() const;
  // Learnable weight shape; empty for FBS.
  tensor::Shape weight_shape() const;
  bool has_bias() const { return kind == ReducerKind::CCPP; }
  std::string label() const;  // e.g. "CCPP (1x64)", "FBS (3x32)"
};

// All ops accept [C,H,W] or [N,C,H,W] and return the same rank.

// Keeps zig-zag indices 0..k-1 of each component.
template <typename T>
Tensor<T> fbs_select(const Tensor<T>& x, int k);

std::vector<int> fbs_channels(int k);

// y[i] = sum_j ws[i,j] x[j] at every location; ws [m,n], no bias.
template <typename T>
Tensor<T> lp_project(const Tensor<T>& x, const Tensor<T>& ws);

// Groups of n/m adjacent channels; per location, softmax over the group of
// w[i,j] * r[i,j] weights the group members. w [m, n/m].
template <typename T>
Tensor<T> local_attention(const Tensor<T>& x, const Tensor<T>& w);

// Attention weights a_i[j] as [N, m, n/m, H, W] (or without N for rank-3 input); no graph.
template <typename T>
Tensor<T> local_attention_weights(const Tensor<T>& x, const Tensor<T>& w);

// y = max(0, W x + b) per location; w [m,n], b [m].
template <typename T>
Tensor<T> ccpp(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b);

}  // namespace dctnet::transforms
