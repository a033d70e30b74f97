#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dctnet/model/architecture.hpp"
#include "dctnet/tensor/checkpoint.hpp"
#include "dctnet/tensor/optim.hpp"

namespace dctnet::model {

using tensor::Parameter;
using tensor::Tensor;

template <typename T>
struct ConvUnit {
  Parameter<T> weight, bias;
  int stride = 1, padding = 0;
};

template <typename T>
struct BatchNormUnit {
  Parameter<T> gamma, beta;
  Tensor<T> running_mean, running_var;
};

template <typename T>
struct BottleneckUnit {
  ConvUnit<T> conv1, conv2, conv3;
  BatchNormUnit<T> bn1, bn2, bn3;
  std::optional<ConvUnit<T>> projection;
  std::optional<BatchNormUnit<T>> projection_bn;
};

// Runtime parameters and forward pass for one ArchitectureSpec.
template <typename T>
class Network {
 public:
  // He-normal conv/linear/reducer weights, zero biases, BN gamma 1 beta 0,
  // drawn in definition order from a generator seeded with `seed`.
  Network(ArchitectureSpec arch, uint64_t seed);

  const ArchitectureSpec& arch() const { return arch_; }

  // x [N, C, H, W] with C = arch().input_channels(); returns logits [N, classes].
  // Throws GeometryMismatch on a wrong rank or channel count. When
  // stage_shapes is given, each stage's output shape is appended.
  Tensor<T> forward(const Tensor<T>& x, bool training, std::vector<tensor::Shape>* stage_shapes = nullptr);

  Tensor<T> forward_block(BottleneckUnit<T>& block, const Tensor<T>& x, bool training);

  std::vector<Parameter<T>*> parameters();
  Parameter<T>* find_parameter(const std::string& name);
  std::vector<std::vector<BottleneckUnit<T>>>& stages() { return stages_; }

  // Parameters and running statistics in definition order.
  std::vector<tensor::NamedTensor> state();
  // Throws BadCheckpoint when names or shapes differ from this network.
  void load_state(const std::vector<tensor::NamedTensor>& tensors);

 private:
  using Visitor = std::function<void(const std::string& name, Tensor<T>& value, Parameter<T>* param)>;
  void visit(const Visitor& fn);
  Tensor<T> batch_norm(BatchNormUnit<T>& bn, const Tensor<T>& x, bool training);
  Tensor<T> conv(ConvUnit<T>& c, const Tensor<T>& x);

  ArchitectureSpec arch_;
  std::optional<ConvUnit<T>> stem_;
  std::optional<BatchNormUnit<T>> stem_bn_;
  std::optional<BatchNormUnit<T>> input_bn_;
  std::optional<Parameter<T>> reducer_weight_, reducer_bias_;
  std::vector<std::vector<BottleneckUnit<T>>> stages_;
  Parameter<T> fc_weight_, fc_bias_;
};

extern template class Network<float>;
extern template class Network<double>;

}  // namespace dctnet::model
