#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "dctnet/tensor/tensor.hpp"

namespace dctnet::tensor {

template <typename T>
struct Parameter {
  std::string name;
  Tensor<T> value;            // requires_grad = true
  std::vector<T> momentum;    // zero-initialized, same length as value

  Parameter() = default;
  Parameter(std::string n, Tensor<T> v) : name(std::move(n)), value(std::move(v)) {
    value.set_requires_grad(true);
    momentum.assign(value.numel(), T(0));
  }
};

// v <- momentum * v + grad; p <- p - lr * v; then grads are cleared.
// Throws MissingGradient if any parameter has no gradient, before touching any.
template <typename T>
void sgd_step(std::span<Parameter<T>* const> params, double lr, double momentum);

// Normal(0, sqrt(2 / fan_in)).
template <typename T>
void he_normal(Tensor<T>& t, int64_t fan_in, std::mt19937_64& rng);

}  // namespace dctnet::tensor
