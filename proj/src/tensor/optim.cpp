#include "dctnet/tensor/optim.hpp"

#include <cmath>

#include "dctnet/error.hpp"

namespace dctnet::tensor {

template <typename T>
void sgd_step(std::span<Parameter<T>* const> params, double lr, double momentum) {
  for (const Parameter<T>* p : params)
    if (!p->value.has_grad()) throw Error(Errc::MissingGradient, "no gradient for parameter '" + p->name + "'");
  const T lr_t = T(lr), mom_t = T(momentum);
  for (Parameter<T>* p : params) {
    T* data = p->value.data();
    const std::vector<T>& g = p->value.grad();
    std::vector<T>& v = p->momentum;
    for (size_t i = 0; i < v.size(); ++i) {
      v[i] = mom_t * v[i] + g[i];
      data[i] -= lr_t * v[i];
    }
    p->value.zero_grad();
  }
}

template <typename T>
void he_normal(Tensor<T>& t, int64_t fan_in, std::mt19937_64& rng) {
  std::normal_distribution<double> d(0.0, std::sqrt(2.0 / double(fan_in)));
  for (auto& v : t.values()) v = T(d(rng));
}

template void sgd_step<float>(std::span<Parameter<float>* const>, double, double);
template void sgd_step<double>(std::span<Parameter<double>* const>, double, double);
template void he_normal<float>(Tensor<float>&, int64_t, std::mt19937_64&);
template void he_normal<double>(Tensor<double>&, int64_t, std::mt19937_64&);

}  // namespace dctnet::tensor
