#include "dctnet/model/network.hpp"

#include <random>

#include "dctnet/error.hpp"
#include "dctnet/tensor/ops.hpp"

namespace dctnet::model {

using tensor::Shape;

namespace {

template <typename T>
ConvUnit<T> make_conv(int in, int out, int k, int stride, int padding, std::mt19937_64& rng) {
  ConvUnit<T> c;
  auto w = Tensor<T>::zeros({out, in, k, k});
  tensor::he_normal(w, int64_t(in) * k * k, rng);
  c.weight = Parameter<T>("weight", w);
  c.bias = Parameter<T>("bias", Tensor<T>::zeros({out}));
  c.stride = stride;
  c.padding = padding;
  return c;
}

template <typename T>
BatchNormUnit<T> make_bn(int channels) {
  BatchNormUnit<T> b;
  b.gamma = Parameter<T>("gamma", Tensor<T>::full({channels}, T(1)));
  b.beta = Parameter<T>("beta", Tensor<T>::zeros({channels}));
  b.running_mean = Tensor<T>::zeros({channels});
  b.running_var = Tensor<T>::full({channels}, T(1));
  return b;
}

}  // namespace

template <typename T>
Network<T>::Network(ArchitectureSpec arch, uint64_t seed) : arch_(std::move(arch)) {
  validate(arch_);
  std::mt19937_64 rng(seed);
  if (arch_.input == InputKind::RGB) {
    stem_ = make_conv<T>(3, 64, 7, 2, 3, rng);
    stem_bn_ = make_bn<T>(64);
  }
  if (arch_.input_batch_norm) input_bn_ = make_bn<T>(arch_.input_channels());
  if (arch_.reducer && arch_.reducer->kind != ReducerKind::FBS) {
    const auto& r = *arch_.reducer;
    auto w = Tensor<T>::zeros(r.weight_shape());
    tensor::he_normal(w, r.kind == ReducerKind::LA ? r.n / r.m : r.n, rng);
    reducer_weight_ = Parameter<T>("weight", w);
    if (r.has_bias()) reducer_bias_ = Parameter<T>("bias", Tensor<T>::zeros({r.m}));
  }
  for (const auto& st : arch_.stages) {
    std::vector<BottleneckUnit<T>> units;
    for (const auto& blk : st.blocks) {
      BottleneckUnit<T> u;
      u.conv1 = make_conv<T>(blk.in_channels, blk.mid_channels, 1, blk.stride, 0, rng);
      u.bn1 = make_bn<T>(blk.mid_channels);
      u.conv2 = make_conv<T>(blk.mid_channels, blk.mid_channels, 3, 1, 1, rng);
      u.bn2 = make_bn<T>(blk.mid_channels);
      u.conv3 = make_conv<T>(blk.mid_channels, blk.out_channels, 1, 1, 0, rng);
      u.bn3 = make_bn<T>(blk.out_channels);
      if (blk.projection) {
        u.projection = make_conv<T>(blk.in_channels, blk.out_channels, 1, blk.stride, 0, rng);
        u.projection_bn = make_bn<T>(blk.out_channels);
      }
      units.push_back(std::move(u));
    }
    stages_.push_back(std::move(units));
  }
  auto fw = Tensor<T>::zeros({arch_.classes, arch_.feature_channels()});
  tensor::he_normal(fw, arch_.feature_channels(), rng);
  fc_weight_ = Parameter<T>("weight", fw);
  fc_bias_ = Parameter<T>("bias", Tensor<T>::zeros({arch_.classes}));
}

template <typename T>
void Network<T>::visit(const Visitor& fn) {
  auto param = [&](const std::string& name, Parameter<T>& p) { fn(name, p.value, &p); };
  auto bn = [&](const std::string& prefix, BatchNormUnit<T>& b) {
    param(prefix + ".gamma", b.gamma);
    param(prefix + ".beta", b.beta);
    fn(prefix + ".running_mean", b.running_mean, nullptr);
    fn(prefix + ".running_var", b.running_var, nullptr);
  };
  auto conv = [&](const std::string& prefix, ConvUnit<T>& c) {
    param(prefix + ".weight", c.weight);
    param(prefix + ".bias", c.bias);
  };
  if (stem_) {
    conv("stem.conv", *stem_);
    bn("stem.bn", *stem_bn_);
  }
  if (input_bn_) bn("input_bn", *input_bn_);
  if (reducer_weight_) param("reducer.weight", *reducer_weight_);
  if (reducer_bias_) param("reducer.bias", *reducer_bias_);
  for (size_t s = 0; s < stages_.size(); ++s)
    for (size_t b = 0; b < stages_[s].size(); ++b) {
      auto& u = stages_[s][b];
      const std::string prefix = "stage" + std::to_string(arch_.stages[s].index) + ".block" + std::to_string(b);
      conv(prefix + ".conv1", u.conv1);
      bn(prefix + ".bn1", u.bn1);
      conv(prefix + ".conv2", u.conv2);
      bn(prefix + ".bn2", u.bn2);
      conv(prefix + ".conv3", u.conv3);
      bn(prefix + ".bn3", u.bn3);
      if (u.projection) {
        conv(prefix + ".projection", *u.projection);
        bn(prefix + ".projection_bn", *u.projection_bn);
      }
    }
  param("fc.weight", fc_weight_);
  param("fc.bias", fc_bias_);
}

template <typename T>
std::vector<Parameter<T>*> Network<T>::parameters() {
  std::vector<Parameter<T>*> out;
  visit([&](const std::string& name, Tensor<T>&, Parameter<T>* p) {
    if (p) {
      p->name = name;
      out.push_back(p);
    }
  });
  return out;
}

template <typename T>
Parameter<T>* Network<T>::find_parameter(const std::string& name) {
  for (auto* p : parameters())
    if (p->name == name) return p;
  return nullptr;
}

template <typename T>
std::vector<tensor::NamedTensor> Network<T>::state() {
  std::vector<tensor::NamedTensor> out;
  visit([&](const std::string& name, Tensor<T>& t, Parameter<T>*) {
    out.push_back({name, t.shape(), std::vector<float>(t.values().begin(), t.values().end())});
  });
  return out;
}

template <typename T>
void Network<T>::load_state(const std::vector<tensor::NamedTensor>& tensors) {
  size_t i = 0;
  visit([&](const std::string& name, Tensor<T>& t, Parameter<T>*) {
    if (i >= tensors.size()) throw Error(Errc::BadCheckpoint, "checkpoint ends before '" + name + "'");
    const auto& src = tensors[i++];
    if (src.name != name || src.shape != t.shape())
      throw Error(Errc::BadCheckpoint, "checkpoint has '" + src.name + "' " + tensor::shape_string(src.shape) +
                                           " where the network expects '" + name + "' " +
                                           tensor::shape_string(t.shape()));
    for (size_t k = 0; k < src.data.size(); ++k) t.values()[k] = T(src.data[k]);
  });
  if (i != tensors.size()) throw Error(Errc::BadCheckpoint, "checkpoint has extra tensors");
}

template <typename T>
Tensor<T> Network<T>::batch_norm(BatchNormUnit<T>& bn, const Tensor<T>& x, bool training) {
  return tensor::batch_norm2d(x, bn.gamma.value, bn.beta.value, bn.running_mean, bn.running_var,
                              {.training = training});
}

template <typename T>
Tensor<T> Network<T>::conv(ConvUnit<T>& c, const Tensor<T>& x) {
  return tensor::conv2d(x, c.weight.value, c.bias.value, c.stride, c.padding);
}

template <typename T>
Tensor<T> Network<T>::forward_block(BottleneckUnit<T>& u, const Tensor<T>& x, bool training) {
  auto h = tensor::relu(batch_norm(u.bn1, conv(u.conv1, x), training));
  h = tensor::relu(batch_norm(u.bn2, conv(u.conv2, h), training));
  h = batch_norm(u.bn3, conv(u.conv3, h), training);
  auto shortcut = u.projection ? batch_norm(*u.projection_bn, conv(*u.projection, x), training) : x;
  return tensor::relu(tensor::add(h, shortcut));
}

template <typename T>
Tensor<T> Network<T>::forward(const Tensor<T>& x, bool training, std::vector<Shape>* stage_shapes) {
  if (!x.defined() || x.rank() != 4 || x.dim(1) != arch_.input_channels())
    throw Error(Errc::GeometryMismatch, arch_.name + " expects [N," + std::to_string(arch_.input_channels()) +
                                            ",H,W], got " + (x.defined() ? tensor::shape_string(x.shape()) : "nothing"));
  Tensor<T> h = x;
  if (stem_) {
    h = tensor::relu(batch_norm(*stem_bn_, conv(*stem_, h), training));
    h = tensor::max_pool2d(h, 3, 2, 1);
  }
  if (input_bn_) h = batch_norm(*input_bn_, h, training);
  if (arch_.reducer) {
    switch (arch_.reducer->kind) {
      case ReducerKind::FBS: h = transforms::fbs_select(h, arch_.reducer->fbs_k()); break;
      case ReducerKind::LP: h = transforms::lp_project(h, reducer_weight_->value); break;
      case ReducerKind::LA: h = transforms::local_attention(h, reducer_weight_->value); break;
      case ReducerKind::CCPP: h = transforms::ccpp(h, reducer_weight_->value, reducer_bias_->value); break;
    }
  }
  for (auto& stage : stages_) {
    for (auto& u : stage) h = forward_block(u, h, training);
    if (stage_shapes) stage_shapes->push_back(h.shape());
  }
  h = tensor::global_avg_pool(h);
  return tensor::linear(h, fc_weight_.value, fc_bias_.value);
}

template class Network<float>;
template class Network<double>;

}  // namespace dctnet::model
