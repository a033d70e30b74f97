#include "dctnet/harness/training.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "dctnet/error.hpp"
#include "dctnet/harness/augment.hpp"
#include "dctnet/tensor/checkpoint.hpp"
#include "dctnet/tensor/ops.hpp"

namespace dctnet::harness {

namespace fs = std::filesystem;
using nlohmann::json;
using tensor::Tensor;

namespace {

int crop_side(const TrainConfig& config) {
  return config.network.input == model::InputKind::RGB ? config.crop_blocks * 8 : config.crop_blocks;
}

Tensor<float> stack(const std::vector<Tensor<float>>& items) {
  const auto& first = items.front().shape();
  tensor::Shape shape = {int64_t(items.size())};
  shape.insert(shape.end(), first.begin(), first.end());
  auto out = Tensor<float>::zeros(shape);
  const size_t each = items.front().numel();
  for (size_t i = 0; i < items.size(); ++i) {
    if (items[i].shape() != first)
      throw Error(Errc::ShapeMismatch, "batch mixes " + tensor::shape_string(first) + " and " +
                                           tensor::shape_string(items[i].shape()) + "; set crop_blocks");
    std::copy(items[i].values().begin(), items[i].values().end(), out.values().begin() + ptrdiff_t(i * each));
  }
  return out;
}

std::string checkpoint_config(const TrainConfig& config, const std::vector<std::string>& classes,
                              const std::string& arch_name, int epoch, double top1) {
  json train = json::object();
  for (const auto& [k, v] : config.to_key_values()) train[k] = v;
  return json{{"train", train}, {"classes", classes}, {"architecture", arch_name}, {"epoch", epoch}, {"test_top1", top1}}
      .dump();
}

void save(model::Network<float>& net, const fs::path& path, const std::string& config_json) {
  tensor::Checkpoint ckpt;
  ckpt.config_json = config_json;
  ckpt.tensors = net.state();
  write_checkpoint(path, ckpt);
}

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

}  // namespace

std::vector<int> predict(model::Network<float>& net, const LoadedSplit& split, int crop) {
  constexpr size_t kBatch = 64;
  tensor::NoGradGuard guard;
  std::vector<int> out;
  out.reserve(split.inputs.size());
  for (size_t start = 0; start < split.inputs.size(); start += kBatch) {
    std::vector<Tensor<float>> items;
    for (size_t i = start; i < std::min(split.inputs.size(), start + kBatch); ++i)
      items.push_back(center_crop(split.inputs[i], crop));
    const auto logits = net.forward(stack(items), false);
    const int64_t k = logits.dim(1);
    for (size_t r = 0; r < items.size(); ++r) {
      const float* row = logits.data() + r * size_t(k);
      out.push_back(int(std::max_element(row, row + k) - row));
    }
  }
  return out;
}

TrainResult train(const TrainConfig& config, const fs::path& out_dir, std::ostream* log) {
  config.validate();
  const auto train_index = ingest(config.dataset / "train", config.class_list);
  const auto test_index = ingest(config.dataset / "test", train_index.classes);
  const int classes = int(train_index.classes.size());
  const auto arch = build_architecture(config.network, classes);
  if (arch.classes != classes)
    throw Error(Errc::ClassMapMismatch, "network has " + std::to_string(arch.classes) + " outputs, dataset has " +
                                            std::to_string(classes) + " classes");
  if (log && (train_index.skipped || test_index.skipped))
    *log << "skipped " << train_index.skipped + test_index.skipped << " non-JPEG files\n";

  const auto train_split = load_split(train_index, arch.input);
  const auto test_split = load_split(test_index, arch.input);
  const int crop = crop_side(config);

  fs::create_directories(out_dir);
  TrainResult result;
  result.best_checkpoint = out_dir / "best.ckpt";
  result.last_checkpoint = out_dir / "last.ckpt";
  result.metrics = out_dir / "metrics.jsonl";
  result.timing = out_dir / "timing.jsonl";
  std::ofstream metrics(result.metrics, std::ios::trunc), timing(result.timing, std::ios::trunc);
  if (!metrics || !timing) throw Error(Errc::UnreadablePath, "cannot write into " + out_dir.string());

  model::Network<float> net(arch, config.seed);
  auto params = net.parameters();
  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ull);
  std::vector<size_t> order(train_split.inputs.size());

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    const double lr = config.lr_at(epoch);
    std::iota(order.begin(), order.end(), size_t(0));
    std::shuffle(order.begin(), order.end(), rng);

    double loss_sum = 0;
    for (size_t start = 0; start < order.size(); start += size_t(config.batch)) {
      const size_t end = std::min(order.size(), start + size_t(config.batch));
      std::vector<Tensor<float>> items;
      std::vector<int> labels;
      for (size_t i = start; i < end; ++i) {
        const auto& x = train_split.inputs[order[i]];
        items.push_back(arch.input == model::InputKind::DCT ? augment_dct(x, crop, config.flip, rng)
                                                            : augment_pixels(x, crop, config.flip, rng));
        labels.push_back(train_split.labels[order[i]]);
      }
      auto loss = tensor::cross_entropy(net.forward(stack(items), true), labels);
      loss_sum += double(loss.item()) * double(end - start);
      tensor::backward(loss);
      tensor::sgd_step<float>(params, lr, config.momentum);
    }

    const auto predictions = predict(net, test_split, crop);
    size_t correct = 0;
    for (size_t i = 0; i < predictions.size(); ++i) correct += predictions[i] == test_split.labels[i];
    EpochMetrics m;
    m.epoch = epoch;
    m.train_loss = loss_sum / double(order.size());
    m.test_top1 = double(correct) / double(predictions.size());

    const auto ckpt_config = checkpoint_config(config, train_index.classes, arch.name, epoch, m.test_top1);
    if (epoch == 1 || m.test_top1 > result.best_top1) {
      result.best_top1 = m.test_top1;
      result.best_epoch = epoch;
      save(net, result.best_checkpoint, ckpt_config);
    }
    if (epoch == config.epochs) save(net, result.last_checkpoint, ckpt_config);

    m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    metrics << json{{"epoch", m.epoch}, {"train_loss", m.train_loss}, {"test_top1", m.test_top1}}.dump() << "\n";
    metrics.flush();
    timing << json{{"epoch", m.epoch}, {"wall_seconds", m.wall_seconds}}.dump() << "\n";
    timing.flush();
    result.epochs.push_back(m);
    if (log)
      *log << "epoch " << epoch << "/" << config.epochs << "  lr " << lr << "  loss " << fixed(m.train_loss, 4)
           << "  test_top1 " << fixed(m.test_top1, 4) << "  (" << fixed(m.wall_seconds, 1) << " s)\n";
  }
  return result;
}

CoarseMap load_coarse_map(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::UnreadablePath, "cannot open " + path.string());
  CoarseMap map;
  std::string line;
  for (int number = 1; std::getline(in, line); ++number) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream is(line);
    std::string cls, group, extra;
    if (!(is >> cls)) continue;
    if (!(is >> group) || (is >> extra))
      throw Error(Errc::BadConfig, path.string() + " line " + std::to_string(number) + ": expected 'class group'");
    if (!map.emplace(cls, group).second)
      throw Error(Errc::BadConfig, path.string() + ": class '" + cls + "' listed twice");
  }
  return map;
}

EvalReport evaluate(const fs::path& checkpoint, const DatasetIndex& data, const CoarseMap* coarse) {
  const auto ckpt = tensor::read_checkpoint(checkpoint);
  TrainConfig config;
  std::vector<std::string> classes;
  try {
    const auto meta = json::parse(ckpt.config_json);
    for (const auto& [k, v] : meta.at("train").items())
      if (!config.apply(k, v.get<std::string>()))
        throw Error(Errc::BadCheckpoint, "unknown configuration key '" + k + "'");
    classes = meta.at("classes").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw Error(Errc::BadCheckpoint, checkpoint.string() + ": configuration is unreadable (" + e.what() + ")");
  }
  if (data.classes != classes)
    throw Error(Errc::ClassMapMismatch, "dataset classes differ from the " + std::to_string(classes.size()) +
                                            " classes the checkpoint was trained on");
  std::vector<std::string> groups;
  if (coarse) {
    for (const auto& c : classes) {
      auto it = coarse->find(c);
      if (it == coarse->end()) throw Error(Errc::ClassMapMismatch, "coarse map has no group for class '" + c + "'");
      groups.push_back(it->second);
    }
  }

  model::Network<float> net(build_architecture(config.network, int(classes.size())), 0);
  net.load_state(ckpt.tensors);
  const auto split = load_split(data, net.arch().input);
  const auto predictions = predict(net, split, crop_side(config));

  EvalReport report;
  report.total = predictions.size();
  size_t coarse_correct = 0;
  for (size_t i = 0; i < predictions.size(); ++i) {
    report.correct += predictions[i] == split.labels[i];
    if (coarse) coarse_correct += groups[size_t(predictions[i])] == groups[size_t(split.labels[i])];
  }
  report.top1 = double(report.correct) / double(report.total);
  if (coarse) report.coarse_top1 = double(coarse_correct) / double(report.total);
  return report;
}

}  // namespace dctnet::harness
