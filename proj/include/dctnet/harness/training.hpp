#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dctnet/harness/config.hpp"
#include "dctnet/harness/dataset.hpp"
#include "dctnet/model/network.hpp"

namespace dctnet::harness {

struct EpochMetrics {
  int epoch = 0;
  double train_loss = 0;
  double test_top1 = 0;
  double wall_seconds = 0;
};

struct TrainResult {
  std::vector<EpochMetrics> epochs;
  int best_epoch = 0;
  double best_top1 = 0;
  std::filesystem::path best_checkpoint, last_checkpoint, metrics, timing;
};

// Ingests <dataset>/train and <dataset>/test, trains with SGD + momentum and
// the step schedule, and writes into out_dir:
//   metrics.jsonl  {"epoch","train_loss","test_top1"} per line
//   timing.jsonl   {"epoch","wall_seconds"} per line
//   best.ckpt      highest test top-1 so far (earliest epoch on ties)
//   last.ckpt      state after the final epoch
// Everything except timing.jsonl is a function of (config, dataset) alone.
// `log`, when given, receives one progress line per epoch.
TrainResult train(const TrainConfig& config, const std::filesystem::path& out_dir, std::ostream* log = nullptr);

// Top-1 over a loaded split in evaluation mode with center crops of
// `crop` (blocks for DCT input, pixels for RGB; 0 keeps the input).
std::vector<int> predict(model::Network<float>& net, const LoadedSplit& split, int crop);

// Class name -> group name, one "class group" pair per line. Throws BadConfig
// on malformed lines.
using CoarseMap = std::map<std::string, std::string>;
CoarseMap load_coarse_map(const std::filesystem::path& path);

struct EvalReport {
  size_t total = 0;
  size_t correct = 0;
  double top1 = 0;
  std::optional<double> coarse_top1;
};

// Rebuilds the network from the checkpoint's stored configuration and scores
// `data` with center crops. The checkpoint file is only read. Throws
// ClassMapMismatch when the dataset's classes differ from the checkpoint's or
// the coarse map leaves a class out.
EvalReport evaluate(const std::filesystem::path& checkpoint, const DatasetIndex& data,
                    const CoarseMap* coarse = nullptr);

}  // namespace dctnet::harness
