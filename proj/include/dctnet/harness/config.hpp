#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dctnet/model/architecture.hpp"

namespace dctnet::harness {

// `key = value` lines; '#' starts a comment; blank lines ignored. Throws
// BadConfig on a line without '=', an empty key or a repeated key.
std::vector<std::pair<std::string, std::string>> parse_key_values(const std::string& text);

// Keys: name, input = rgb|dct, reducer = none|fbs|lp|la|ccpp, reducer_k (FBS),
// reducer_out (LP/LA/CCPP), entry_stage, classes (0 = taken from the dataset).
struct NetworkConfig {
  std::string name;  // empty: the architecture's own name
  model::InputKind input = model::InputKind::DCT;
  std::optional<model::ReducerKind> reducer = model::ReducerKind::CCPP;
  int reducer_k = 0;
  int reducer_out = 0;  // 0: canonical width of the entry stage
  int entry_stage = 2;
  int classes = 0;

  // Throws BadConfig for unknown keys or unparsable values.
  bool apply(const std::string& key, const std::string& value);
};

NetworkConfig parse_network_config(const std::string& text);
NetworkConfig load_network_config(const std::filesystem::path& path);

// classes overrides the config's own value when the latter is 0. Propagates
// the builder's BadStage / ChannelMismatch / reducer errors.
model::ArchitectureSpec build_architecture(const NetworkConfig& config, int classes);

struct TrainConfig {
  std::filesystem::path dataset;          // holds train/<class>/ and test/<class>/
  std::vector<std::string> class_list;    // empty: every class directory, sorted
  int epochs = 20;
  int batch = 32;
  double lr = 0.05;
  double lr_decay = 10.0;  // lr is divided by this every lr_period epochs
  int lr_period = 8;
  double momentum = 0.9;
  int crop_blocks = 4;  // window side in 8x8 blocks; 0 keeps the full grid
  bool flip = true;
  uint64_t seed = 1;
  NetworkConfig network;

  // 120 epochs, batch 128, lr 0.05 divided by 10 every 30 epochs, momentum 0.9.
  static TrainConfig full_protocol();

  // Network keys are accepted too. `protocol = desk|full` resets the
  // schedule fields to that preset; later keys override it.
  bool apply(const std::string& key, const std::string& value);
  // epochs >= 1, batch >= 1, lr >= 0, lr_decay > 1, lr_period >= 1,
  // momentum in [0, 1), crop_blocks >= 0. Throws BadConfig.
  void validate() const;
  double lr_at(int epoch) const;  // epochs count from 1

  std::vector<std::pair<std::string, std::string>> to_key_values() const;
};

TrainConfig parse_train_config(const std::string& text);
TrainConfig load_train_config(const std::filesystem::path& path);

}  // namespace dctnet::harness
