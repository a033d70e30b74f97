#include "dctnet/harness/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "dctnet/error.hpp"

namespace dctnet::harness {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) throw Error(Errc::BadConfig, key + ": cannot parse '" + value + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw Error(Errc::BadConfig, key + ": expected a boolean, got '" + value + "'");
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::UnreadablePath, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::vector<std::pair<std::string, std::string>> parse_key_values(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::set<std::string> seen;
  std::istringstream is(text);
  std::string line;
  for (int number = 1; std::getline(is, line); ++number) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = "line " + std::to_string(number);
    if (eq == std::string::npos) throw Error(Errc::BadConfig, where + ": expected key = value");
    std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key.empty()) throw Error(Errc::BadConfig, where + ": empty key");
    if (!seen.insert(key).second) throw Error(Errc::BadConfig, where + ": repeated key '" + key + "'");
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

bool NetworkConfig::apply(const std::string& key, const std::string& value) {
  if (key == "name") {
    name = value;
  } else if (key == "input") {
    if (value == "rgb")
      input = model::InputKind::RGB;
    else if (value == "dct")
      input = model::InputKind::DCT;
    else
      throw Error(Errc::BadConfig, "input must be rgb or dct, got '" + value + "'");
  } else if (key == "reducer") {
    if (value == "none") {
      reducer.reset();
    } else {
      reducer = transforms::parse_reducer_kind(value);
      if (!reducer) throw Error(Errc::BadConfig, "reducer must be none, fbs, lp, la or ccpp, got '" + value + "'");
    }
  } else if (key == "reducer_k") {
    reducer_k = parse_number<int>(key, value);
  } else if (key == "reducer_out") {
    reducer_out = parse_number<int>(key, value);
  } else if (key == "entry_stage") {
    entry_stage = parse_number<int>(key, value);
  } else if (key == "classes") {
    classes = parse_number<int>(key, value);
  } else {
    return false;
  }
  return true;
}

NetworkConfig parse_network_config(const std::string& text) {
  NetworkConfig c;
  for (const auto& [k, v] : parse_key_values(text))
    if (!c.apply(k, v)) throw Error(Errc::BadConfig, "unknown network key '" + k + "'");
  return c;
}

NetworkConfig load_network_config(const std::filesystem::path& path) {
  try {
    return parse_network_config(read_text(path));
  } catch (const Error& e) {
    throw e.with_context(path.string());
  }
}

model::ArchitectureSpec build_architecture(const NetworkConfig& config, int classes) {
  const int width = config.classes > 0 ? config.classes : classes;
  if (width < 1) throw Error(Errc::BadConfig, "classifier width is not set");
  model::ArchitectureSpec arch;
  if (config.input == model::InputKind::RGB) {
    arch = model::build_rgb_resnet50(width);
  } else {
    std::optional<model::ReducerSpec> reducer;
    if (config.reducer) {
      const int out = config.reducer_out > 0 ? config.reducer_out
                                             : (config.entry_stage >= 2 && config.entry_stage <= 5
                                                    ? model::canonical_mid(config.entry_stage)
                                                    : 64);
      switch (*config.reducer) {
        case model::ReducerKind::FBS: reducer = model::ReducerSpec::fbs(config.reducer_k > 0 ? config.reducer_k : 64); break;
        case model::ReducerKind::LP: reducer = model::ReducerSpec::lp(out); break;
        case model::ReducerKind::LA: reducer = model::ReducerSpec::la(out); break;
        case model::ReducerKind::CCPP: reducer = model::ReducerSpec::ccpp(out); break;
      }
    }
    arch = model::build_dct_network(reducer, config.entry_stage, width);
  }
  if (!config.name.empty()) arch.name = config.name;
  return arch;
}

TrainConfig TrainConfig::full_protocol() {
  TrainConfig c;
  c.epochs = 120;
  c.batch = 128;
  c.lr = 0.05;
  c.lr_decay = 10.0;
  c.lr_period = 30;
  c.momentum = 0.9;
  return c;
}

bool TrainConfig::apply(const std::string& key, const std::string& value) {
  if (key == "protocol") {
    TrainConfig preset;
    if (value == "full")
      preset = full_protocol();
    else if (value != "desk")
      throw Error(Errc::BadConfig, "protocol must be desk or full, got '" + value + "'");
    epochs = preset.epochs;
    batch = preset.batch;
    lr = preset.lr;
    lr_decay = preset.lr_decay;
    lr_period = preset.lr_period;
    momentum = preset.momentum;
  } else if (key == "dataset") {
    dataset = value;
  } else if (key == "class_list") {
    class_list.clear();
    std::istringstream is(value);
    for (std::string item; std::getline(is, item, ',');)
      if (auto t = trim(item); !t.empty()) class_list.push_back(t);
  } else if (key == "epochs") {
    epochs = parse_number<int>(key, value);
  } else if (key == "batch") {
    batch = parse_number<int>(key, value);
  } else if (key == "lr") {
    lr = parse_number<double>(key, value);
  } else if (key == "lr_decay") {
    lr_decay = parse_number<double>(key, value);
  } else if (key == "lr_period") {
    lr_period = parse_number<int>(key, value);
  } else if (key == "momentum") {
    momentum = parse_number<double>(key, value);
  } else if (key == "crop_blocks") {
    crop_blocks = parse_number<int>(key, value);
  } else if (key == "flip") {
    flip = parse_bool(key, value);
  } else if (key == "seed") {
    seed = parse_number<uint64_t>(key, value);
  } else {
    return network.apply(key, value);
  }
  return true;
}

void TrainConfig::validate() const {
  auto fail = [](const std::string& m) { throw Error(Errc::BadConfig, m); };
  if (epochs < 1) fail("epochs must be >= 1");
  if (batch < 1) fail("batch must be >= 1");
  if (!(lr >= 0) || !std::isfinite(lr)) fail("lr must be >= 0");
  if (!(lr_decay > 1)) fail("lr_decay must be > 1");
  if (lr_period < 1) fail("lr_period must be >= 1");
  if (!(momentum >= 0 && momentum < 1)) fail("momentum must be in [0, 1)");
  if (crop_blocks < 0) fail("crop_blocks must be >= 0");
}

double TrainConfig::lr_at(int epoch) const { return lr / std::pow(lr_decay, (epoch - 1) / lr_period); }

std::vector<std::pair<std::string, std::string>> TrainConfig::to_key_values() const {
  std::string classes_joined;
  for (size_t i = 0; i < class_list.size(); ++i) classes_joined += (i ? "," : "") + class_list[i];
  std::vector<std::pair<std::string, std::string>> kv = {
      {"dataset", dataset.string()},
      {"class_list", classes_joined},
      {"epochs", std::to_string(epochs)},
      {"batch", std::to_string(batch)},
      {"lr", format_double(lr)},
      {"lr_decay", format_double(lr_decay)},
      {"lr_period", std::to_string(lr_period)},
      {"momentum", format_double(momentum)},
      {"crop_blocks", std::to_string(crop_blocks)},
      {"flip", flip ? "true" : "false"},
      {"seed", std::to_string(seed)},
      {"input", network.input == model::InputKind::RGB ? "rgb" : "dct"},
      {"reducer", network.reducer ? std::string(transforms::to_string(*network.reducer)) : "none"},
      {"reducer_k", std::to_string(network.reducer_k)},
      {"reducer_out", std::to_string(network.reducer_out)},
      {"entry_stage", std::to_string(network.entry_stage)},
      {"classes", std::to_string(network.classes)},
  };
  if (!network.name.empty()) kv.emplace_back("name", network.name);
  return kv;
}

TrainConfig parse_train_config(const std::string& text) {
  TrainConfig c;
  for (const auto& [k, v] : parse_key_values(text))
    if (!c.apply(k, v)) throw Error(Errc::BadConfig, "unknown key '" + k + "'");
  return c;
}

TrainConfig load_train_config(const std::filesystem::path& path) {
  try {
    return parse_train_config(read_text(path));
  } catch (const Error& e) {
    throw e.with_context(path.string());
  }
}

}  // namespace dctnet::harness
