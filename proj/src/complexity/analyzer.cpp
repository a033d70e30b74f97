#include "dctnet/complexity/analyzer.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "dctnet/error.hpp"

namespace dctnet::complexity {

using model::ArchitectureSpec;
using model::InputKind;

namespace {

int window_out(int size, int kernel, int stride, int padding) {
  const int span = size + 2 * padding - kernel;
  if (span < 0 || stride < 1) throw Error(Errc::ShapeMismatch, "window larger than its input");
  return span / stride + 1;
}

void expect_channels(const LayerSpec& layer, const FeatureShape& in) {
  if (layer.in_channels != in.channels)
    throw Error(Errc::ShapeMismatch, "layer expects " + std::to_string(layer.in_channels) + " channels, input has " +
                                         std::to_string(in.channels));
}

}  // namespace

LayerCount count_layer(const LayerSpec& layer, const FeatureShape& in) {
  LayerCount out;
  const uint64_t hw = uint64_t(in.height) * in.width;
  switch (layer.kind) {
    case LayerKind::Conv:
    case LayerKind::LP:
    case LayerKind::CCPP: {
      expect_channels(layer, in);
      const int k = layer.kind == LayerKind::Conv ? layer.kernel : 1;
      const int s = layer.kind == LayerKind::Conv ? layer.stride : 1;
      const int p = layer.kind == LayerKind::Conv ? layer.padding : 0;
      const bool bias = layer.kind == LayerKind::CCPP || (layer.kind == LayerKind::Conv && layer.bias);
      out.output = {layer.out_channels, window_out(in.height, k, s, p), window_out(in.width, k, s, p)};
      const uint64_t weights = uint64_t(layer.out_channels) * layer.in_channels * k * k;
      out.macs = weights * uint64_t(out.output.height) * out.output.width;
      out.params = weights + (bias ? uint64_t(layer.out_channels) : 0);
      break;
    }
    case LayerKind::Linear:
      expect_channels(layer, in);
      if (hw != 1) throw Error(Errc::ShapeMismatch, "linear layer needs a pooled 1x1 input");
      out.output = {layer.out_channels, 1, 1};
      out.macs = uint64_t(layer.in_channels) * layer.out_channels;
      out.params = out.macs + (layer.bias ? uint64_t(layer.out_channels) : 0);
      break;
    case LayerKind::BatchNorm:
      expect_channels(layer, in);
      out.output = in;
      out.params = 2ull * in.channels;
      break;
    case LayerKind::ReLU:
    case LayerKind::Add:
      out.output = in;
      break;
    case LayerKind::MaxPool:
      out.output = {in.channels, window_out(in.height, layer.kernel, layer.stride, layer.padding),
                    window_out(in.width, layer.kernel, layer.stride, layer.padding)};
      break;
    case LayerKind::GlobalAvgPool:
      out.output = {in.channels, 1, 1};
      break;
    case LayerKind::FBS:
      expect_channels(layer, in);
      if (layer.out_channels % 3 != 0 || layer.out_channels < 3 || layer.out_channels > in.channels)
        throw Error(Errc::ShapeMismatch, "FBS output must be 3k channels of the input");
      out.output = {layer.out_channels, in.height, in.width};
      break;
    case LayerKind::LA:
      expect_channels(layer, in);
      if (layer.out_channels <= 0 || in.channels % layer.out_channels != 0)
        throw Error(Errc::ShapeMismatch, "LA output count must divide the input channels");
      out.output = {layer.out_channels, in.height, in.width};
      out.macs = 2ull * in.channels * hw;
      out.params = uint64_t(in.channels);
      break;
  }
  return out;
}

namespace {

class Walker {
 public:
  Walker(ComplexityReport& report, FeatureShape shape) : report_(report), shape_(shape) {}

  FeatureShape apply(const std::string& name, const LayerSpec& layer, const FeatureShape& input) {
    LayerCount c = count_layer(layer, input);
    report_.rows.push_back({name, c.output, c.macs, c.params});
    report_.total_macs += c.macs;
    report_.total_params += c.params;
    return c.output;
  }
  void step(const std::string& name, const LayerSpec& layer) { shape_ = apply(name, layer, shape_); }
  FeatureShape& shape() { return shape_; }

 private:
  ComplexityReport& report_;
  FeatureShape shape_;
};

LayerSpec conv(int in, int out, int k, int stride, int pad) {
  return {LayerKind::Conv, in, out, k, stride, pad, true};
}
LayerSpec bn(int c) { return {LayerKind::BatchNorm, c, c}; }
LayerSpec relu() { return {LayerKind::ReLU}; }

}  // namespace

ComplexityReport count_network(const ArchitectureSpec& arch, int height, int width) {
  model::validate(arch);
  ComplexityReport report;
  report.approach = arch.name;
  Walker w(report, {arch.input_channels(), height, width});

  if (arch.input == InputKind::RGB) {
    w.step("stem.conv", conv(3, 64, 7, 2, 3));
    w.step("stem.bn", bn(64));
    w.step("stem.relu", relu());
    w.step("stem.maxpool", {LayerKind::MaxPool, 64, 64, 3, 2, 1});
  }
  if (arch.input_batch_norm) w.step("input_bn", bn(arch.input_channels()));
  if (arch.reducer) {
    const auto& r = *arch.reducer;
    LayerKind kind = r.kind == model::ReducerKind::FBS  ? LayerKind::FBS
                     : r.kind == model::ReducerKind::LP ? LayerKind::LP
                     : r.kind == model::ReducerKind::LA ? LayerKind::LA
                                                        : LayerKind::CCPP;
    w.step("reducer", {kind, r.n, r.m});
  }
  for (const auto& st : arch.stages)
    for (size_t b = 0; b < st.blocks.size(); ++b) {
      const auto& blk = st.blocks[b];
      const std::string p = "stage" + std::to_string(st.index) + ".block" + std::to_string(b);
      const FeatureShape block_in = w.shape();
      w.step(p + ".conv1", conv(blk.in_channels, blk.mid_channels, 1, blk.stride, 0));
      w.step(p + ".bn1", bn(blk.mid_channels));
      w.step(p + ".relu1", relu());
      w.step(p + ".conv2", conv(blk.mid_channels, blk.mid_channels, 3, 1, 1));
      w.step(p + ".bn2", bn(blk.mid_channels));
      w.step(p + ".relu2", relu());
      w.step(p + ".conv3", conv(blk.mid_channels, blk.out_channels, 1, 1, 0));
      w.step(p + ".bn3", bn(blk.out_channels));
      if (blk.projection) {
        FeatureShape s = w.apply(p + ".projection", conv(blk.in_channels, blk.out_channels, 1, blk.stride, 0), block_in);
        s = w.apply(p + ".projection_bn", bn(blk.out_channels), s);
        if (!(s == w.shape())) throw Error(Errc::ShapeMismatch, p + ": shortcut and residual shapes differ");
      } else if (!(block_in == w.shape())) {
        throw Error(Errc::ShapeMismatch, p + ": identity shortcut needs equal shapes");
      }
      w.step(p + ".add", {LayerKind::Add});
      w.step(p + ".relu3", relu());
    }
  w.step("avgpool", {LayerKind::GlobalAvgPool});
  w.step("fc", {LayerKind::Linear, arch.feature_channels(), arch.classes, 1, 1, 0, true});
  return report;
}

ComplexityReport count_network(const ArchitectureSpec& arch) {
  return arch.input == InputKind::RGB ? count_network(arch, 224, 224) : count_network(arch, 28, 28);
}

namespace {

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

}  // namespace

std::string emit_text_table(const std::vector<ComplexityReport>& reports) {
  size_t width = std::string("Approach").size();
  for (const auto& r : reports) width = std::max(width, r.approach.size());
  std::ostringstream os;
  auto line = [&](const std::string& a, const std::string& g, const std::string& p) {
    os << a << std::string(width - a.size(), ' ') << " | " << std::string(std::max<size_t>(6, g.size()) - g.size(), ' ')
       << g << " | " << std::string(std::max<size_t>(6, p.size()) - p.size(), ' ') << p << "\n";
  };
  line("Approach", "GFLOPs", "Params");
  os << std::string(width, '-') << "-+--------+-------\n";
  for (const auto& r : reports) line(r.approach, fixed(r.gflops(), 2), fixed(r.params_millions(), 1) + "M");
  return os.str();
}

std::string emit_csv(const std::vector<ComplexityReport>& reports) {
  std::ostringstream os;
  os << "approach,gflops,params\n";
  for (const auto& r : reports) os << csv_field(r.approach) << "," << fixed(r.gflops(), 6) << "," << r.total_params << "\n";
  return os.str();
}

std::vector<CsvRow> parse_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line != "approach,gflops,params")
    throw Error(Errc::BadConfig, "CSV header must be approach,gflops,params");
  std::vector<CsvRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto f = split_csv_line(line);
    if (f.size() != 3) throw Error(Errc::BadConfig, "CSV row needs 3 fields: " + line);
    try {
      rows.push_back({f[0], std::stod(f[1]), std::stoull(f[2])});
    } catch (const std::logic_error&) {
      throw Error(Errc::BadConfig, "bad number in CSV row: " + line);
    }
  }
  return rows;
}

std::vector<ArchitectureSpec> channel_reduction_table() {
  using model::ReducerSpec;
  return {model::build_rgb_resnet50(),
          model::build_dct_network(std::nullopt, 2),
          model::build_dct_network(ReducerSpec::fbs(32), 2),
          model::build_dct_network(ReducerSpec::fbs(16), 2),
          model::build_dct_network(ReducerSpec::lp(64), 2),
          model::build_dct_network(ReducerSpec::la(64), 2),
          model::build_dct_network(ReducerSpec::ccpp(64), 2)};
}

std::vector<ArchitectureSpec> stage_skipping_table() {
  std::vector<ArchitectureSpec> out;
  for (int entry = 2; entry <= 5; ++entry) {
    auto a = model::build_dct_network(model::ReducerSpec::ccpp(model::canonical_mid(entry)), entry);
    if (entry == 2) a.name = "Skip the first stage (1x64)";
    out.push_back(std::move(a));
  }
  return out;
}

}  // namespace dctnet::complexity
