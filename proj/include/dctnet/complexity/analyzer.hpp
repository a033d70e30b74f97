#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dctnet/model/architecture.hpp"

namespace dctnet::complexity {

enum class LayerKind { Conv, BatchNorm, ReLU, MaxPool, GlobalAvgPool, Linear, Add, FBS, LP, LA, CCPP };

struct LayerSpec {
  LayerKind kind = LayerKind::Conv;
  int in_channels = 0;
  int out_channels = 0;  // FBS: 3k; LA: m
  int kernel = 1;
  int stride = 1;
  int padding = 0;
  bool bias = false;
};

struct FeatureShape {
  int channels = 0, height = 0, width = 0;
  bool operator==(const FeatureShape&) const = default;
};

struct LayerCount {
  uint64_t macs = 0;
  uint64_t params = 0;
  FeatureShape output;
};

// One multiply-accumulate is one FLOP unit. Conv: F*C*kh*kw*H'*W' MACs and
// F*C*kh*kw + F params (the bias term only when present); linear: in*out and
// in*out + out; batch-norm: 2C params, no MACs; LP and CCPP are 1x1 convs
// (CCPP with bias); LA: 2*n*H*W MACs for scores and the weighted sum, n
// params; pooling, ReLU, addition and FBS are free. Linear layers take a
// 1x1 feature shape. Throws ShapeMismatch when the input does not fit.
LayerCount count_layer(const LayerSpec& layer, const FeatureShape& input);

struct LayerRow {
  std::string name;
  FeatureShape output;
  uint64_t macs = 0;
  uint64_t params = 0;
};

struct ComplexityReport {
  std::string approach;
  std::vector<LayerRow> rows;
  uint64_t total_macs = 0;
  uint64_t total_params = 0;

  double gflops() const { return double(total_macs) / 1e9; }
  double params_millions() const { return double(total_params) / 1e6; }
};

// Walks the network once in forward order with propagated shapes. For DCT
// input the shape is the luma block grid (28x28 for a 224 crop).
ComplexityReport count_network(const model::ArchitectureSpec& arch, int height, int width);
// Nominal geometry: 224x224 RGB or a 28x28 DCT grid.
ComplexityReport count_network(const model::ArchitectureSpec& arch);

// Columns Approach | GFLOPs | Params; GFLOPs to 2 decimals, params in M to 1 decimal.
std::string emit_text_table(const std::vector<ComplexityReport>& reports);
// Header "approach,gflops,params"; params as the exact integer count, gflops
// to 6 decimals.
std::string emit_csv(const std::vector<ComplexityReport>& reports);

struct CsvRow {
  std::string approach;
  double gflops = 0;
  uint64_t params = 0;
};
std::vector<CsvRow> parse_csv(const std::string& text);

// Rows of the channel-reduction and stage-skipping comparisons, in table order.
std::vector<model::ArchitectureSpec> channel_reduction_table();
std::vector<model::ArchitectureSpec> stage_skipping_table();

}  // namespace dctnet::complexity
