#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dctnet/transforms/reducers.hpp"

namespace dctnet::model {

using transforms::ReducerKind;
using transforms::ReducerSpec;

enum class InputKind { RGB, DCT };

// Stages are numbered 2..5 as in ResNet-50; stage 1 is the RGB stem.
constexpr std::array<int, 4> kStageBlocks = {3, 4, 6, 3};
constexpr std::array<int, 4> kStageMid = {64, 128, 256, 512};
constexpr int kBottleneckExpansion = 4;

inline int canonical_mid(int stage) { return kStageMid.at(static_cast<size_t>(stage - 2)); }
inline int canonical_blocks(int stage) { return kStageBlocks.at(static_cast<size_t>(stage - 2)); }

// 1x1 -> 3x3 -> 1x1 with a shortcut. The stride sits on the first 1x1 and on
// the projection.
struct BottleneckSpec {
  int in_channels = 0;
  int mid_channels = 0;
  int out_channels = 0;
  int stride = 1;
  bool projection = false;
};

struct StageSpec {
  int index = 2;
  std::vector<BottleneckSpec> blocks;
};

struct ArchitectureSpec {
  std::string name;
  InputKind input = InputKind::RGB;
  bool input_batch_norm = false;  // BN over the assembled DCT channels
  std::optional<ReducerSpec> reducer;
  int entry_stage = 2;
  // Set only for the widened-stage DCT(3x64) reproduction, whose stage 2-3
  // mid widths are not a quarter of their outputs.
  bool widened = false;
  std::vector<StageSpec> stages;
  int classes = 1000;

  int input_channels() const;    // 3 or 192
  int reduced_channels() const;  // channels entering the first stage
  int feature_channels() const;  // channels entering the classifier
};

// First-block stride per stage, for stages entry..5.
std::map<int, int> stride_policy(int entry_stage);

ArchitectureSpec build_rgb_resnet50(int classes = 1000);

// reducer = nullopt with entry 2 is the widened DCT(3x64) network. Otherwise
// the reducer must emit the canonical mid width of the entry stage (FBS may
// feed entry 2 with any k). Throws BadStage / ChannelMismatch and the
// reducer's own validation errors.
ArchitectureSpec build_dct_network(std::optional<ReducerSpec> reducer, int entry_stage, int classes = 1000);

// Throws ShapeMismatch / ChannelMismatch when the stage chain is inconsistent.
void validate(const ArchitectureSpec& arch);

}  // namespace dctnet::model
