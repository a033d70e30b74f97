#include "dctnet/model/architecture.hpp"

#include "dctnet/error.hpp"

namespace dctnet::model {

int ArchitectureSpec::input_channels() const { return input == InputKind::RGB ? 3 : transforms::kDctChannels; }

int ArchitectureSpec::reduced_channels() const {
  if (input == InputKind::RGB) return 64;  // stem output
  return reducer ? reducer->m : transforms::kDctChannels;
}

int ArchitectureSpec::feature_channels() const {
  if (stages.empty()) return reduced_channels();
  return stages.back().blocks.back().out_channels;
}

std::map<int, int> stride_policy(int entry_stage) {
  if (entry_stage < 2 || entry_stage > 5)
    throw Error(Errc::BadStage, "entry stage must be in 2..5, got " + std::to_string(entry_stage));
  std::map<int, int> strides;
  for (int s = entry_stage; s <= 5; ++s) strides[s] = 2;
  strides[entry_stage] = 1;
  if (entry_stage == 2) strides[3] = 1;
  return strides;
}

namespace {

StageSpec make_stage(int index, int in_channels, int mid, int out, int first_stride) {
  StageSpec st;
  st.index = index;
  for (int b = 0; b < canonical_blocks(index); ++b) {
    BottleneckSpec blk;
    blk.in_channels = b == 0 ? in_channels : out;
    blk.mid_channels = mid;
    blk.out_channels = out;
    blk.stride = b == 0 ? first_stride : 1;
    blk.projection = blk.in_channels != blk.out_channels || blk.stride != 1;
    st.blocks.push_back(blk);
  }
  return st;
}

std::string table2_name(int entry) {
  switch (entry) {
    case 2: return "Skip the first stage";
    case 3: return "Skip the first and second stages";
    case 4: return "Skip the first, second, and third stages";
    default: return "Skip the first, second, third, and fourth stages";
  }
}

}  // namespace

ArchitectureSpec build_rgb_resnet50(int classes) {
  ArchitectureSpec a;
  a.name = "RGB (3x1)";
  a.input = InputKind::RGB;
  a.entry_stage = 2;
  a.classes = classes;
  int in = 64;
  for (int s = 2; s <= 5; ++s) {
    const int mid = canonical_mid(s);
    a.stages.push_back(make_stage(s, in, mid, mid * kBottleneckExpansion, s == 2 ? 1 : 2));
    in = mid * kBottleneckExpansion;
  }
  return a;
}

ArchitectureSpec build_dct_network(std::optional<ReducerSpec> reducer, int entry_stage, int classes) {
  const auto strides = stride_policy(entry_stage);
  ArchitectureSpec a;
  a.input = InputKind::DCT;
  a.input_batch_norm = true;
  a.entry_stage = entry_stage;
  a.classes = classes;
  a.reducer = reducer;

  if (!reducer) {
    if (entry_stage != 2)
      throw Error(Errc::ChannelMismatch, "192 unreduced channels only feed the widened entry-2 network");
    a.name = "DCT (3x64)";
    a.widened = true;
    // Doubled mid widths absorb 192 inputs; outputs stay canonical.
    a.stages.push_back(make_stage(2, transforms::kDctChannels, 128, 256, strides.at(2)));
    a.stages.push_back(make_stage(3, 256, 256, 512, strides.at(3)));
    a.stages.push_back(make_stage(4, 512, 256, 1024, strides.at(4)));
    a.stages.push_back(make_stage(5, 1024, 512, 2048, strides.at(5)));
    validate(a);
    return a;
  }

  reducer->validate();
  const int want = canonical_mid(entry_stage);
  const bool fbs_at_entry2 = reducer->kind == ReducerKind::FBS && entry_stage == 2;
  if (reducer->m != want && !fbs_at_entry2)
    throw Error(Errc::ChannelMismatch, reducer->label() + " emits " + std::to_string(reducer->m) + " channels; stage " +
                                           std::to_string(entry_stage) + " expects " + std::to_string(want));
  a.name = entry_stage == 2 ? "DCT + " + reducer->label() : table2_name(entry_stage) + " (1x" + std::to_string(want) + ")";
  int in = reducer->m;
  for (int s = entry_stage; s <= 5; ++s) {
    const int mid = canonical_mid(s);
    a.stages.push_back(make_stage(s, in, mid, mid * kBottleneckExpansion, strides.at(s)));
    in = mid * kBottleneckExpansion;
  }
  validate(a);
  return a;
}

void validate(const ArchitectureSpec& arch) {
  if (arch.reducer) arch.reducer->validate();
  if (arch.reducer && arch.input != InputKind::DCT)
    throw Error(Errc::ChannelMismatch, "channel reducers apply to DCT input only");
  int channels = arch.reduced_channels();
  for (const auto& st : arch.stages)
    for (const auto& blk : st.blocks) {
      if (blk.in_channels != channels)
        throw Error(Errc::ChannelMismatch, "stage " + std::to_string(st.index) + " block expects " +
                                               std::to_string(blk.in_channels) + " channels, receives " +
                                               std::to_string(channels));
      if (!arch.widened && blk.out_channels != kBottleneckExpansion * blk.mid_channels)
        throw Error(Errc::ShapeMismatch, "bottleneck output must be 4x its mid width");
      if (blk.projection != (blk.in_channels != blk.out_channels || blk.stride != 1))
        throw Error(Errc::ShapeMismatch, "projection flag must match the shortcut's shape change");
      channels = blk.out_channels;
    }
  if (arch.classes < 1) throw Error(Errc::ShapeMismatch, "classifier needs at least one class");
}

}  // namespace dctnet::model
