#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "dctnet/model/architecture.hpp"
#include "dctnet/tensor/tensor.hpp"

namespace dctnet::harness {

struct DatasetEntry {
  std::filesystem::path path;
  int label = 0;
};

struct DatasetIndex {
  std::vector<std::string> classes;  // label -> class directory name
  std::vector<DatasetEntry> entries;
  size_t skipped = 0;  // regular files that are not JPEG
};

// True when the file starts with the SOI marker followed by another marker.
bool is_jpeg_file(const std::filesystem::path& path);

// One subdirectory per class under `root`, enumerated in sorted order. With
// an explicit class list, labels follow that list and every directory must
// appear in it (ClassMapMismatch otherwise). Throws UnreadablePath when root
// or a listed class directory is missing, EmptyDataset when no JPEG is found.
DatasetIndex ingest(const std::filesystem::path& root, std::span<const std::string> classes = {});

// Network inputs decoded once per image. DCT input: [192, Hb, Wb] from the
// partial decoder. RGB input: [3, H, W] from the verification IDCT path,
// scaled to (p / 255 - 0.5) / 0.25.
struct LoadedSplit {
  std::vector<std::string> classes;
  std::vector<tensor::Tensor<float>> inputs;
  std::vector<int> labels;
};

// Decode errors are rethrown with the file path prefixed.
LoadedSplit load_split(const DatasetIndex& index, model::InputKind input);

}  // namespace dctnet::harness
