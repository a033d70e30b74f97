#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "dctnet/tensor/tensor.hpp"

namespace dctnet::tensor {

// On disk: "DCTNCKPT", u32 version, u32 manifest length, JSON manifest
// {"config": ..., "tensors": [{"name", "shape"}...]}, then every tensor's
// float32 little-endian data in manifest order.
struct NamedTensor {
  std::string name;
  Shape shape;
  std::vector<float> data;
};

struct Checkpoint {
  std::string config_json = "{}";
  std::vector<NamedTensor> tensors;
};

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace dctnet::tensor
