#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>

namespace dctnet::testing {

// Removed with its contents on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

void write_file(const std::filesystem::path& path, std::span<const uint8_t> bytes);

struct CorpusOptions {
  int train_per_class = 200;
  int test_per_class = 100;
  int size = 48;  // square images, pixels
  int quality = 85;
  uint64_t seed = 1;
};

// <root>/train/{horizontal,vertical}/NNNN.jpg and <root>/test/... drawn from
// stripe_image, 4:2:0.
void write_stripe_corpus(const std::filesystem::path& root, const CorpusOptions& options);

}  // namespace dctnet::testing
