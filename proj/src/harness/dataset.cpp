#include "dctnet/harness/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <optional>

#include "dctnet/error.hpp"
#include "dctnet/jpeg/decoder.hpp"
#include "dctnet/model/dct_input.hpp"

namespace dctnet::harness {

namespace fs = std::filesystem;

namespace {

std::vector<uint8_t> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::UnreadablePath, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::string> class_directories(const fs::path& root) {
  std::vector<std::string> out;
  for (const auto& e : fs::directory_iterator(root))
    if (e.is_directory()) out.push_back(e.path().filename().string());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

bool is_jpeg_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  unsigned char head[3] = {};
  if (!in.read(reinterpret_cast<char*>(head), 3)) return false;
  return head[0] == 0xFF && head[1] == 0xD8 && head[2] == 0xFF;
}

DatasetIndex ingest(const fs::path& root, std::span<const std::string> classes) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) throw Error(Errc::UnreadablePath, root.string() + " is not a readable directory");
  DatasetIndex index;
  const auto found = class_directories(root);
  if (classes.empty()) {
    index.classes = found;
  } else {
    index.classes.assign(classes.begin(), classes.end());
    for (const auto& dir : found)
      if (std::find(classes.begin(), classes.end(), dir) == classes.end())
        throw Error(Errc::ClassMapMismatch, "directory '" + dir + "' under " + root.string() + " is not in the class list");
    for (const auto& name : classes)
      if (std::find(found.begin(), found.end(), name) == found.end())
        throw Error(Errc::UnreadablePath, "class directory " + (root / name).string() + " is missing");
  }
  for (size_t label = 0; label < index.classes.size(); ++label) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(root / index.classes[label]))
      if (e.is_regular_file()) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      if (is_jpeg_file(f))
        index.entries.push_back({f, int(label)});
      else
        ++index.skipped;
    }
  }
  if (index.entries.empty()) throw Error(Errc::EmptyDataset, "no JPEG files under " + root.string());
  return index;
}

LoadedSplit load_split(const DatasetIndex& index, model::InputKind input) {
  LoadedSplit out;
  out.classes = index.classes;
  const size_t n = index.entries.size();
  out.inputs.resize(n);
  out.labels.resize(n);
  std::vector<std::optional<Error>> failures(n);

  // Each image is decoded independently into its own slot.
#pragma omp parallel for schedule(dynamic)
  for (size_t i = 0; i < n; ++i) {
    const auto& entry = index.entries[i];
    try {
      const auto bytes = read_bytes(entry.path);
      if (input == model::InputKind::DCT) {
        const auto t = jpeg::decode_dct_tensor(bytes);
        out.inputs[i] = model::assemble_dct_input(t.y, t.cb, t.cr);
      } else {
        const auto img = jpeg::decode_pixels(bytes);
        if (img.channels != 3) throw Error(Errc::UnsupportedFrame, "RGB input needs a three-component image");
        auto t = tensor::Tensor<float>::zeros({3, img.height, img.width});
        const size_t plane = size_t(img.height) * img.width;
        for (size_t p = 0; p < plane; ++p)
          for (int c = 0; c < 3; ++c) t.data()[c * plane + p] = (img.pixels[p * 3 + c] / 255.f - 0.5f) / 0.25f;
        out.inputs[i] = t;
      }
      out.labels[i] = entry.label;
    } catch (const Error& e) {
      failures[i] = e.with_context(entry.path.string());
    }
  }
  for (auto& f : failures)
    if (f) throw *f;
  return out;
}

}  // namespace dctnet::harness
