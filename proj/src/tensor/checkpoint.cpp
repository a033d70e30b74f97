#include "dctnet/tensor/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <json.hpp>

#include "dctnet/error.hpp"

namespace dctnet::tensor {

namespace {

constexpr char kMagic[8] = {'D', 'C', 'T', 'N', 'C', 'K', 'P', 'T'};
constexpr uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

void put_u32(std::ostream& os, uint32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); }

uint32_t get_u32(std::istream& is) {
  uint32_t v = 0;
  is.read(reinterpret_cast<char*>(&v), 4);
  return v;
}

}  // namespace

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  nlohmann::json manifest;
  manifest["config"] = nlohmann::json::parse(ckpt.config_json);
  manifest["tensors"] = nlohmann::json::array();
  for (const auto& t : ckpt.tensors) {
    if (numel_of(t.shape) != t.data.size())
      throw Error(Errc::ShapeMismatch, "checkpoint tensor '" + t.name + "' does not fit its shape");
    manifest["tensors"].push_back({{"name", t.name}, {"shape", t.shape}});
  }
  const std::string text = manifest.dump();

  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(Errc::UnreadablePath, "cannot write " + path.string());
  os.write(kMagic, sizeof kMagic);
  put_u32(os, kVersion);
  put_u32(os, static_cast<uint32_t>(text.size()));
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& t : ckpt.tensors)
    os.write(reinterpret_cast<const char*>(t.data.data()), static_cast<std::streamsize>(t.data.size() * 4));
  if (!os) throw Error(Errc::UnreadablePath, "short write to " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(Errc::UnreadablePath, "cannot open " + path.string());
  char magic[8];
  is.read(magic, sizeof magic);
  if (!is || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw Error(Errc::BadCheckpoint, path.string() + " is not a checkpoint");
  if (get_u32(is) != kVersion) throw Error(Errc::BadCheckpoint, "unsupported checkpoint version");
  const uint32_t len = get_u32(is);
  std::string text(len, '\0');
  is.read(text.data(), len);
  if (!is) throw Error(Errc::BadCheckpoint, "truncated manifest in " + path.string());

  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::BadCheckpoint, std::string("manifest: ") + e.what());
  }
  Checkpoint ckpt;
  ckpt.config_json = manifest.at("config").dump();
  for (const auto& entry : manifest.at("tensors")) {
    NamedTensor t;
    t.name = entry.at("name").get<std::string>();
    t.shape = entry.at("shape").get<Shape>();
    t.data.resize(numel_of(t.shape));
    is.read(reinterpret_cast<char*>(t.data.data()), static_cast<std::streamsize>(t.data.size() * 4));
    if (!is) throw Error(Errc::BadCheckpoint, "truncated data for '" + t.name + "'");
    ckpt.tensors.push_back(std::move(t));
  }
  if (is.peek() != std::char_traits<char>::eof()) throw Error(Errc::BadCheckpoint, "trailing bytes in checkpoint");
  return ckpt;
}

}  // namespace dctnet::tensor
