// Command-line front end: decode, complexity, train, eval, verify.

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>

#include "dctnet/error.hpp"
#include "dctnet/harness/config.hpp"
#include "dctnet/harness/dataset.hpp"
#include "dctnet/harness/report.hpp"
#include "dctnet/harness/training.hpp"
#include "dctnet/jpeg/coef_dump.hpp"
#include "dctnet/jpeg/decoder.hpp"

namespace fs = std::filesystem;
using namespace dctnet;

namespace {

std::vector<uint8_t> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::UnreadablePath, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Binary PPM (P6) or PGM (P5) with maxval 255.
jpeg::Image read_netpbm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::UnreadablePath, "cannot open " + path.string());
  std::string magic;
  int maxval = 0;
  jpeg::Image img;
  in >> magic;
  auto skip_comments = [&] {
    in >> std::ws;
    while (in.peek() == '#') {
      std::string line;
      std::getline(in, line);
      in >> std::ws;
    }
  };
  skip_comments();
  in >> img.width;
  skip_comments();
  in >> img.height;
  skip_comments();
  in >> maxval;
  in.get();
  if ((magic != "P6" && magic != "P5") || maxval != 255 || img.width <= 0 || img.height <= 0)
    throw Error(Errc::BadConfig, path.string() + ": expected an 8-bit binary PPM or PGM");
  img.channels = magic == "P6" ? 3 : 1;
  img.pixels.resize(size_t(img.width) * img.height * img.channels);
  if (!in.read(reinterpret_cast<char*>(img.pixels.data()), std::streamsize(img.pixels.size())))
    throw Error(Errc::TruncatedStream, path.string() + ": pixel data is short");
  return img;
}

int run_decode(const fs::path& input, const fs::path& output) {
  const auto decoded = jpeg::decode_dct(read_bytes(input));
  std::printf("%s: %dx%d, %zu components\n", input.string().c_str(), decoded.width, decoded.height,
              decoded.components.size());
  for (const auto& g : decoded.components)
    std::printf("  component %d: %d x %d blocks\n", g.component_id, g.height_blocks, g.width_blocks);
  if (!output.empty()) {
    std::ofstream out(output, std::ios::binary | std::ios::trunc);
    jpeg::write_coefficient_dump(out, decoded);
    if (!out) throw Error(Errc::UnreadablePath, "cannot write " + output.string());
  }
  return 0;
}

int run_complexity(const std::string& table, const std::vector<fs::path>& configs, const fs::path& out) {
  std::vector<model::ArchitectureSpec> archs;
  if (table == "table1" || table == "all")
    for (auto& a : complexity::channel_reduction_table()) archs.push_back(a);
  if (table == "table2" || table == "all")
    for (auto& a : complexity::stage_skipping_table()) archs.push_back(a);
  for (const auto& path : configs) archs.push_back(harness::build_architecture(harness::load_network_config(path), 1000));
  if (archs.empty()) throw Error(Errc::BadConfig, "nothing to count: give --table or config files");
  const auto reports = harness::report_complexity(archs);
  std::cout << complexity::emit_text_table(reports);
  if (!out.empty()) harness::write_complexity_tables(reports, out);
  return 0;
}

int run_eval(const fs::path& checkpoint, const fs::path& data, const fs::path& coarse_path) {
  std::optional<harness::CoarseMap> coarse;
  if (!coarse_path.empty()) coarse = harness::load_coarse_map(coarse_path);
  const auto index = harness::ingest(data);
  if (index.skipped) std::cerr << "skipped " << index.skipped << " non-JPEG files\n";
  const auto report = harness::evaluate(checkpoint, index, coarse ? &*coarse : nullptr);
  std::printf("images %zu  correct %zu  top1 %.4f\n", report.total, report.correct, report.top1);
  if (report.coarse_top1) std::printf("coarse top1 %.4f\n", *report.coarse_top1);
  return 0;
}

// Compares the verification decoder against reference decodes stored next to
// each JPEG as <name>.ppm / <name>.pgm.
int run_verify(const fs::path& dir, int tolerance, double required) {
  size_t files = 0, pixels = 0, within = 0;
  std::vector<fs::path> jpegs;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && harness::is_jpeg_file(e.path())) jpegs.push_back(e.path());
  std::sort(jpegs.begin(), jpegs.end());
  for (const auto& path : jpegs) {
    fs::path ref = fs::path(path).replace_extension(".ppm");
    if (!fs::exists(ref)) ref = fs::path(path).replace_extension(".pgm");
    if (!fs::exists(ref)) {
      std::cerr << "no reference decode for " << path.string() << "\n";
      continue;
    }
    const auto ours = jpeg::decode_pixels(read_bytes(path));
    const auto theirs = read_netpbm(ref);
    if (ours.width != theirs.width || ours.height != theirs.height || ours.channels != theirs.channels)
      throw Error(Errc::GeometryMismatch, path.string() + ": decoded geometry differs from the reference");
    size_t ok = 0;
    for (size_t i = 0; i < ours.pixels.size(); ++i) ok += std::abs(int(ours.pixels[i]) - int(theirs.pixels[i])) <= tolerance;
    ++files;
    pixels += ours.pixels.size();
    within += ok;
    if (ok != ours.pixels.size())
      std::printf("%s: %zu of %zu samples off by more than %d\n", path.filename().string().c_str(),
                  ours.pixels.size() - ok, ours.pixels.size(), tolerance);
  }
  if (files == 0) throw Error(Errc::EmptyDataset, "no JPEG with a reference decode under " + dir.string());
  const double fraction = double(within) / double(pixels);
  std::printf("files %zu  samples %zu  within +-%d: %.6f (required %.6f)\n", files, pixels, tolerance, fraction, required);
  return fraction >= required ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DCT-domain ResNet-50 toolkit"};
  app.require_subcommand(1);

  fs::path decode_in, decode_out;
  auto* decode = app.add_subcommand("decode", "JPEG -> dequantized coefficient dump (no inverse DCT)");
  decode->add_option("input", decode_in, "JPEG file")->required()->check(CLI::ExistingFile);
  decode->add_option("-o,--output", decode_out, "coefficient dump to write");

  std::string table = "none";
  std::vector<fs::path> complexity_configs;
  fs::path complexity_out;
  auto* cx = app.add_subcommand("complexity", "count GFLOPs and parameters and print the comparison table");
  cx->add_option("--table", table, "built-in row set")->check(CLI::IsMember({"none", "table1", "table2", "all"}));
  cx->add_option("configs", complexity_configs, "network config files")->check(CLI::ExistingFile);
  cx->add_option("--out", complexity_out, "write <out>.txt and <out>.csv");

  harness::TrainConfig flags;
  fs::path config_path, train_out = "run";
  std::string reducer, input;
  auto* tr = app.add_subcommand("train", "train on <dataset>/train, score <dataset>/test every epoch");
  tr->add_option("--config", config_path, "key = value file; its values override flags")->check(CLI::ExistingFile);
  tr->add_option("--dataset", flags.dataset, "directory with train/ and test/");
  tr->add_option("--epochs", flags.epochs);
  tr->add_option("--batch", flags.batch);
  tr->add_option("--lr", flags.lr);
  tr->add_option("--lr-decay", flags.lr_decay, "divide the learning rate by this every --lr-period epochs");
  tr->add_option("--lr-period", flags.lr_period);
  tr->add_option("--momentum", flags.momentum);
  tr->add_option("--crop-blocks", flags.crop_blocks, "crop side in 8x8 blocks, 0 for none");
  tr->add_option("--flip", flags.flip);
  tr->add_option("--seed", flags.seed);
  tr->add_option("--input", input)->check(CLI::IsMember({"rgb", "dct"}));
  tr->add_option("--reducer", reducer)->check(CLI::IsMember({"none", "fbs", "lp", "la", "ccpp"}));
  tr->add_option("--reducer-k", flags.network.reducer_k);
  tr->add_option("--reducer-out", flags.network.reducer_out);
  tr->add_option("--entry-stage", flags.network.entry_stage);
  tr->add_option("--out", train_out, "output directory for metrics and checkpoints");

  fs::path eval_ckpt, eval_data, coarse_map;
  auto* ev = app.add_subcommand("eval", "top-1 accuracy of a checkpoint with center crops");
  ev->add_option("--checkpoint", eval_ckpt)->required()->check(CLI::ExistingFile);
  ev->add_option("--data", eval_data, "split directory with one subdirectory per class")->required();
  ev->add_option("--coarse-map", coarse_map, "'class group' lines for coarse accuracy")->check(CLI::ExistingFile);

  fs::path verify_dir;
  int tolerance = 1;
  double required = 0.999;
  auto* vf = app.add_subcommand("verify", "compare decoded pixels with reference decodes (<name>.ppm/.pgm)");
  vf->add_option("dir", verify_dir)->required()->check(CLI::ExistingDirectory);
  vf->add_option("--tolerance", tolerance, "allowed per-sample difference");
  vf->add_option("--required", required, "fraction of samples that must be within tolerance");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*decode) return run_decode(decode_in, decode_out);
    if (*cx) return run_complexity(table, complexity_configs, complexity_out);
    if (*ev) return run_eval(eval_ckpt, eval_data, coarse_map);
    if (*vf) return run_verify(verify_dir, tolerance, required);
    if (*tr) {
      harness::TrainConfig config = flags;
      if (!input.empty()) config.network.apply("input", input);
      if (!reducer.empty()) config.network.apply("reducer", reducer);
      if (!config_path.empty()) {
        std::ifstream in(config_path);
        std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
        for (const auto& [k, v] : harness::parse_key_values(text))
          if (!config.apply(k, v)) throw Error(Errc::BadConfig, config_path.string() + ": unknown key '" + k + "'");
      }
      const auto result = harness::train(config, train_out, &std::cerr);
      std::printf("best test top1 %.4f at epoch %d\n", result.best_top1, result.best_epoch);
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
