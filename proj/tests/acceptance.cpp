// Acceptance run: one PASS/FAIL line per criterion, tolerances fixed below.
// Arguments select criteria by number (default: all). Exit status is the
// number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "corpus.hpp"
#include "dctnet/complexity/analyzer.hpp"
#include "dctnet/harness/augment.hpp"
#include "dctnet/harness/training.hpp"
#include "dctnet/jpeg/decoder.hpp"
#include "dctnet/jpeg/entropy.hpp"
#include "dctnet/jpeg/parser.hpp"
#include "dctnet/jpeg/zigzag.hpp"
#include "dctnet/tensor/ops.hpp"
#include "dctnet/transforms/reducers.hpp"
#include "flip_oracle.hpp"
#include "gradcheck.hpp"
#include "reference_jpeg.hpp"
#include "synth.hpp"

using namespace dctnet;
using tensor::Shape;
using tensor::Tensor;
namespace fs = std::filesystem;

namespace {

// Criterion 1: parameters in millions, compared after rounding to 3 s.f.
constexpr int kParamSignificantFigures = 3;
// Criterion 2: relative GFLOPs tolerance.
constexpr double kGflopsTolerance = 0.15;
// Criteria 1-2 runtime limit, seconds.
constexpr double kCountingSeconds = 1.0;
// Criterion 3.
constexpr int kDecoderImages = 120;
constexpr int kPixelTolerance = 1;
constexpr double kPixelFraction = 0.999;
constexpr double kDecoderSeconds = 120.0;
// Criterion 4.
constexpr int kGradientSeeds = 5;
constexpr double kGradientTolerance = 1e-4;
constexpr double kGradientSeconds = 300.0;
// Criterion 5.
constexpr double kOracleTolerance = 1e-9;
constexpr double kAttentionSumTolerance = 1e-6;
// Criterion 6.
constexpr int kFlipImages = 60;
constexpr double kFlipTolerance = 1e-6;
// Criteria 7-8: 2 classes, 200 train + 100 test images per class.
constexpr int kTrainPerClass = 200;
constexpr int kTestPerClass = 100;
constexpr int kToyEpochs = 20;
constexpr double kSigmas = 3.0;
constexpr double kToySeconds = 1800.0;

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Outcome {
  bool pass = true;
  std::string detail;
  void note(bool ok, const std::string& text) {
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += (ok ? "" : "MISS ") + text;
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double round_sig(double v, int figures) {
  if (v == 0) return 0;
  const double scale = std::pow(10.0, figures - 1 - int(std::floor(std::log10(std::abs(v)))));
  return std::round(v * scale) / scale;
}

struct TableRow {
  std::string label;
  model::ArchitectureSpec arch;
  double params_m;
  double gflops;
};

std::vector<TableRow> published_rows() {
  using model::ReducerSpec;
  std::vector<TableRow> rows = {{"RGB", model::build_rgb_resnet50(), 25.6, 3.86}};
  for (auto r : {ReducerSpec::lp(64), ReducerSpec::la(64), ReducerSpec::ccpp(64)})
    rows.push_back({"DCT+" + r.label(), model::build_dct_network(r, 2), 25.6, 3.20});
  rows.push_back({"skip-1&2", model::build_dct_network(ReducerSpec::ccpp(128), 3), 25.1, 2.86});
  rows.push_back({"skip-1-3", model::build_dct_network(ReducerSpec::ccpp(256), 4), 23.9, 8.26});
  rows.push_back({"skip-1-4", model::build_dct_network(ReducerSpec::ccpp(512), 5), 15.8, 10.76});
  return rows;
}

Outcome parameter_counts() {
  Outcome o;
  const auto start = Clock::now();
  for (const auto& row : published_rows()) {
    const double counted = complexity::count_network(row.arch).params_millions();
    const double rounded = round_sig(counted, kParamSignificantFigures);
    o.note(std::abs(rounded - row.params_m) < 1e-9, row.label + " " + fmt("%.3fM", counted) + " vs " + fmt("%.1fM", row.params_m));
  }
  const double t = seconds_since(start);
  o.note(t < kCountingSeconds, fmt("%.3f s", t));
  return o;
}

Outcome gflops_counts() {
  Outcome o;
  const auto start = Clock::now();
  for (const auto& row : published_rows()) {
    const double counted = complexity::count_network(row.arch).gflops();
    const double rel = (counted - row.gflops) / row.gflops;
    o.note(std::abs(rel) <= kGflopsTolerance,
           row.label + " " + fmt("%.3f", counted) + " vs " + fmt("%.2f", row.gflops) + fmt(" (%+.1f%%)", 100 * rel));
  }
  const auto skips = complexity::stage_skipping_table();
  double g[6] = {};
  for (int e = 2; e <= 5; ++e) g[e] = complexity::count_network(skips[size_t(e - 2)]).gflops();
  o.note(g[3] < g[2] && g[2] < g[4] && g[4] < g[5], "ordering entry3 < entry2 < entry4 < entry5");
  const double t = seconds_since(start);
  o.note(t < kCountingSeconds, fmt("%.3f s", t));
  return o;
}

Outcome decoder_oracle() {
  Outcome o;
  const auto start = Clock::now();
  std::mt19937_64 rng(2024);
  size_t coefficient_mismatches = 0, pixels = 0, pixels_within = 0, with_restarts = 0, subsampled = 0;
  for (int i = 0; i < kDecoderImages; ++i) {
    const int w = 8 + int(rng() % 120), h = 8 + int(rng() % 120);
    testing::EncodeOptions opt;
    opt.quality = 50 + int(rng() % 46);
    opt.subsample_420 = i % 2 == 0;
    opt.restart_interval = i % 3 == 0 ? 0 : 1 + int(rng() % 4);
    with_restarts += opt.restart_interval > 0;
    subsampled += opt.subsample_420;
    const auto bytes = testing::reference_encode(testing::synth_image(w, h, 3, uint64_t(i)), w, h, 3, opt);

    const auto grids = jpeg::entropy_decode(jpeg::parse_jpeg(bytes));
    const auto ref = testing::reference_read_coefficients(bytes);
    for (size_t c = 0; c < ref.components.size(); ++c) {
      const auto& rc = ref.components[c];
      for (int r = 0; r < rc.height_blocks; ++r)
        for (int b = 0; b < rc.width_blocks; ++b) {
          const auto natural = jpeg::zigzag_to_raster<int32_t>(grids[c].block(r, b));
          for (int k = 0; k < 64; ++k)
            coefficient_mismatches += natural[size_t(k)] != rc.coeffs[(size_t(r) * rc.width_blocks + b) * 64 + size_t(k)];
        }
    }
    const auto ours = jpeg::decode_pixels(bytes);
    const auto theirs = testing::reference_decode(bytes);
    if (ours.pixels.size() != theirs.pixels.size()) {
      o.note(false, "image " + std::to_string(i) + " pixel geometry differs");
      continue;
    }
    pixels += ours.pixels.size();
    for (size_t p = 0; p < ours.pixels.size(); ++p)
      pixels_within += std::abs(int(ours.pixels[p]) - int(theirs.pixels[p])) <= kPixelTolerance;
  }
  o.note(coefficient_mismatches == 0, std::to_string(kDecoderImages) + " images (" + std::to_string(subsampled) +
                                          " 4:2:0, " + std::to_string(with_restarts) + " with restarts), " +
                                          std::to_string(coefficient_mismatches) + " coefficient mismatches");
  const double fraction = double(pixels_within) / double(std::max<size_t>(pixels, 1));
  o.note(fraction >= kPixelFraction, fmt("%.6f of samples within +-1", fraction));
  const double t = seconds_since(start);
  o.note(t < kDecoderSeconds, fmt("%.1f s", t));
  return o;
}

Outcome gradient_fidelity() {
  using testing::max_gradient_error;
  using testing::random_tensor;
  using testing::separated_tensor;
  namespace ops = dctnet::tensor;
  Outcome o;
  const auto start = Clock::now();
  std::map<std::string, double> worst;
  auto run = [&](const std::string& name, double err) { worst[name] = std::max(worst[name], err); };

  for (int seed = 0; seed < kGradientSeeds; ++seed) {
    std::mt19937_64 rng(uint64_t(seed) + 77);
    auto pick = [&](int lo, int hi) { return lo + int(rng() % uint64_t(hi - lo + 1)); };
    const int n = pick(1, 3), c = pick(1, 4), h = pick(3, 6), w = pick(3, 6);
    auto weights = [&](Shape s) { return random_tensor(s, rng); };

    {
      const int f = pick(1, 4), k = pick(1, 3), stride = pick(1, 2), pad = pick(0, k - 1);
      auto x = random_tensor({n, c, h, w}, rng), wt = weights({f, c, k, k}), b = weights({f});
      auto r = random_tensor({n, f, (h + 2 * pad - k) / stride + 1, (w + 2 * pad - k) / stride + 1}, rng);
      run("conv", max_gradient_error({x, wt, b}, [&] { return ops::sum(ops::mul(ops::conv2d(x, wt, b, stride, pad), r)); }));
    }
    {
      auto x = random_tensor({n + 1, c, h, w}, rng), g = weights({c}), b = weights({c});
      auto rm = Tensor<double>::zeros({c}), rv = Tensor<double>::full({c}, 1.0);
      auto r = random_tensor({n + 1, c, h, w}, rng);
      run("batch_norm", max_gradient_error({x, g, b}, [&] {
            return ops::sum(ops::mul(ops::batch_norm2d(x, g, b, rm, rv, {.training = true}), r));
          }));
    }
    {
      auto x = separated_tensor({n, c, h, w}, rng);
      auto r = random_tensor({n, c, h, w}, rng);
      run("relu", max_gradient_error({x}, [&] { return ops::sum(ops::mul(ops::relu(x), r)); }));
      run("add", max_gradient_error({x, r}, [&] { return ops::sum(ops::mul(ops::add(x, r), ops::add(x, r))); }));
      const int axis = pick(0, 3);
      run("softmax", max_gradient_error({x}, [&] { return ops::sum(ops::mul(ops::softmax(x, axis), r)); }));
      auto rp = random_tensor({n, c, (h + 2 - 3) / 2 + 1, (w + 2 - 3) / 2 + 1}, rng);
      run("max_pool", max_gradient_error({x}, [&] { return ops::sum(ops::mul(ops::max_pool2d(x, 3, 2, 1), rp)); }));
      auto rg = random_tensor({n, c}, rng);
      run("avg_pool", max_gradient_error({x}, [&] { return ops::sum(ops::mul(ops::global_avg_pool(x), rg)); }));
    }
    {
      const int in = pick(1, 6), out = pick(1, 5);
      auto x = random_tensor({n, in}, rng), wt = weights({out, in}), b = weights({out});
      auto r = random_tensor({n, out}, rng);
      run("linear", max_gradient_error({x, wt, b}, [&] { return ops::sum(ops::mul(ops::linear(x, wt, b), r)); }));
      std::vector<int> labels;
      for (int i = 0; i < n; ++i) labels.push_back(pick(0, out - 1));
      auto logits = random_tensor({n, out}, rng, -3, 3);
      run("cross_entropy", max_gradient_error({logits}, [&] { return ops::cross_entropy(logits, labels); }));
    }
    {
      const int m = 192 / (seed % 2 ? 64 : 96);  // 3 or 2 outputs per channel group
      const int groups = 192 / m;
      auto x = random_tensor({1, 192, 2, 2}, rng);
      auto ws = weights({m, 192}), wa = weights({m, groups}), b = weights({m});
      auto r = random_tensor({1, m, 2, 2}, rng);
      run("lp", max_gradient_error({x, ws}, [&] { return ops::sum(ops::mul(transforms::lp_project(x, ws), r)); }));
      run("la", max_gradient_error({x, wa}, [&] { return ops::sum(ops::mul(transforms::local_attention(x, wa), r)); }));
      auto xs = separated_tensor({1, 192, 2, 2}, rng);
      run("ccpp", max_gradient_error({xs, ws, b}, [&] { return ops::sum(ops::mul(transforms::ccpp(xs, ws, b), r)); }));
    }
  }
  for (const auto& [name, err] : worst) o.note(err < kGradientTolerance, name + fmt(" %.1e", err));
  const double t = seconds_since(start);
  o.note(t < kGradientSeconds, fmt("%.1f s", t));
  return o;
}

Outcome channel_transforms() {
  Outcome o;
  std::mt19937_64 rng(5);
  const int h = 3, w = 4, n = transforms::kDctChannels;
  auto x = testing::random_tensor({n, h, w}, rng, -50, 50);
  auto at = [&](const Tensor<double>& t, int ch, int p) { return t.values()[size_t(ch) * h * w + size_t(p)]; };

  const int m = 64;
  auto ws = testing::random_tensor({m, n}, rng);
  auto b = testing::random_tensor({m}, rng);
  auto wa = testing::random_tensor({m, n / m}, rng);
  const auto lp = transforms::lp_project(x, ws);
  const auto cc = transforms::ccpp(x, ws, b);
  const auto la = transforms::local_attention(x, wa);
  const auto weights = transforms::local_attention_weights(x, wa);
  double lp_err = 0, cc_err = 0, la_err = 0, sum_err = 0;
  const int g = n / m;
  for (int p = 0; p < h * w; ++p)
    for (int i = 0; i < m; ++i) {
      double dot = 0;
      for (int j = 0; j < n; ++j) dot += ws.values()[size_t(i) * n + j] * at(x, j, p);
      lp_err = std::max(lp_err, std::abs(dot - at(lp, i, p)));
      cc_err = std::max(cc_err, std::abs(std::max(0.0, dot + b.values()[size_t(i)]) - at(cc, i, p)));
      // Softmax of w[i,j] * r[i,j] over the group, then the weighted sum.
      double mx = -1e300, z = 0, y = 0, total = 0;
      for (int j = 0; j < g; ++j) mx = std::max(mx, wa.values()[size_t(i) * g + j] * at(x, i * g + j, p));
      for (int j = 0; j < g; ++j) z += std::exp(wa.values()[size_t(i) * g + j] * at(x, i * g + j, p) - mx);
      for (int j = 0; j < g; ++j) {
        const double a = std::exp(wa.values()[size_t(i) * g + j] * at(x, i * g + j, p) - mx) / z;
        y += a * at(x, i * g + j, p);
        total += weights.values()[(size_t(i) * g + j) * h * w + p];
      }
      la_err = std::max(la_err, std::abs(y - at(la, i, p)));
      sum_err = std::max(sum_err, std::abs(total - 1.0));
    }
  o.note(lp_err < kOracleTolerance, fmt("LP %.1e", lp_err));
  o.note(la_err < kOracleTolerance, fmt("LA %.1e", la_err));
  o.note(cc_err < kOracleTolerance, fmt("CCPP %.1e", cc_err));
  o.note(sum_err < kAttentionSumTolerance, fmt("LA weight sums %.1e", sum_err));

  const auto fbs64 = transforms::fbs_select(x, 64);
  o.note(fbs64.shape() == x.shape() && fbs64.values() == x.values(), "FBS(64) identity");
  const auto fbs32 = transforms::fbs_select(x, 32);
  o.note(fbs32.dim(0) == 96, "FBS(32) has " + std::to_string(fbs32.dim(0)) + " channels");
  return o;
}

Outcome flip_correctness() {
  Outcome o;
  std::mt19937_64 rng(6);
  bool involution = true;
  double worst = 0;
  for (int i = 0; i < kFlipImages; ++i) {
    const int w = 8 * (1 + int(rng() % 8)), h = 8 * (1 + int(rng() % 8));
    const bool s420 = i % 2 == 0;
    const auto bytes = testing::reference_encode(testing::synth_image(w, h, 3, uint64_t(1000 + i)), w, h, 3,
                                                 {.quality = 50 + int(rng() % 46), .subsample_420 = s420});
    const auto t = jpeg::decode_dct_tensor(bytes);
    const auto x = model::assemble_dct_input(t.y, t.cb, t.cr);
    involution = involution && harness::flip_dct(harness::flip_dct(x)).values() == x.values();
    worst = std::max(worst, testing::flip_commutation_error(t));
  }
  o.note(involution, "involution exact on " + std::to_string(kFlipImages) + " images");
  o.note(worst < kFlipTolerance, fmt("commutation max error %.1e", worst));
  return o;
}

struct ToyRuns {
  bool ready = false;
  testing::TempDir dir{"acceptance"};
  harness::TrainResult dct, rgb;
  double dct_seconds = 0, rgb_seconds = 0;
};

harness::TrainConfig toy_config(const fs::path& dataset, model::InputKind input) {
  harness::TrainConfig c;
  c.dataset = dataset;
  c.epochs = kToyEpochs;
  c.crop_blocks = 4;
  c.seed = 1;
  c.network.input = input;
  c.network.reducer = model::ReducerKind::CCPP;
  c.network.entry_stage = 3;
  return c;
}

ToyRuns& toy_runs() {
  static ToyRuns runs;
  if (!runs.ready) {
    testing::write_stripe_corpus(runs.dir.path() / "data",
                                 {.train_per_class = kTrainPerClass, .test_per_class = kTestPerClass, .size = 48});
    auto t = Clock::now();
    runs.dct = harness::train(toy_config(runs.dir.path() / "data", model::InputKind::DCT), runs.dir.path() / "dct");
    runs.dct_seconds = seconds_since(t);
    t = Clock::now();
    runs.rgb = harness::train(toy_config(runs.dir.path() / "data", model::InputKind::RGB), runs.dir.path() / "rgb");
    runs.rgb_seconds = seconds_since(t);
    runs.ready = true;
  }
  return runs;
}

Outcome toy_training() {
  Outcome o;
  auto& runs = toy_runs();
  const int n_test = 2 * kTestPerClass;
  const double threshold = 0.5 + kSigmas * std::sqrt(0.25 / n_test);
  const double dct = runs.dct.epochs.back().test_top1, rgb = runs.rgb.epochs.back().test_top1;
  o.note(dct > threshold, fmt("DCT+CCPP entry-3 final test top1 %.3f", dct) + fmt(" > %.3f", threshold));
  o.note(rgb > threshold, fmt("RGB final test top1 %.3f", rgb));
  const double t = runs.dct_seconds + runs.rgb_seconds;
  o.note(t < kToySeconds, fmt("%.0f s for both runs", t));
  return o;
}

Outcome determinism() {
  Outcome o;
  auto& runs = toy_runs();
  auto repeat =
      harness::train(toy_config(runs.dir.path() / "data", model::InputKind::DCT), runs.dir.path() / "dct_repeat");
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  };
  const auto first = slurp(runs.dct.metrics), second = slurp(repeat.metrics);
  o.note(!first.empty() && first == second, "metrics logs bit-identical (" + std::to_string(first.size()) + " bytes)");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"parameter counts (3 s.f.)", parameter_counts},
      {"GFLOPs (+-15%) and skip ordering", gflops_counts},
      {"decoder oracle equivalence", decoder_oracle},
      {"gradient fidelity (64-bit, 5 seeds)", gradient_fidelity},
      {"channel-transform oracles", channel_transforms},
      {"DCT-domain flip", flip_correctness},
      {"toy training above chance", toy_training},
      {"determinism", determinism},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  int failed = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    const int id = int(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.note(false, std::string("exception: ") + e.what());
    }
    failed += !o.pass;
    std::printf("[%s] %d %s: %s\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failed;
}
