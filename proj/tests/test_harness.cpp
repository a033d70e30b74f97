#include <doctest.h>

#include <fstream>
#include <iterator>
#include <random>
#include <set>
#include <sstream>

#include "corpus.hpp"
#include "dct_oracle.hpp"
#include "dctnet/error.hpp"
#include "dctnet/harness/augment.hpp"
#include "dctnet/harness/config.hpp"
#include "dctnet/harness/dataset.hpp"
#include "dctnet/harness/report.hpp"
#include "dctnet/harness/training.hpp"
#include "dctnet/jpeg/zigzag.hpp"
#include "dctnet/tensor/checkpoint.hpp"
#include "flip_oracle.hpp"
#include "reference_jpeg.hpp"
#include "synth.hpp"

using namespace dctnet;
using namespace dctnet::harness;
using tensor::Tensor;
namespace fs = std::filesystem;

namespace {

template <typename F>
Errc error_code(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return Errc::BadConfig;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Tensor<float> random_dct(int h, int w, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> d(-500, 500);
  auto t = Tensor<float>::zeros({192, h, w});
  for (auto& v : t.values()) v = float(d(rng));
  return t;
}

void write_small_jpeg(const fs::path& path, int label, uint64_t seed) {
  const auto px = testing::stripe_image(32, 32, label, seed);
  testing::write_file(path, testing::reference_encode(px, 32, 32, 3, {.quality = 85}));
}

// Two classes, small images, for quick end-to-end runs.
TrainConfig small_run(const fs::path& dataset) {
  TrainConfig c;
  c.dataset = dataset;
  c.epochs = 2;
  c.batch = 8;
  c.crop_blocks = 2;
  c.network.reducer = model::ReducerKind::CCPP;
  c.network.entry_stage = 5;
  c.seed = 7;
  return c;
}

}  // namespace

TEST_CASE("key-value parsing") {
  auto kv = parse_key_values("# comment\n a = 1 \n\nb=two words # trailing\n");
  REQUIRE(kv.size() == 2);
  CHECK(kv[0] == std::pair<std::string, std::string>{"a", "1"});
  CHECK(kv[1] == std::pair<std::string, std::string>{"b", "two words"});
  CHECK(error_code([] { parse_key_values("novalue\n"); }) == Errc::BadConfig);
  CHECK(error_code([] { parse_key_values("= 3\n"); }) == Errc::BadConfig);
  CHECK(error_code([] { parse_key_values("a = 1\na = 2\n"); }) == Errc::BadConfig);
}

TEST_CASE("train config defaults, presets and validation") {
  TrainConfig d;
  CHECK(d.epochs == 20);
  CHECK(d.batch == 32);
  CHECK(d.lr == 0.05);
  CHECK(d.lr_decay == 10.0);
  CHECK(d.lr_period == 8);
  CHECK(d.momentum == 0.9);
  CHECK(d.lr_at(1) == doctest::Approx(0.05));
  CHECK(d.lr_at(8) == doctest::Approx(0.05));
  CHECK(d.lr_at(9) == doctest::Approx(0.005));
  CHECK(d.lr_at(17) == doctest::Approx(0.0005));

  auto p = parse_train_config("protocol = full\nepochs = 3\n");
  CHECK(p.epochs == 3);
  CHECK(p.batch == 128);
  CHECK(p.lr_period == 30);

  auto c = parse_train_config("dataset = /data\nclass_list = a, b ,c\nflip = false\nreducer = la\nentry_stage = 2\n");
  CHECK(c.dataset == fs::path("/data"));
  CHECK(c.class_list == std::vector<std::string>{"a", "b", "c"});
  CHECK_FALSE(c.flip);
  CHECK(c.network.reducer == model::ReducerKind::LA);

  CHECK(error_code([] { parse_train_config("epochs = x\n"); }) == Errc::BadConfig);
  CHECK(error_code([] { parse_train_config("colour = red\n"); }) == Errc::BadConfig);
  CHECK(error_code([] { parse_train_config("reducer = pca\n"); }) == Errc::BadConfig);
  for (const char* bad : {"epochs = 0", "batch = 0", "lr = -1", "lr_decay = 1", "momentum = 1", "crop_blocks = -1"})
    CHECK(error_code([&] { parse_train_config(bad).validate(); }) == Errc::BadConfig);
  parse_train_config("lr = 0").validate();

  auto round = TrainConfig{};
  round.class_list = {"x", "y"};
  round.lr = 0.1 + 0.2;
  std::string text;
  for (const auto& [k, v] : round.to_key_values()) text += k + " = " + v + "\n";
  auto back = parse_train_config(text);
  CHECK(back.lr == round.lr);
  CHECK(back.class_list == round.class_list);
}

TEST_CASE("network configs build the named architectures") {
  auto a = build_architecture(parse_network_config("reducer = ccpp\nentry_stage = 3\n"), 1000);
  CHECK(a.name == "Skip the first and second stages (1x128)");
  CHECK(build_architecture(parse_network_config("reducer = fbs\nreducer_k = 32\n"), 1000).name == "DCT + FBS (3x32)");
  CHECK(build_architecture(parse_network_config("reducer = none\n"), 1000).name == "DCT (3x64)");
  CHECK(build_architecture(parse_network_config("input = rgb\nclasses = 7\n"), 1000).classes == 7);
  CHECK(build_architecture(parse_network_config("name = mine\n"), 2).name == "mine");
  CHECK(error_code([] { build_architecture(parse_network_config("reducer = lp\nreducer_out = 96\n"), 10); }) ==
        Errc::ChannelMismatch);
  CHECK(error_code([] { build_architecture(parse_network_config("entry_stage = 7\n"), 10); }) == Errc::BadStage);
  CHECK(error_code([] { parse_network_config("epochs = 3\n"); }) == Errc::BadConfig);
}

TEST_CASE("ingest enumerates class directories in sorted order") {
  testing::TempDir dir("ingest");
  for (int c = 0; c < 2; ++c)
    for (int i = 0; i < 3; ++i)
      write_small_jpeg(dir.path() / (c ? "b_cls" : "a_cls") / ("img" + std::to_string(2 - i) + ".jpg"), c, uint64_t(10 * c + i));
  auto idx = ingest(dir.path());
  CHECK(idx.classes == std::vector<std::string>{"a_cls", "b_cls"});
  REQUIRE(idx.entries.size() == 6);
  CHECK(idx.skipped == 0);
  std::set<int> labels;
  for (const auto& e : idx.entries) labels.insert(e.label);
  CHECK(labels == std::set<int>{0, 1});
  CHECK(idx.entries[0].path.filename() == "img0.jpg");
  CHECK(idx.entries[0].label == 0);
  CHECK(idx.entries[5].label == 1);

  // Mixed directory: PNG signature and text files are skipped and counted.
  const uint8_t png[8] = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
  testing::write_file(dir.path() / "a_cls" / "fake.jpg", png);
  testing::write_file(dir.path() / "b_cls" / "pic.png", png);
  auto mixed = ingest(dir.path());
  CHECK(mixed.entries.size() == 6);
  CHECK(mixed.skipped == 2);

  const std::vector<std::string> reversed = {"b_cls", "a_cls"};
  auto listed = ingest(dir.path(), reversed);
  CHECK(listed.entries.front().label == 0);
  CHECK(listed.entries.front().path.parent_path().filename() == "b_cls");
  const std::vector<std::string> partial = {"a_cls"};
  CHECK(error_code([&] { ingest(dir.path(), partial); }) == Errc::ClassMapMismatch);
  const std::vector<std::string> extra = {"a_cls", "b_cls", "c_cls"};
  CHECK(error_code([&] { ingest(dir.path(), extra); }) == Errc::UnreadablePath);
}

TEST_CASE("ingest error paths") {
  testing::TempDir dir("ingest-empty");
  CHECK(error_code([&] { ingest(dir.path()); }) == Errc::EmptyDataset);
  fs::create_directories(dir.path() / "cls");
  CHECK(error_code([&] { ingest(dir.path()); }) == Errc::EmptyDataset);
  CHECK(error_code([&] { ingest(dir.path() / "missing"); }) == Errc::UnreadablePath);
}

TEST_CASE("decode failures name the file") {
  testing::TempDir dir("broken");
  write_small_jpeg(dir.path() / "c" / "good.jpg", 0, 1);
  const uint8_t truncated[4] = {0xFF, 0xD8, 0xFF, 0xDB};
  testing::write_file(dir.path() / "c" / "bad.jpg", truncated);
  auto idx = ingest(dir.path());
  try {
    load_split(idx, model::InputKind::DCT);
    FAIL("expected a decode error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("bad.jpg") != std::string::npos);
  }
}

TEST_CASE("load_split produces network inputs") {
  testing::TempDir dir("load");
  write_small_jpeg(dir.path() / "c" / "x.jpg", 1, 3);
  auto idx = ingest(dir.path());
  auto dct = load_split(idx, model::InputKind::DCT);
  CHECK(dct.inputs[0].shape() == tensor::Shape{192, 4, 4});
  auto rgb = load_split(idx, model::InputKind::RGB);
  CHECK(rgb.inputs[0].shape() == tensor::Shape{3, 32, 32});
  for (float v : rgb.inputs[0].values()) CHECK((v >= -2.f && v <= 2.f));
}

TEST_CASE("DCT flip is an exact involution") {
  for (uint64_t seed = 0; seed < 10; ++seed) {
    auto x = random_dct(3 + int(seed % 3), 2 + int(seed % 5), seed);
    auto once = flip_dct(x);
    CHECK(once.values() != x.values());
    CHECK(flip_dct(once).values() == x.values());
  }
  auto p = random_dct(1, 5, 1);
  CHECK(flip_pixels(flip_pixels(p)).values() == p.values());
}

TEST_CASE("DCT flip follows the mirror sign rule") {
  auto x = random_dct(2, 3, 4);
  auto y = flip_dct(x);
  for (int k = 0; k < 64; ++k) {
    const int u = jpeg::kZigzagToRaster[k] % 8;
    for (int comp = 0; comp < 3; ++comp)
      for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 3; ++c) {
          const size_t ch = size_t(comp * 64 + k);
          CHECK(y.values()[(ch * 2 + r) * 3 + c] == (u % 2 ? -1.f : 1.f) * x.values()[(ch * 2 + r) * 3 + (2 - c)]);
        }
  }
}

TEST_CASE("flip of a left-right symmetric image leaves its DCT unchanged") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> d(-100, 100);
  const int hb = 2, wb = 4, w = wb * 8;
  std::vector<double> plane(size_t(hb) * 8 * w);
  for (int y = 0; y < hb * 8; ++y)
    for (int x = 0; x < w / 2; ++x) plane[size_t(y) * w + x] = plane[size_t(y) * w + (w - 1 - x)] = d(rng);
  auto t = Tensor<float>::zeros({192, hb, wb});
  for (int r = 0; r < hb; ++r)
    for (int c = 0; c < wb; ++c) {
      std::array<double, 64> px{};
      for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) px[y * 8 + x] = plane[size_t(r * 8 + y) * w + c * 8 + x];
      const auto coef = testing::forward_dct(px);
      for (int comp = 0; comp < 3; ++comp)
        for (int k = 0; k < 64; ++k)
          t.values()[(size_t(comp * 64 + k) * hb + r) * wb + c] = float(coef[size_t(jpeg::kZigzagToRaster[k])]);
    }
  auto f = flip_dct(t);
  for (size_t i = 0; i < t.numel(); ++i) CHECK(f.values()[i] == doctest::Approx(t.values()[i]).epsilon(1e-5).scale(1e-3));
}

TEST_CASE("DCT-domain flip commutes with the pixel-domain mirror") {
  for (uint64_t seed = 0; seed < 12; ++seed) {
    const int w = 16 + 8 * int(seed % 5), h = 16 + 8 * int(seed % 3);
    const auto px = testing::synth_image(w, h, 3, seed);
    const auto bytes =
        testing::reference_encode(px, w, h, 3, {.quality = 60 + int(seed * 3), .subsample_420 = seed % 2 == 0});
    CHECK(testing::flip_commutation_error(jpeg::decode_dct_tensor(bytes)) < 1e-6);
  }
}

TEST_CASE("crops") {
  auto x = random_dct(6, 5, 2);
  auto c = crop(x, 1, 2, 3, 2);
  CHECK(c.shape() == tensor::Shape{192, 3, 2});
  CHECK(c.values()[0] == x.values()[1 * 5 + 2]);
  CHECK(c.values()[6 + 3] == x.values()[30 + 2 * 5 + 3]);
  CHECK(error_code([&] { crop(x, 4, 0, 3, 3); }) == Errc::CropTooLarge);
  CHECK(error_code([&] { center_crop(x, 6); }) == Errc::CropTooLarge);
  std::mt19937_64 rng(1);
  CHECK(error_code([&] { augment_dct(x, 7, false, rng); }) == Errc::CropTooLarge);

  auto cc = center_crop(x, 3);
  CHECK(cc.values() == crop(x, 1, 1, 3, 3).values());
  CHECK(center_crop(x, 0).values() == x.values());

  // Every random crop is some block-aligned window, flipped or not.
  for (int trial = 0; trial < 20; ++trial) {
    auto a = augment_dct(x, 4, true, rng);
    REQUIRE(a.shape() == tensor::Shape{192, 4, 4});
    bool found = false;
    for (int top = 0; top <= 2 && !found; ++top)
      for (int left = 0; left <= 1 && !found; ++left) {
        auto w = crop(x, top, left, 4, 4);
        found = a.values() == w.values() || a.values() == flip_dct(w).values();
      }
    CHECK(found);
  }
}

TEST_CASE("training: frozen optimizer, determinism, checkpoints and evaluation") {
  testing::TempDir dir("train");
  testing::write_stripe_corpus(dir.path() / "data", {.train_per_class = 8, .test_per_class = 4, .size = 32});

  SUBCASE("lr 0 leaves parameters unchanged and the loss constant") {
    auto cfg = small_run(dir.path() / "data");
    cfg.lr = 0;
    cfg.crop_blocks = 0;
    cfg.flip = false;
    cfg.batch = 16;  // the whole training split in one batch
    auto r = train(cfg, dir.path() / "frozen");
    REQUIRE(r.epochs.size() == 2);
    CHECK(r.epochs[0].train_loss == doctest::Approx(r.epochs[1].train_loss).epsilon(1e-5));

    model::Network<float> fresh(build_architecture(cfg.network, 2), cfg.seed);
    auto saved = tensor::read_checkpoint(r.last_checkpoint);
    std::map<std::string, std::vector<float>> by_name;
    for (auto& t : saved.tensors) by_name[t.name] = t.data;
    for (auto* p : fresh.parameters()) CHECK(by_name.at(p->name) == p->value.values());
  }

  SUBCASE("same seed gives bit-identical metrics and checkpoints") {
    auto cfg = small_run(dir.path() / "data");
    auto a = train(cfg, dir.path() / "run_a");
    auto b = train(cfg, dir.path() / "run_b");
    CHECK(slurp(a.metrics) == slurp(b.metrics));
    CHECK(slurp(a.best_checkpoint) == slurp(b.best_checkpoint));
    CHECK(slurp(a.last_checkpoint) == slurp(b.last_checkpoint));
    std::istringstream lines(slurp(a.metrics));
    int count = 0;
    for (std::string line; std::getline(lines, line); ++count) {
      CHECK(line.find("train_loss") != std::string::npos);
      CHECK(line.find("wall_seconds") == std::string::npos);
    }
    CHECK(count == 2);
    CHECK(fs::exists(a.timing));

    cfg.seed = 8;
    auto c = train(cfg, dir.path() / "run_c");
    CHECK(slurp(a.metrics) != slurp(c.metrics));
  }

  SUBCASE("evaluation") {
    auto cfg = small_run(dir.path() / "data");
    cfg.epochs = 12;
    cfg.flip = false;
    auto r = train(cfg, dir.path() / "fit");
    const auto before = slurp(r.last_checkpoint);
    auto train_idx = ingest(dir.path() / "data" / "train");
    auto report = evaluate(r.last_checkpoint, train_idx);
    CHECK(slurp(r.last_checkpoint) == before);
    CHECK(report.total == 16);
    CHECK(report.top1 == 1.0);

    auto test_idx = ingest(dir.path() / "data" / "test");
    auto best = evaluate(r.best_checkpoint, test_idx);
    CHECK(best.top1 == doctest::Approx(r.best_top1));

    CoarseMap one_group = {{"horizontal", "stripes"}, {"vertical", "stripes"}};
    auto coarse = evaluate(r.last_checkpoint, test_idx, &one_group);
    REQUIRE(coarse.coarse_top1);
    CHECK(*coarse.coarse_top1 == 1.0);

    CoarseMap missing = {{"horizontal", "stripes"}};
    CHECK(error_code([&] { evaluate(r.last_checkpoint, test_idx, &missing); }) == Errc::ClassMapMismatch);
    const std::vector<std::string> swapped = {"vertical", "horizontal"};
    auto other = ingest(dir.path() / "data" / "test", swapped);
    CHECK(error_code([&] { evaluate(r.last_checkpoint, other); }) == Errc::ClassMapMismatch);
  }
}

TEST_CASE("an untrained classifier scores near chance on label-independent data") {
  // Four classes drawn from one distribution: labels carry no signal.
  testing::TempDir dir("chance");
  const char* names[4] = {"c0", "c1", "c2", "c3"};
  for (int c = 0; c < 4; ++c)
    for (int i = 0; i < 10; ++i)
      write_small_jpeg(dir.path() / "train" / names[c] / (std::to_string(i) + ".jpg"), 0, uint64_t(100 + 10 * c + i));
  fs::copy(dir.path() / "train", dir.path() / "test", fs::copy_options::recursive);
  auto cfg = small_run(dir.path());
  cfg.epochs = 1;
  cfg.lr = 0;
  auto r = train(cfg, dir.path() / "out");
  auto report = evaluate(r.last_checkpoint, ingest(dir.path() / "test"));
  // 0.25 +- 3 binomial standard deviations over 40 images.
  CHECK(report.top1 < 0.25 + 3 * std::sqrt(0.25 * 0.75 / 40));
}

TEST_CASE("complexity reports: table layouts and duplicate names") {
  std::vector<NetworkConfig> skips;
  for (int entry = 2; entry <= 5; ++entry) skips.push_back(parse_network_config("entry_stage = " + std::to_string(entry)));
  auto reports = report_complexity(skips);
  REQUIRE(reports.size() == 4);
  CHECK(reports[1].approach == "Skip the first and second stages (1x128)");

  auto dupes = report_complexity({parse_network_config("name = x"), parse_network_config("name = x\nentry_stage = 5"),
                                  parse_network_config("name = x")});
  CHECK(dupes[0].approach == "x");
  CHECK(dupes[1].approach == "x (2)");
  CHECK(dupes[2].approach == "x (3)");

  testing::TempDir dir("tables");
  write_complexity_tables(reports, dir.path() / "out" / "table2");
  auto rows = complexity::parse_csv(slurp(dir.path() / "out" / "table2.csv"));
  REQUIRE(rows.size() == 4);
  CHECK(rows[3].params == reports[3].total_params);
  CHECK(slurp(dir.path() / "out" / "table2.txt") == complexity::emit_text_table(reports));
}
