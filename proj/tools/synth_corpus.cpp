// Writes the two-class stripe corpus (train/ and test/ splits) used by the
// toy training runs.

#include <CLI11.hpp>
#include <cstdio>

#include "corpus.hpp"

int main(int argc, char** argv) {
  CLI::App app{"two-class stripe JPEG corpus"};
  std::string root;
  dctnet::testing::CorpusOptions options;
  app.add_option("root", root, "output directory")->required();
  app.add_option("--train", options.train_per_class, "training images per class");
  app.add_option("--test", options.test_per_class, "test images per class");
  app.add_option("--size", options.size, "image side in pixels");
  app.add_option("--quality", options.quality);
  app.add_option("--seed", options.seed);
  CLI11_PARSE(app, argc, argv);
  dctnet::testing::write_stripe_corpus(root, options);
  std::printf("wrote %d train and %d test images per class under %s\n", options.train_per_class,
              options.test_per_class, root.c_str());
  return 0;
}
