// Licensed under the Apache License, Version 2.0.
// SPDX-License-Identifier: Apache-2.0

// Writes the synthetic clone corpus used by the tests to a directory.

#include "support/synthetic.hpp"

#include <CLI11.hpp>

#include <exception>
#include <iostream>

int main(int argc, char **argv) {
  CLI::App app{"Write the synthetic IR clone corpus"};
  std::string out;
  seed::testing::SyntheticOptions options;
  app.add_option("out", out, "Output directory")->required();
  app.add_option("--problems", options.problems, "Number of problems (at most 8)")
      ->check(CLI::Range(1, 8));
  app.add_option("--variants", options.variants, "Variants per problem")
      ->check(CLI::PositiveNumber);
  app.add_option("--seed", options.seed, "Generator seed");
  CLI11_PARSE(app, argc, argv);
  try {
    seed::testing::write_synthetic_corpus(out, options);
  } catch (const std::exception &e) {
    std::cerr << "seed-synth: " << e.what() << '\n';
    return 1;
  }
  std::cout << "wrote " << options.problems * options.variants << " files to " << out << '\n';
  return 0;
}
