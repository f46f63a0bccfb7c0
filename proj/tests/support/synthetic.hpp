// Licensed under the Apache License, Version 2.0.
// SPDX-License-Identifier: Apache-2.0

// Synthetic clone corpus: a handful of small IR programs, each rewritten
// into several variants that keep its behaviour class but change its text.

#ifndef SEED_TESTS_SYNTHETIC_HPP
#define SEED_TESTS_SYNTHETIC_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace seed::testing {

/// Names of the built-in problem templates, in problem-id order.
const std::vector<std::string> &synthetic_problem_names();

/// One variant of template `problem` (0-based). Statements inside a block
/// are shuffled along a dependency-respecting order, non-entry blocks are
/// permuted, local names and labels are renamed, and marked constants are
/// redrawn from their ranges.
std::string synthetic_variant(std::size_t problem, std::uint64_t seed);

struct SyntheticOptions {
  std::size_t problems = 8;
  std::size_t variants = 8;
  std::uint64_t seed = 7;
};

/// Writes `root/<problem>/<variant>.ll` with 1-based numeric ids.
void write_synthetic_corpus(const std::filesystem::path &root,
                            const SyntheticOptions &options = {});

} // namespace seed::testing

#endif // SEED_TESTS_SYNTHETIC_HPP
