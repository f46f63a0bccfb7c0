// Licensed under the Apache License, Version 2.0.
// SPDX-License-Identifier: Apache-2.0

#ifndef SEED_CORPUS_HPP
#define SEED_CORPUS_HPP

#include "seed/ir.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace seed::corpus {

/// Orders numeric ids by value and everything else lexicographically, so
/// problem "10" sorts after "9".
struct NaturalLess {
  bool operator()(std::string_view a, std::string_view b) const;
  using is_transparent = void;
};

struct Snippet {
  std::string problem;
  std::string id;
  std::filesystem::path path;
  std::vector<ir::IrFunction> functions;

  std::string key() const { return problem + "/" + id; }
};

struct SkippedFile {
  std::filesystem::path path;
  std::string reason;
};

/// Snippets grouped by problem (functionality) id, both levels sorted.
struct CorpusIndex {
  std::map<std::string, std::vector<Snippet>, NaturalLess> problems;
  std::vector<SkippedFile> skipped;

  std::size_t snippet_count() const;
  std::vector<std::string> problem_ids() const;
  const Snippet &snippet(std::string_view problem, std::string_view id) const;
};

/// Reads `root/<problem-id>/<snippet-id>.ll`. Files the parser rejects are
/// listed in `skipped` unless `strict`, in which case the error propagates.
/// Throws Error(EmptyCorpus) when no snippet survives.
CorpusIndex scan_corpus(const std::filesystem::path &root, bool strict = false);

struct SplitSpec {
  std::vector<std::string> train;
  std::vector<std::string> val;
  std::vector<std::string> test;
};

struct SplitRatios {
  double train = 0.5;
  double val = 0.25;
  double test = 0.25;
};

/// Explicit problem-id lists; entries may be ranges such as `1-15`.
struct ExplicitSplit {
  std::string train;
  std::string val;
  std::string test;
};

/// Expands a comma separated id list with numeric ranges against the ids
/// present in the corpus.
std::vector<std::string> expand_ids(std::string_view spec,
                                    const std::vector<std::string> &corpus_ids);

/// Throws Error(OverlappingSplit) if a problem id is in two sets, and
/// Error(InvalidArgument) for empty sets or ids outside the corpus.
void check_split(const SplitSpec &split, const CorpusIndex &index);

SplitSpec make_splits(const CorpusIndex &index, const ExplicitSplit &spec);
SplitSpec make_splits(const CorpusIndex &index, const SplitRatios &ratios,
                      std::uint64_t seed);

struct SnippetRef {
  std::string problem;
  std::string id;

  std::string key() const { return problem + "/" + id; }
  friend bool operator==(const SnippetRef &, const SnippetRef &) = default;
};

struct LabeledPair {
  SnippetRef a;
  SnippetRef b;
  bool is_clone = false;

  friend bool operator==(const LabeledPair &, const LabeledPair &) = default;
};

/// Samples `n_pairs` distinct unordered pairs from the given problems at a
/// 1:1 clone/non-clone ratio (fewer when a class runs out). Draws are uniform
/// over snippet pairs. Throws Error(InsufficientPairs) when a class is empty.
std::vector<LabeledPair> sample_pairs(const CorpusIndex &index,
                                      std::span<const std::string> problems,
                                      std::size_t n_pairs, std::uint64_t seed);

/// `problemA/snippetA problemB/snippetB clone|nonclone`, one pair per line.
std::string format_pairs(std::span<const LabeledPair> pairs);
std::vector<LabeledPair> parse_pairs(std::string_view text);

} // namespace seed::corpus

#endif // SEED_CORPUS_HPP
