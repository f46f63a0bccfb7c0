// Licensed under the Apache License, Version 2.0.
// SPDX-License-Identifier: Apache-2.0

#ifndef SEED_PIPELINE_HPP
#define SEED_PIPELINE_HPP

#include "seed/corpus.hpp"
#include "seed/model.hpp"
#include "seed/training.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace seed::pipeline {

/// Settings for an end-to-end run. Read from `key=value` text; unknown keys
/// are rejected.
struct RunConfig {
  training::TrainConfig train;
  std::size_t train_pairs = 512;
  std::size_t val_pairs = 128;
  std::size_t test_pairs = 128;
  corpus::SplitRatios ratios;
  /// When set, overrides the seeded ratio split.
  std::optional<corpus::ExplicitSplit> explicit_split;
  bool strict = false;

  static RunConfig parse(std::string_view text);
  /// Applies `key=value` lines on top of the current values; `#` starts a
  /// comment.
  void apply(std::string_view text);
  static const std::vector<std::string> &keys();

  /// Throws Error(InvalidArgument) for unknown keys or bad values.
  void set(std::string_view key, std::string_view value);
  void validate() const;
  /// Every key with its canonical value, in `keys()` order.
  std::vector<std::pair<std::string, std::string>> entries() const;
  std::string to_text() const;
};

struct PairSets {
  corpus::SplitSpec split;
  std::vector<corpus::LabeledPair> train;
  std::vector<corpus::LabeledPair> val;
  std::vector<corpus::LabeledPair> test;
};

/// Splits the corpus by problem, checks hygiene and samples the three pair
/// sets with seeds derived from the run seed.
PairSets prepare_pairs(const corpus::CorpusIndex &index, const RunConfig &config);

struct TrainOutcome {
  Checkpoint checkpoint;
  std::vector<training::EpochRecord> history;
  training::EvalReport test_report;
  PairSets pairs;
  std::size_t skipped_files = 0;

  std::string history_text() const;
};

/// scan -> split -> sample -> graphs -> vocabulary (training problems only)
/// -> SGD -> threshold on validation -> report on the held-out test split.
TrainOutcome run_training(const std::filesystem::path &corpus_root,
                          const RunConfig &config);
TrainOutcome run_training(const corpus::CorpusIndex &index, const RunConfig &config);

/// Rebuilds the run configuration stored in a checkpoint.
RunConfig config_from_checkpoint(const Checkpoint &ckpt);

/// Re-derives the pair set named `split` ("train", "val" or "test") from the
/// checkpoint configuration and classifies it with the stored threshold.
training::EvalReport run_evaluation(const std::filesystem::path &corpus_root,
                                    const Checkpoint &ckpt,
                                    std::string_view split = "test");

struct Detection {
  double similarity = 0.0;
  bool clone = false;

  std::string to_json() const;
};

/// Scores two IR modules. Throws Error(InvalidArgument) when either holds no
/// function definition.
Detection detect(const Checkpoint &ckpt, std::string_view ir_a, std::string_view ir_b);

struct VariantStats {
  graph::Variant variant = graph::Variant::Seed;
  std::size_t graphs = 0;
  std::size_t vocabulary = 0;
  double operand_nodes = 0.0;  ///< mean per graph
  double dataflow_edges = 0.0; ///< mean per graph
  double nodes = 0.0;
  double edges = 0.0;
};

struct CorpusStats {
  std::size_t problems = 0;
  std::size_t snippets = 0;
  std::size_t skipped = 0;
  std::vector<VariantStats> variants;

  std::string to_json() const;
  std::string to_table() const;
};

CorpusStats corpus_stats(const corpus::CorpusIndex &index,
                         const std::vector<graph::Variant> &variants);

} // namespace seed::pipeline

#endif // SEED_PIPELINE_HPP
