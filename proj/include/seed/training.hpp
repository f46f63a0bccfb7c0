// Licensed under the Apache License, Version 2.0.
// SPDX-License-Identifier: Apache-2.0

#ifndef SEED_TRAINING_HPP
#define SEED_TRAINING_HPP

#include "seed/gmn.hpp"
#include "seed/graph.hpp"
#include "seed/model.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace seed::training {

/// Hinge on cosine similarity: clones are pushed above `margin`, non-clones
/// below `1 - margin`.
double pair_loss(double similarity, bool is_clone, double margin);

/// d(pair_loss)/d(similarity); the kink takes subgradient 0.
double pair_loss_grad(double similarity, bool is_clone, double margin);

struct ScoredPair {
  double score = 0.0;
  bool is_clone = false;
};

struct EvalReport {
  double threshold = 0.0;
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  double precision = 0.0, recall = 0.0, f1 = 0.0;

  std::string to_json() const;
};

/// Confusion counts and metrics for `score >= threshold` => clone.
EvalReport confusion_report(std::span<const ScoredPair> scored, double threshold);

/// Metrics from raw confusion counts; zero denominators give zero.
EvalReport metrics_from_counts(std::size_t tp, std::size_t fp, std::size_t tn,
                               std::size_t fn, double threshold = 0.0);

struct ThresholdChoice {
  double threshold = 0.0;
  double f1 = 0.0;
};

/// Chooses the threshold maximizing F1. Candidates are the midpoints between
/// adjacent distinct scores plus the lowest score (everything a clone); ties
/// go to the larger threshold. Requires at least one pair of each label.
ThresholdChoice select_threshold(std::span<const ScoredPair> scored);

struct TrainConfig {
  std::size_t epochs = 30;
  std::size_t batch_size = 16;
  double learning_rate = 0.05;
  double margin = 0.5;
  std::size_t iterations = 5;
  std::uint64_t seed = 1;
  graph::Variant variant = graph::Variant::Seed;
  std::size_t patience = 10;
  std::size_t dim = 32;

  /// Throws Error(InvalidArgument) on out-of-range values.
  void validate() const;
};

/// A labeled pair of graphs, by index into a shared graph table.
struct IndexedPair {
  std::size_t a = 0;
  std::size_t b = 0;
  bool is_clone = false;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_f1 = 0.0;
  double threshold = 0.0;

  /// One line-delimited JSON record; doubles are printed round-trippable.
  std::string to_line() const;
};

struct TrainResult {
  ModelParams params;
  double threshold = 0.0;
  double val_f1 = 0.0;
  std::size_t best_epoch = 0;
  std::vector<EpochRecord> history;
};

std::vector<ScoredPair> score_pairs(std::span<const gmn::GraphInput> graphs,
                                    std::span<const IndexedPair> pairs,
                                    const ModelParams &params,
                                    std::size_t iterations);

/// Mini-batch SGD with per-epoch shuffling, validation-threshold selection
/// each epoch and early stopping on validation F1. Returns the parameters of
/// the best validation epoch. Throws Error(DegenerateData) when either split
/// lacks one of the labels.
TrainResult train(std::span<const gmn::GraphInput> graphs,
                  std::span<const IndexedPair> train_pairs,
                  std::span<const IndexedPair> val_pairs, std::size_t vocab_size,
                  const TrainConfig &config);

/// Scores `pairs` and classifies them against a fixed threshold.
EvalReport evaluate(std::span<const gmn::GraphInput> graphs,
                    std::span<const IndexedPair> pairs, const ModelParams &params,
                    std::size_t iterations, double threshold);

} // namespace seed::training

#endif // SEED_TRAINING_HPP
