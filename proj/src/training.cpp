// Licensed under the Apache License, Version 2.0.
// SPDX-License-Identifier: Apache-2.0

#include "seed/training.hpp"

#include "seed/error.hpp"
#include "seed/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <numeric>

namespace seed::training {

double pair_loss(double similarity, bool is_clone, double margin) {
  return is_clone ? std::max(0.0, margin - similarity)
                  : std::max(0.0, similarity - (1.0 - margin));
}

double pair_loss_grad(double similarity, bool is_clone, double margin) {
  if (is_clone)
    return margin - similarity > 0.0 ? -1.0 : 0.0;
  return similarity - (1.0 - margin) > 0.0 ? 1.0 : 0.0;
}

EvalReport metrics_from_counts(std::size_t tp, std::size_t fp, std::size_t tn,
                               std::size_t fn, double threshold) {
  EvalReport r;
  r.threshold = threshold;
  r.tp = tp;
  r.fp = fp;
  r.tn = tn;
  r.fn = fn;
  r.precision = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  r.recall = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  r.f1 = r.precision + r.recall > 0.0
             ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
             : 0.0;
  return r;
}

EvalReport confusion_report(std::span<const ScoredPair> scored, double threshold) {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  for (const auto &p : scored) {
    const bool predicted = p.score >= threshold;
    if (predicted)
      (p.is_clone ? tp : fp)++;
    else
      (p.is_clone ? fn : tn)++;
  }
  return metrics_from_counts(tp, fp, tn, fn, threshold);
}

std::string EvalReport::to_json() const {
  nlohmann::ordered_json j;
  j["threshold"] = threshold;
  j["tp"] = tp;
  j["fp"] = fp;
  j["tn"] = tn;
  j["fn"] = fn;
  j["precision"] = precision;
  j["recall"] = recall;
  j["f1"] = f1;
  return j.dump();
}

ThresholdChoice select_threshold(std::span<const ScoredPair> scored) {
  const std::size_t positives = static_cast<std::size_t>(
      std::count_if(scored.begin(), scored.end(), [](const auto &p) { return p.is_clone; }));
  if (positives == 0 || positives == scored.size())
    throw Error(ErrorCode::DegenerateData,
                "threshold selection needs at least one pair of each label");

  std::vector<ScoredPair> sorted(scored.begin(), scored.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const auto &x, const auto &y) { return x.score > y.score; });

  // F1 = 2tp / (2tp + fp + fn) = 2tp / (tp + fp + positives); comparing the
  // fractions in integers keeps exact ties exact.
  ThresholdChoice best{sorted.front().score, -1.0};
  std::size_t tp = 0, fp = 0, best_tp = 0, best_den = 1;
  auto consider = [&](double threshold) {
    const std::size_t den = tp + fp + positives;
    // Candidates arrive in decreasing threshold order, so ties keep the larger.
    if (best.f1 < 0.0 || tp * best_den > best_tp * den) {
      best = {threshold, metrics_from_counts(tp, fp, 0, positives - tp, threshold).f1};
      best_tp = tp;
      best_den = den;
    }
  };
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    (sorted[i].is_clone ? tp : fp)++;
    const bool last = i + 1 == sorted.size();
    if (last) {
      consider(sorted[i].score);
    } else if (sorted[i + 1].score < sorted[i].score) {
      const double upper = sorted[i].score, lower = sorted[i + 1].score;
      double mid = lower + (upper - lower) / 2.0;
      if (mid <= lower)
        mid = upper;
      consider(mid);
    }
  }
  return best;
}

void TrainConfig::validate() const {
  auto fail = [](const std::string &what) {
    throw Error(ErrorCode::InvalidArgument, "invalid training config: " + what);
  };
  if (epochs == 0)
    fail("epochs must be positive");
  if (batch_size == 0)
    fail("batch_size must be positive");
  if (!(learning_rate >= 0.0))
    fail("learning_rate must be non-negative");
  if (!(margin > 0.0 && margin < 2.0))
    fail("margin must lie in (0, 2)");
  if (iterations == 0)
    fail("iterations must be positive");
  if (patience == 0)
    fail("patience must be positive");
  if (dim == 0)
    fail("dim must be positive");
}

std::string EpochRecord::to_line() const {
  nlohmann::ordered_json j;
  j["epoch"] = epoch;
  j["train_loss"] = train_loss;
  j["val_f1"] = val_f1;
  j["threshold"] = threshold;
  return j.dump();
}

std::vector<ScoredPair> score_pairs(std::span<const gmn::GraphInput> graphs,
                                    std::span<const IndexedPair> pairs,
                                    const ModelParams &params,
                                    std::size_t iterations) {
  std::vector<ScoredPair> out;
  out.reserve(pairs.size());
  for (const auto &p : pairs)
    out.push_back({gmn::forward_pair(graphs[p.a], graphs[p.b], params, iterations)
                       .similarity,
                   p.is_clone});
  return out;
}

namespace {

void require_both_labels(std::span<const IndexedPair> pairs, const char *split) {
  bool clone = false, nonclone = false;
  for (const auto &p : pairs)
    (p.is_clone ? clone : nonclone) = true;
  if (!clone || !nonclone)
    throw Error(ErrorCode::DegenerateData,
                std::string("the ") + split + " split holds only one label");
}

} // namespace

TrainResult train(std::span<const gmn::GraphInput> graphs,
                  std::span<const IndexedPair> train_pairs,
                  std::span<const IndexedPair> val_pairs, std::size_t vocab_size,
                  const TrainConfig &config) {
  config.validate();
  require_both_labels(train_pairs, "training");
  require_both_labels(val_pairs, "validation");

  TrainResult result;
  ModelParams params = ModelParams::initialize(vocab_size, config.dim, config.seed);
  ModelParams grad = ModelParams::zeros(vocab_size, config.dim);
  Rng rng(config.seed ^ 0x9e3779b97f4a7c15ull);

  std::vector<std::size_t> order(train_pairs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  result.params = params;
  result.val_f1 = -1.0;
  std::size_t since_best = 0;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.shuffle(order);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      grad.set_zero();
      for (std::size_t k = start; k < end; ++k) {
        const IndexedPair &p = train_pairs[order[k]];
        loss_sum += gmn::backward_pair(graphs[p.a], graphs[p.b], p.is_clone,
                                       config.margin, params, config.iterations, grad);
      }
      if (config.learning_rate > 0.0)
        params.add_scaled(grad, -config.learning_rate / static_cast<double>(end - start));
    }

    const auto scored = score_pairs(graphs, val_pairs, params, config.iterations);
    const ThresholdChoice choice = select_threshold(scored);
    EpochRecord rec{epoch, loss_sum / static_cast<double>(train_pairs.size()),
                    choice.f1, choice.threshold};
    result.history.push_back(rec);

    if (choice.f1 > result.val_f1) {
      result.val_f1 = choice.f1;
      result.threshold = choice.threshold;
      result.best_epoch = epoch;
      result.params = params;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }
  return result;
}

EvalReport evaluate(std::span<const gmn::GraphInput> graphs,
                    std::span<const IndexedPair> pairs, const ModelParams &params,
                    std::size_t iterations, double threshold) {
  return confusion_report(score_pairs(graphs, pairs, params, iterations), threshold);
}

} // namespace seed::training
