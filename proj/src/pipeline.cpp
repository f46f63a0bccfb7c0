// Licensed under the Apache License, Version 2.0.
// SPDX-License-Identifier: Apache-2.0

#include "seed/pipeline.hpp"

#include "seed/error.hpp"
#include "seed/gmn.hpp"

#include <json.hpp>

#include <charconv>
#include <cstdio>
#include <map>
#include <sstream>

namespace seed::pipeline {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value,
                            const char *expected) {
  throw Error(ErrorCode::InvalidArgument, "config key '" + std::string(key) +
                                              "': expected " + expected + ", got '" +
                                              std::string(value) + "'");
}

template <typename T> T parse_number(std::string_view key, std::string_view value) {
  T out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size())
    bad_value(key, value, std::is_floating_point_v<T> ? "a number" : "a non-negative integer");
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes")
    return true;
  if (value == "false" || value == "0" || value == "no")
    return false;
  bad_value(key, value, "true or false");
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

} // namespace

//===----------------------------------------------------------------------===//
// RunConfig
//===----------------------------------------------------------------------===//

const std::vector<std::string> &RunConfig::keys() {
  static const std::vector<std::string> k = {
      "variant",      "seed",          "epochs",      "batch_size",   "learning_rate",
      "margin",       "iterations",    "patience",    "dim",          "train_pairs",
      "val_pairs",    "test_pairs",    "train_ratio", "val_ratio",    "test_ratio",
      "train_problems", "val_problems", "test_problems", "strict"};
  return k;
}

void RunConfig::set(std::string_view key, std::string_view value) {
  value = trim(value);
  auto &t = train;
  auto split_field = [&]() -> std::string & {
    if (!explicit_split)
      explicit_split.emplace();
    if (key == "train_problems")
      return explicit_split->train;
    if (key == "val_problems")
      return explicit_split->val;
    return explicit_split->test;
  };
  if (key == "variant")
    t.variant = graph::parse_variant(value);
  else if (key == "seed")
    t.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "epochs")
    t.epochs = parse_number<std::size_t>(key, value);
  else if (key == "batch_size")
    t.batch_size = parse_number<std::size_t>(key, value);
  else if (key == "learning_rate")
    t.learning_rate = parse_number<double>(key, value);
  else if (key == "margin")
    t.margin = parse_number<double>(key, value);
  else if (key == "iterations")
    t.iterations = parse_number<std::size_t>(key, value);
  else if (key == "patience")
    t.patience = parse_number<std::size_t>(key, value);
  else if (key == "dim")
    t.dim = parse_number<std::size_t>(key, value);
  else if (key == "train_pairs")
    train_pairs = parse_number<std::size_t>(key, value);
  else if (key == "val_pairs")
    val_pairs = parse_number<std::size_t>(key, value);
  else if (key == "test_pairs")
    test_pairs = parse_number<std::size_t>(key, value);
  else if (key == "train_ratio")
    ratios.train = parse_number<double>(key, value);
  else if (key == "val_ratio")
    ratios.val = parse_number<double>(key, value);
  else if (key == "test_ratio")
    ratios.test = parse_number<double>(key, value);
  else if (key == "train_problems" || key == "val_problems" || key == "test_problems")
    split_field() = std::string(value);
  else if (key == "strict")
    strict = parse_bool(key, value);
  else
    throw Error(ErrorCode::InvalidArgument, "unknown config key '" + std::string(key) + "'");
}

void RunConfig::apply(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string_view s = raw;
    if (auto hash = s.find('#'); hash != std::string_view::npos)
      s = s.substr(0, hash);
    s = trim(s);
    if (s.empty())
      continue;
    auto eq = s.find('=');
    if (eq == std::string_view::npos)
      throw Error(ErrorCode::InvalidArgument,
                  "config line " + std::to_string(line) + ": expected key=value");
    set(trim(s.substr(0, eq)), s.substr(eq + 1));
  }
}

RunConfig RunConfig::parse(std::string_view text) {
  RunConfig config;
  config.apply(text);
  config.validate();
  return config;
}

void RunConfig::validate() const {
  train.validate();
  if (train_pairs < 2 || val_pairs < 2 || test_pairs < 2)
    throw Error(ErrorCode::InvalidArgument, "each pair count must be at least 2");
  if (!(ratios.train > 0 && ratios.val > 0 && ratios.test > 0))
    throw Error(ErrorCode::InvalidArgument, "split ratios must be positive");
  if (explicit_split &&
      (explicit_split->train.empty() || explicit_split->val.empty() ||
       explicit_split->test.empty()))
    throw Error(ErrorCode::InvalidArgument,
                "explicit splits need train_problems, val_problems and test_problems");
}

std::vector<std::pair<std::string, std::string>> RunConfig::entries() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto &key : keys()) {
    std::string v;
    if (key == "variant") v = graph::variant_name(train.variant);
    else if (key == "seed") v = std::to_string(train.seed);
    else if (key == "epochs") v = std::to_string(train.epochs);
    else if (key == "batch_size") v = std::to_string(train.batch_size);
    else if (key == "learning_rate") v = format_double(train.learning_rate);
    else if (key == "margin") v = format_double(train.margin);
    else if (key == "iterations") v = std::to_string(train.iterations);
    else if (key == "patience") v = std::to_string(train.patience);
    else if (key == "dim") v = std::to_string(train.dim);
    else if (key == "train_pairs") v = std::to_string(train_pairs);
    else if (key == "val_pairs") v = std::to_string(val_pairs);
    else if (key == "test_pairs") v = std::to_string(test_pairs);
    else if (key == "train_ratio") v = format_double(ratios.train);
    else if (key == "val_ratio") v = format_double(ratios.val);
    else if (key == "test_ratio") v = format_double(ratios.test);
    else if (key == "train_problems" || key == "val_problems" || key == "test_problems") {
      if (!explicit_split)
        continue;
      v = key == "train_problems" ? explicit_split->train
          : key == "val_problems" ? explicit_split->val
                                  : explicit_split->test;
    } else if (key == "strict") v = strict ? "true" : "false";
    out.emplace_back(key, v);
  }
  return out;
}

std::string RunConfig::to_text() const {
  std::string out;
  for (const auto &[k, v] : entries())
    out += k + "=" + v + "\n";
  return out;
}

//===----------------------------------------------------------------------===//
// Training and evaluation
//===----------------------------------------------------------------------===//

PairSets prepare_pairs(const corpus::CorpusIndex &index, const RunConfig &config) {
  PairSets sets;
  sets.split = config.explicit_split
                   ? corpus::make_splits(index, *config.explicit_split)
                   : corpus::make_splits(index, config.ratios, config.train.seed);
  corpus::check_split(sets.split, index);
  const std::uint64_t s = config.train.seed;
  sets.train = corpus::sample_pairs(index, sets.split.train, config.train_pairs, s * 4 + 1);
  sets.val = corpus::sample_pairs(index, sets.split.val, config.val_pairs, s * 4 + 2);
  sets.test = corpus::sample_pairs(index, sets.split.test, config.test_pairs, s * 4 + 3);
  return sets;
}

namespace {

/// Graphs of the snippets referenced by a set of pairs, built once each.
class GraphTable {
public:
  GraphTable(const corpus::CorpusIndex &index, graph::Variant variant)
      : index_(index), variant_(variant) {}

  std::size_t add(const corpus::SnippetRef &ref) {
    const std::string key = ref.key();
    auto it = slots_.find(key);
    if (it != slots_.end())
      return it->second;
    const auto &snippet = index_.snippet(ref.problem, ref.id);
    graphs_.push_back(graph::build_module_graph(snippet.functions, variant_, key));
    slots_.emplace(key, graphs_.size() - 1);
    return graphs_.size() - 1;
  }

  std::vector<training::IndexedPair> add(const std::vector<corpus::LabeledPair> &pairs) {
    std::vector<training::IndexedPair> out;
    out.reserve(pairs.size());
    for (const auto &p : pairs) {
      const std::size_t a = add(p.a);
      const std::size_t b = add(p.b);
      out.push_back({a, b, p.is_clone});
    }
    return out;
  }

  const std::vector<graph::SemanticGraph> &graphs() const { return graphs_; }

  std::vector<gmn::GraphInput> inputs(const encoding::Vocabulary &vocab) const {
    std::vector<gmn::GraphInput> out;
    out.reserve(graphs_.size());
    for (const auto &g : graphs_)
      out.push_back(gmn::prepare(g, vocab));
    return out;
  }

private:
  const corpus::CorpusIndex &index_;
  graph::Variant variant_;
  std::vector<graph::SemanticGraph> graphs_;
  std::map<std::string, std::size_t> slots_;
};

} // namespace

std::string TrainOutcome::history_text() const {
  std::string out;
  for (const auto &rec : history)
    out += rec.to_line() + "\n";
  return out;
}

TrainOutcome run_training(const std::filesystem::path &corpus_root,
                          const RunConfig &config) {
  config.validate();
  return run_training(corpus::scan_corpus(corpus_root, config.strict), config);
}

TrainOutcome run_training(const corpus::CorpusIndex &index, const RunConfig &config) {
  config.validate();
  TrainOutcome out;
  out.skipped_files = index.skipped.size();
  out.pairs = prepare_pairs(index, config);

  GraphTable table(index, config.train.variant);
  const auto train_idx = table.add(out.pairs.train);
  const std::size_t n_train_graphs = table.graphs().size();
  const auto val_idx = table.add(out.pairs.val);
  const auto test_idx = table.add(out.pairs.test);

  // Only training snippets contribute tokens; unseen ones map to <unk>.
  auto vocab = encoding::Vocabulary::build(
      std::span(table.graphs().data(), n_train_graphs));
  const auto inputs = table.inputs(vocab);

  auto result = training::train(inputs, train_idx, val_idx, vocab.size(), config.train);
  out.history = std::move(result.history);
  out.test_report = training::evaluate(inputs, test_idx, result.params,
                                       config.train.iterations, result.threshold);
  out.checkpoint.params = std::move(result.params);
  out.checkpoint.vocab = std::move(vocab);
  out.checkpoint.threshold = result.threshold;
  out.checkpoint.config = config.entries();
  return out;
}

RunConfig config_from_checkpoint(const Checkpoint &ckpt) {
  RunConfig config;
  for (const auto &[k, v] : ckpt.config)
    config.set(k, v);
  config.validate();
  if (config.train.dim != ckpt.params.dim())
    throw Error(ErrorCode::Checkpoint, "checkpoint dim does not match its tensors");
  return config;
}

training::EvalReport run_evaluation(const std::filesystem::path &corpus_root,
                                    const Checkpoint &ckpt, std::string_view split) {
  const RunConfig config = config_from_checkpoint(ckpt);
  const auto index = corpus::scan_corpus(corpus_root, config.strict);
  const PairSets sets = prepare_pairs(index, config);
  const std::vector<corpus::LabeledPair> *pairs = nullptr;
  if (split == "train")
    pairs = &sets.train;
  else if (split == "val")
    pairs = &sets.val;
  else if (split == "test")
    pairs = &sets.test;
  else
    throw Error(ErrorCode::InvalidArgument,
                "unknown split '" + std::string(split) + "' (train, val or test)");
  GraphTable table(index, config.train.variant);
  const auto idx = table.add(*pairs);
  return training::evaluate(table.inputs(ckpt.vocab), idx, ckpt.params,
                            config.train.iterations, ckpt.threshold);
}

std::string Detection::to_json() const {
  nlohmann::ordered_json j;
  j["similarity"] = similarity;
  j["verdict"] = clone ? "clone" : "nonclone";
  return j.dump();
}

Detection detect(const Checkpoint &ckpt, std::string_view ir_a, std::string_view ir_b) {
  const RunConfig config = config_from_checkpoint(ckpt);
  // Score in a canonical order so swapping the inputs is bit-identical.
  if (ir_b < ir_a)
    std::swap(ir_a, ir_b);
  auto load = [&](std::string_view text, const char *which) {
    auto functions = ir::parse_module(text, {config.strict});
    if (functions.empty())
      throw Error(ErrorCode::InvalidArgument,
                  std::string(which) + " input holds no function definition");
    return gmn::prepare(
        graph::build_module_graph(functions, config.train.variant, which), ckpt.vocab);
  };
  const auto a = load(ir_a, "first");
  const auto b = load(ir_b, "second");
  Detection d;
  d.similarity = gmn::forward_pair(a, b, ckpt.params, config.train.iterations).similarity;
  d.clone = d.similarity >= ckpt.threshold;
  return d;
}

//===----------------------------------------------------------------------===//
// Corpus statistics
//===----------------------------------------------------------------------===//

CorpusStats corpus_stats(const corpus::CorpusIndex &index,
                         const std::vector<graph::Variant> &variants) {
  CorpusStats stats;
  stats.problems = index.problems.size();
  stats.snippets = index.snippet_count();
  stats.skipped = index.skipped.size();
  for (graph::Variant v : variants) {
    VariantStats vs;
    vs.variant = v;
    std::vector<graph::SemanticGraph> graphs;
    for (const auto &[_, snippets] : index.problems)
      for (const auto &s : snippets)
        graphs.push_back(graph::build_module_graph(s.functions, v, s.key()));
    for (const auto &g : graphs) {
      const auto gs = graph::graph_stats(g);
      vs.operand_nodes += static_cast<double>(gs.operand_nodes());
      vs.dataflow_edges += static_cast<double>(gs.dataflow_edges());
      vs.nodes += static_cast<double>(gs.node_count());
      vs.edges += static_cast<double>(gs.edge_count());
    }
    vs.graphs = graphs.size();
    const double n = static_cast<double>(std::max<std::size_t>(1, graphs.size()));
    vs.operand_nodes /= n;
    vs.dataflow_edges /= n;
    vs.nodes /= n;
    vs.edges /= n;
    // Vocabulary size excludes the <unk> row.
    vs.vocabulary = encoding::Vocabulary::build(graphs).size() - 1;
    stats.variants.push_back(vs);
  }
  return stats;
}

std::string CorpusStats::to_json() const {
  nlohmann::ordered_json j;
  j["problems"] = problems;
  j["snippets"] = snippets;
  j["skipped"] = skipped;
  j["variants"] = nlohmann::ordered_json::array();
  for (const auto &v : variants) {
    nlohmann::ordered_json row;
    row["variant"] = graph::variant_name(v.variant);
    row["graphs"] = v.graphs;
    row["vocabulary"] = v.vocabulary;
    row["operand_nodes"] = v.operand_nodes;
    row["dataflow_edges"] = v.dataflow_edges;
    row["nodes"] = v.nodes;
    row["edges"] = v.edges;
    j["variants"].push_back(row);
  }
  return j.dump(2);
}

std::string CorpusStats::to_table() const {
  std::string out = "problems " + std::to_string(problems) + ", snippets " +
                    std::to_string(snippets) + ", skipped " + std::to_string(skipped) + "\n";
  char line[160];
  std::snprintf(line, sizeof line, "%-16s %10s %14s %15s %10s %10s\n", "variant",
                "vocabulary", "operand_nodes", "dataflow_edges", "nodes", "edges");
  out += line;
  for (const auto &v : variants) {
    std::snprintf(line, sizeof line, "%-16s %10zu %14.2f %15.2f %10.2f %10.2f\n",
                  graph::variant_name(v.variant), v.vocabulary, v.operand_nodes,
                  v.dataflow_edges, v.nodes, v.edges);
    out += line;
  }
  return out;
}

} // namespace seed::pipeline
