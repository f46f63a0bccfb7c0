// Licensed under the Apache License, Version 2.0.
// SPDX-License-Identifier: Apache-2.0

// Command-line front end. Everything goes through the C API.

#include "seed/seed_c.h"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

namespace {

constexpr int kOk = 0;
constexpr int kUserError = 1;
constexpr int kInternalError = 2;

struct UserError {
  std::string message;
};

int report(seed_status status) {
  std::cerr << "seed: " << seed_status_name(status) << ": " << seed_last_error() << '\n';
  return status == SEED_ERR_INTERNAL ? kInternalError : kUserError;
}

std::string read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw UserError{"cannot read " + path};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void emit(const std::string &text, const std::string &out_path) {
  if (out_path.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n')
      std::cout << '\n';
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out || !(out << text))
    throw UserError{"cannot write " + out_path};
}

/// Takes ownership of a library string.
std::string take(char *s) {
  std::string out = s ? s : "";
  seed_string_free(s);
  return out;
}

struct Options {
  std::string input;
  std::string input_b;
  std::string checkpoint;
  std::string variant;
  std::string format;
  std::string config_path;
  std::string out;
  std::string history;
  std::string split = "test";
  std::optional<unsigned long long> seed;
  bool strict = false;
};

int run_parse(const Options &o) {
  const std::string text = read_file(o.input);
  char *out = nullptr;
  if (seed_status st = seed_parse(text.c_str(), o.strict,
                                  o.format.empty() ? "ir" : o.format.c_str(), &out))
    return report(st);
  emit(take(out), o.out);
  return kOk;
}

int run_graph(const Options &o) {
  const std::string text = read_file(o.input);
  char *out = nullptr;
  if (seed_status st =
          seed_graph(text.c_str(), o.variant.empty() ? "seed" : o.variant.c_str(), o.strict,
                     o.format.empty() ? "json" : o.format.c_str(), &out))
    return report(st);
  emit(take(out), o.out);
  return kOk;
}

int run_train(const Options &o) {
  seed_config *config = nullptr;
  if (seed_status st = seed_config_new(&config))
    return report(st);
  std::unique_ptr<seed_config, decltype(&seed_config_free)> guard(config, seed_config_free);

  if (!o.config_path.empty())
    if (seed_status st = seed_config_load(config, read_file(o.config_path).c_str()))
      return report(st);
  // Flags override the config file.
  if (o.seed)
    if (seed_status st = seed_config_set(config, "seed", std::to_string(*o.seed).c_str()))
      return report(st);
  if (!o.variant.empty())
    if (seed_status st = seed_config_set(config, "variant", o.variant.c_str()))
      return report(st);
  if (o.strict)
    if (seed_status st = seed_config_set(config, "strict", "true"))
      return report(st);

  char *history = nullptr, *report_json = nullptr;
  if (seed_status st =
          seed_train(o.input.c_str(), config, o.out.c_str(), &history, &report_json))
    return report(st);
  const std::string history_text = take(history);
  emit(history_text, o.history.empty() ? o.out + ".history" : o.history);
  emit(take(report_json), "");
  return kOk;
}

int run_eval(const Options &o) {
  seed_model *model = nullptr;
  if (seed_status st = seed_model_load(o.checkpoint.c_str(), &model))
    return report(st);
  std::unique_ptr<seed_model, decltype(&seed_model_free)> guard(model, seed_model_free);
  char *out = nullptr;
  if (seed_status st = seed_evaluate(model, o.input.c_str(), o.split.c_str(), &out))
    return report(st);
  emit(take(out), o.out);
  return kOk;
}

int run_detect(const Options &o) {
  seed_model *model = nullptr;
  if (seed_status st = seed_model_load(o.checkpoint.c_str(), &model))
    return report(st);
  std::unique_ptr<seed_model, decltype(&seed_model_free)> guard(model, seed_model_free);
  const std::string a = read_file(o.input);
  const std::string b = read_file(o.input_b);
  char *out = nullptr;
  if (seed_status st = seed_detect(model, a.c_str(), b.c_str(), nullptr, nullptr, &out))
    return report(st);
  emit(take(out), o.out);
  return kOk;
}

int run_stats(const Options &o) {
  char *out = nullptr;
  if (seed_status st =
          seed_stats(o.input.c_str(), o.variant.empty() ? nullptr : o.variant.c_str(),
                     o.strict, o.format.empty() ? "table" : o.format.c_str(), &out))
    return report(st);
  emit(take(out), o.out);
  return kOk;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Semantic-graph clone detection over LLVM IR"};
  app.set_version_flag("--version", std::string(seed_version()));
  app.require_subcommand(1);
  Options o;

  const auto variants = CLI::IsMember({"seed", "seed+type", "seed+identifier"});

  auto *parse = app.add_subcommand("parse", "Parse an IR file and print its canonical form");
  parse->add_option("file", o.input, "IR file")->required();
  parse->add_flag("--strict", o.strict, "Fail on unsupported instructions");
  parse->add_option("--format", o.format, "Output format")
      ->check(CLI::IsMember({"ir", "json"}));
  parse->add_option("--out", o.out, "Write output to a file");

  auto *graph = app.add_subcommand("graph", "Build and export the semantic graph of an IR file");
  graph->add_option("file", o.input, "IR file")->required();
  graph->add_option("--variant", o.variant, "Graph variant")->check(variants);
  graph->add_flag("--strict", o.strict, "Fail on unsupported instructions");
  graph->add_option("--format", o.format, "Export format")
      ->check(CLI::IsMember({"json", "dot"}));
  graph->add_option("--out", o.out, "Write output to a file");

  auto *train = app.add_subcommand("train", "Train a model on a corpus directory");
  train->add_option("corpus", o.input, "Corpus root")->required();
  train->add_option("--out", o.out, "Checkpoint path")->required();
  train->add_option("--config", o.config_path, "key=value configuration file");
  train->add_option("--seed", o.seed, "Random seed");
  train->add_option("--variant", o.variant, "Graph variant")->check(variants);
  train->add_flag("--strict", o.strict, "Fail on unparseable snippets");
  train->add_option("--history", o.history, "History file (default <out>.history)");

  auto *eval = app.add_subcommand("eval", "Evaluate a checkpoint on a corpus split");
  eval->add_option("checkpoint", o.checkpoint, "Checkpoint path")->required();
  eval->add_option("corpus", o.input, "Corpus root")->required();
  eval->add_option("--split", o.split, "Split to evaluate")
      ->check(CLI::IsMember({"train", "val", "test"}));
  eval->add_option("--out", o.out, "Write the report to a file");

  auto *detect = app.add_subcommand("detect", "Score two IR files for similarity");
  detect->add_option("checkpoint", o.checkpoint, "Checkpoint path")->required();
  detect->add_option("first", o.input, "First IR file")->required();
  detect->add_option("second", o.input_b, "Second IR file")->required();
  detect->add_option("--out", o.out, "Write output to a file");

  auto *stats = app.add_subcommand("stats", "Graph statistics of a corpus per variant");
  stats->add_option("corpus", o.input, "Corpus root")->required();
  stats->add_option("--variant", o.variant, "Restrict to one variant")->check(variants);
  stats->add_flag("--strict", o.strict, "Fail on unparseable snippets");
  stats->add_option("--format", o.format, "Output format")
      ->check(CLI::IsMember({"table", "json"}));
  stats->add_option("--out", o.out, "Write output to a file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUserError;
  }

  try {
    if (*parse)
      return run_parse(o);
    if (*graph)
      return run_graph(o);
    if (*train)
      return run_train(o);
    if (*eval)
      return run_eval(o);
    if (*detect)
      return run_detect(o);
    if (*stats)
      return run_stats(o);
  } catch (const UserError &e) {
    std::cerr << "seed: " << e.message << '\n';
    return kUserError;
  } catch (const std::exception &e) {
    std::cerr << "seed: internal error: " << e.what() << '\n';
    return kInternalError;
  }
  return kInternalError;
}
