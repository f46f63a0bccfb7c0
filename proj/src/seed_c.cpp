// Licensed under the Apache License, Version 2.0.
// SPDX-License-Identifier: Apache-2.0

#include "seed/seed_c.h"

#include "seed/error.hpp"
#include "seed/graph.hpp"
#include "seed/ir.hpp"
#include "seed/pipeline.hpp"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <string>

struct seed_config {
  seed::pipeline::RunConfig config;
};

struct seed_model {
  seed::Checkpoint checkpoint;
};

namespace {

thread_local std::string last_error;

seed_status status_of(seed::ErrorCode code) {
  using seed::ErrorCode;
  switch (code) {
  case ErrorCode::InvalidArgument: return SEED_ERR_INVALID_ARGUMENT;
  case ErrorCode::Io: return SEED_ERR_IO;
  case ErrorCode::MalformedIr: return SEED_ERR_MALFORMED_IR;
  case ErrorCode::UnsupportedInstruction: return SEED_ERR_UNSUPPORTED_INSTRUCTION;
  case ErrorCode::EmptyGraph: return SEED_ERR_EMPTY_GRAPH;
  case ErrorCode::EmptyCorpus: return SEED_ERR_EMPTY_CORPUS;
  case ErrorCode::InsufficientPairs: return SEED_ERR_INSUFFICIENT_PAIRS;
  case ErrorCode::OverlappingSplit: return SEED_ERR_OVERLAPPING_SPLIT;
  case ErrorCode::DegenerateData: return SEED_ERR_DEGENERATE_DATA;
  case ErrorCode::Checkpoint: return SEED_ERR_CHECKPOINT;
  }
  return SEED_ERR_INTERNAL;
}

/// Runs `body`, translating exceptions into status codes and the thread-local
/// error message.
template <typename F> seed_status guarded(F &&body) {
  try {
    last_error.clear();
    body();
    return SEED_OK;
  } catch (const seed::Error &e) {
    last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc &) {
    last_error = "out of memory";
  } catch (const std::exception &e) {
    last_error = std::string("internal error: ") + e.what();
  } catch (...) {
    last_error = "internal error";
  }
  return SEED_ERR_INTERNAL;
}

void require(const void *p, const char *what) {
  if (!p)
    throw seed::Error(seed::ErrorCode::InvalidArgument, std::string(what) + " is NULL");
}

char *copy_out(const std::string &s) {
  char *out = static_cast<char *>(std::malloc(s.size() + 1));
  if (!out)
    throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void set_out(char **out, const std::string &s) {
  if (out)
    *out = copy_out(s);
}

} // namespace

extern "C" {

const char *seed_version(void) { return "0.1.0"; }

const char *seed_status_name(seed_status status) {
  switch (status) {
  case SEED_OK: return "ok";
  case SEED_ERR_INVALID_ARGUMENT: return "invalid argument";
  case SEED_ERR_IO: return "i/o error";
  case SEED_ERR_MALFORMED_IR: return "malformed IR";
  case SEED_ERR_UNSUPPORTED_INSTRUCTION: return "unsupported instruction";
  case SEED_ERR_EMPTY_GRAPH: return "empty graph";
  case SEED_ERR_EMPTY_CORPUS: return "empty corpus";
  case SEED_ERR_INSUFFICIENT_PAIRS: return "insufficient pairs";
  case SEED_ERR_OVERLAPPING_SPLIT: return "overlapping split";
  case SEED_ERR_DEGENERATE_DATA: return "degenerate data";
  case SEED_ERR_CHECKPOINT: return "checkpoint error";
  case SEED_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char *seed_last_error(void) { return last_error.c_str(); }

void seed_string_free(char *s) { std::free(s); }

seed_status seed_parse(const char *ir_text, int strict, const char *format, char **out) {
  return guarded([&] {
    require(ir_text, "ir_text");
    require(out, "out");
    const std::string fmt = format ? format : "ir";
    if (fmt != "ir" && fmt != "json")
      throw seed::Error(seed::ErrorCode::InvalidArgument,
                        "parse format must be 'ir' or 'json', got '" + fmt + "'");
    const auto functions = seed::ir::parse_module(ir_text, {strict != 0});
    *out = copy_out(fmt == "json" ? seed::ir::module_to_json(functions)
                                  : seed::ir::print_module(functions));
  });
}

seed_status seed_graph(const char *ir_text, const char *variant, int strict,
                       const char *format, char **out) {
  return guarded([&] {
    require(ir_text, "ir_text");
    require(out, "out");
    const auto v = seed::graph::parse_variant(variant ? variant : "seed");
    const auto f = seed::graph::parse_export_format(format ? format : "json");
    const auto functions = seed::ir::parse_module(ir_text, {strict != 0});
    if (functions.empty())
      throw seed::Error(seed::ErrorCode::InvalidArgument, "input holds no function definition");
    const std::string name = functions.size() == 1 ? functions.front().name : "module";
    *out = copy_out(seed::graph::export_graph(
        seed::graph::build_module_graph(functions, v, name), f));
  });
}

seed_status seed_stats(const char *corpus_dir, const char *variant, int strict,
                       const char *format, char **out) {
  return guarded([&] {
    require(corpus_dir, "corpus_dir");
    require(out, "out");
    const std::string fmt = format ? format : "table";
    if (fmt != "table" && fmt != "json")
      throw seed::Error(seed::ErrorCode::InvalidArgument,
                        "stats format must be 'table' or 'json', got '" + fmt + "'");
    std::vector<seed::graph::Variant> variants;
    if (variant)
      variants.push_back(seed::graph::parse_variant(variant));
    else
      variants = {seed::graph::Variant::Seed, seed::graph::Variant::SeedType,
                  seed::graph::Variant::SeedIdentifier};
    const auto index = seed::corpus::scan_corpus(corpus_dir, strict != 0);
    const auto stats = seed::pipeline::corpus_stats(index, variants);
    *out = copy_out(fmt == "json" ? stats.to_json() + "\n" : stats.to_table());
  });
}

seed_status seed_config_new(seed_config **out) {
  return guarded([&] {
    require(out, "out");
    *out = new seed_config{};
  });
}

void seed_config_free(seed_config *config) { delete config; }

seed_status seed_config_load(seed_config *config, const char *text) {
  return guarded([&] {
    require(config, "config");
    require(text, "text");
    // Apply to a copy first so a bad file leaves the handle untouched.
    seed::pipeline::RunConfig next = config->config;
    next.apply(text);
    config->config = std::move(next);
  });
}

seed_status seed_config_set(seed_config *config, const char *key, const char *value) {
  return guarded([&] {
    require(config, "config");
    require(key, "key");
    require(value, "value");
    config->config.set(key, value);
  });
}

seed_status seed_config_text(const seed_config *config, char **out) {
  return guarded([&] {
    require(config, "config");
    require(out, "out");
    *out = copy_out(config->config.to_text());
  });
}

seed_status seed_train(const char *corpus_dir, const seed_config *config,
                       const char *checkpoint_path, char **history, char **report) {
  return guarded([&] {
    require(corpus_dir, "corpus_dir");
    require(config, "config");
    require(checkpoint_path, "checkpoint_path");
    const auto outcome = seed::pipeline::run_training(corpus_dir, config->config);
    seed::save_checkpoint(checkpoint_path, outcome.checkpoint);
    set_out(history, outcome.history_text());
    set_out(report, outcome.test_report.to_json());
  });
}

seed_status seed_model_load(const char *checkpoint_path, seed_model **out) {
  return guarded([&] {
    require(checkpoint_path, "checkpoint_path");
    require(out, "out");
    auto model = std::make_unique<seed_model>();
    model->checkpoint = seed::load_checkpoint(checkpoint_path);
    seed::pipeline::config_from_checkpoint(model->checkpoint);
    *out = model.release();
  });
}

void seed_model_free(seed_model *model) { delete model; }

seed_status seed_model_threshold(const seed_model *model, double *out) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    *out = model->checkpoint.threshold;
  });
}

seed_status seed_detect(const seed_model *model, const char *ir_a, const char *ir_b,
                        double *similarity, int *is_clone, char **json) {
  return guarded([&] {
    require(model, "model");
    require(ir_a, "ir_a");
    require(ir_b, "ir_b");
    const auto d = seed::pipeline::detect(model->checkpoint, ir_a, ir_b);
    if (similarity)
      *similarity = d.similarity;
    if (is_clone)
      *is_clone = d.clone ? 1 : 0;
    set_out(json, d.to_json());
  });
}

seed_status seed_evaluate(const seed_model *model, const char *corpus_dir,
                          const char *split, char **report) {
  return guarded([&] {
    require(model, "model");
    require(corpus_dir, "corpus_dir");
    require(report, "report");
    *report = copy_out(seed::pipeline::run_evaluation(corpus_dir, model->checkpoint,
                                                      split ? split : "test")
                           .to_json());
  });
}

} // extern "C"
