// Licensed under the Apache License, Version 2.0.
// SPDX-License-Identifier: Apache-2.0

// Random well-formed IR functions and random network inputs for property
// tests.

#ifndef SEED_TESTS_RANDOM_IR_HPP
#define SEED_TESTS_RANDOM_IR_HPP

#include "seed/gmn.hpp"
#include "seed/rng.hpp"

#include <string>
#include <vector>

namespace seed::testing {

/// A random function over i32/i64 values: parameters, phis, arithmetic,
/// comparisons, selects, stack memory, external calls and branches between
/// 1-5 blocks. Every value is defined once and every branch target exists.
inline std::string random_function(Rng &rng, const std::string &name = "f") {
  const std::size_t n_blocks = 1 + rng.below(5);
  const std::size_t n_params = rng.below(4);
  std::vector<std::string> labels = {"entry"};
  for (std::size_t b = 1; b < n_blocks; ++b)
    labels.push_back("b" + std::to_string(b));

  std::vector<std::string> ints; // i32 operands available
  std::string header = "define i32 @" + name + "(";
  for (std::size_t p = 0; p < n_params; ++p) {
    header += (p ? ", " : "") + std::string("i32 %p") + std::to_string(p);
    ints.push_back("%p" + std::to_string(p));
  }
  header += ") {\n";

  std::size_t next = 0;
  auto fresh = [&] { return "%t" + std::to_string(next++); };
  auto constant = [&] { return std::to_string(static_cast<int>(rng.below(600)) - 300); };
  auto operand = [&] {
    if (ints.empty() || rng.below(4) == 0)
      return constant();
    return ints[rng.below(ints.size())];
  };
  static const char *binops[] = {"add", "sub", "mul", "sdiv", "and", "or", "xor", "shl"};
  static const char *preds[] = {"eq", "ne", "slt", "sgt", "sle", "uge"};
  static const char *callees[] = {"ext_a", "ext_b", "printf_like"};

  std::string body;
  for (std::size_t b = 0; b < n_blocks; ++b) {
    body += (b ? "\n" : "") + labels[b] + ":\n";
    if (b > 0 && rng.below(2)) {
      // Incoming values are parameters or constants, so they dominate.
      std::string phi = fresh();
      std::string pred_label = labels[rng.below(b)];
      std::string value = n_params ? "%p" + std::to_string(rng.below(n_params)) : constant();
      body += "  " + phi + " = phi i32 [ " + value + ", %" + pred_label + " ]\n";
      ints.push_back(phi);
    }
    const std::size_t n_inst = rng.below(6);
    std::vector<std::string> bools;
    for (std::size_t i = 0; i < n_inst; ++i) {
      const std::string r = fresh();
      switch (rng.below(6)) {
      case 0:
      case 1:
        body += "  " + r + " = " + binops[rng.below(8)] + " i32 " + operand() + ", " +
                operand() + "\n";
        ints.push_back(r);
        break;
      case 2:
        body += "  " + r + " = icmp " + preds[rng.below(6)] + " i32 " + operand() + ", " +
                operand() + "\n";
        bools.push_back(r);
        break;
      case 3:
        if (!bools.empty()) {
          body += "  " + r + " = select i1 " + bools[rng.below(bools.size())] + ", i32 " +
                  operand() + ", i32 " + operand() + "\n";
          ints.push_back(r);
        } else {
          body += "  " + r + " = call i32 @" + callees[rng.below(3)] + "(i32 " + operand() +
                  ")\n";
          ints.push_back(r);
        }
        break;
      case 4: {
        const std::string slot = r;
        body += "  " + slot + " = alloca i32, align 4\n";
        body += "  store i32 " + operand() + ", ptr " + slot + ", align 4\n";
        const std::string loaded = fresh();
        body += "  " + loaded + " = load i32, ptr " + slot + ", align 4\n";
        ints.push_back(loaded);
        break;
      }
      default:
        body += "  " + r + " = call i32 @" + callees[rng.below(3)] + "(i32 " + operand() +
                ", i32 " + operand() + ")\n";
        ints.push_back(r);
        break;
      }
    }
    // Values defined here may not dominate other blocks; keep them local.
    const std::size_t choice = rng.below(3);
    if (b + 1 == n_blocks || choice == 0) {
      body += "  ret i32 " + operand() + "\n";
    } else if (choice == 1 || bools.empty()) {
      body += "  br label %" + labels[b + 1 + rng.below(n_blocks - b - 1)] + "\n";
    } else {
      body += "  br i1 " + bools.back() + ", label %" +
              labels[b + 1 + rng.below(n_blocks - b - 1)] + ", label %" +
              labels[rng.below(n_blocks)] + "\n";
    }
    ints.resize(std::min(ints.size(), n_params));
  }
  return header + body + "}\n";
}

/// A random graph input with `nodes` nodes over `vocab` tokens and random
/// typed edges (no self-loops, no duplicates).
inline gmn::GraphInput random_graph(Rng &rng, std::size_t nodes, std::size_t vocab,
                                    double edge_prob = 0.35) {
  gmn::GraphInput g;
  for (std::size_t i = 0; i < nodes; ++i)
    g.tokens.push_back(static_cast<std::size_t>(rng.below(vocab)));
  for (std::size_t s = 0; s < nodes; ++s)
    for (std::size_t d = 0; d < nodes; ++d)
      if (s != d && rng.unit() < edge_prob)
        g.edges.push_back({s, d, rng.below(2) ? graph::EdgeType::Data : graph::EdgeType::Control});
  return g;
}

/// The same graph with nodes relabelled by a random permutation.
inline gmn::GraphInput permute_graph(Rng &rng, const gmn::GraphInput &g) {
  std::vector<std::size_t> perm(g.node_count());
  for (std::size_t i = 0; i < perm.size(); ++i)
    perm[i] = i;
  rng.shuffle(perm);
  gmn::GraphInput out;
  out.tokens.resize(g.node_count());
  for (std::size_t i = 0; i < perm.size(); ++i)
    out.tokens[perm[i]] = g.tokens[i];
  for (const auto &e : g.edges)
    out.edges.push_back({perm[e.src], perm[e.dst], e.etype});
  rng.shuffle(out.edges);
  return out;
}

} // namespace seed::testing

#endif // SEED_TESTS_RANDOM_IR_HPP
