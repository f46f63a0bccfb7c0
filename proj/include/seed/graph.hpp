// Licensed under the Apache License, Version 2.0.
// SPDX-License-Identifier: Apache-2.0

#ifndef SEED_GRAPH_HPP
#define SEED_GRAPH_HPP

#include "seed/ir.hpp"

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace seed::graph {

/// Which node classes the graph carries beyond operations, labels, constants
/// and inputs. `Seed` is the operation-centric default; the other two add one
/// node per SSA value, tokenized by type or by name.
enum class Variant { Seed, SeedType, SeedIdentifier };

const char *variant_name(Variant v);
/// Accepts `seed`, `seed+type`, `seed+identifier`.
Variant parse_variant(std::string_view text);

enum class NodeKind { Operation, Label, Constant, Input, Identifier, Datatype };
inline constexpr std::size_t kNodeKindCount = 6;

const char *node_kind_name(NodeKind k);

enum class EdgeType { Data = 0, Control = 1 };
inline constexpr std::size_t kEdgeTypeCount = 2;

const char *edge_type_name(EdgeType t);

struct Node {
  std::size_t id = 0;
  NodeKind kind = NodeKind::Operation;
  /// Embedding token. Label nodes share the token `label`; the block name is
  /// kept in `name` only.
  std::string token;
  /// Human-readable name (`label:3` for labels, the token otherwise).
  std::string name;

  friend bool operator==(const Node &, const Node &) = default;
};

struct Edge {
  std::size_t src = 0;
  std::size_t dst = 0;
  EdgeType etype = EdgeType::Data;

  friend auto operator<=>(const Edge &, const Edge &) = default;
};

struct SemanticGraph {
  std::string function;
  Variant variant = Variant::Seed;
  std::vector<Node> nodes;
  std::vector<Edge> edges;

  bool empty() const { return nodes.empty(); }

  friend bool operator==(const SemanticGraph &, const SemanticGraph &) = default;
};

/// Maps an IR constant literal to its node token: small integers keep their
/// value, everything else collapses to `@int`, `@float` or `@str`.
std::string constant_token(std::string_view literal);

SemanticGraph build_graph(const ir::IrFunction &function, Variant variant);

/// Concatenates graphs into one, offsetting node ids. Used for files holding
/// several functions.
SemanticGraph merge_graphs(const std::vector<SemanticGraph> &parts,
                           std::string name);

/// Builds the graph for every function of a module and merges them.
SemanticGraph build_module_graph(const std::vector<ir::IrFunction> &functions,
                                 Variant variant, std::string name);

struct GraphStats {
  std::array<std::size_t, kNodeKindCount> nodes_by_kind{};
  std::array<std::size_t, kEdgeTypeCount> edges_by_type{};
  std::size_t distinct_tokens = 0;

  std::size_t node_count() const;
  std::size_t edge_count() const;
  /// Identifier, datatype, constant and input nodes.
  std::size_t operand_nodes() const;
  std::size_t dataflow_edges() const { return edges_by_type[0]; }
  std::size_t nodes_of(NodeKind k) const {
    return nodes_by_kind[static_cast<std::size_t>(k)];
  }
};

GraphStats graph_stats(const SemanticGraph &g);

enum class ExportFormat { Json, Dot };
ExportFormat parse_export_format(std::string_view text);

std::string export_graph(const SemanticGraph &g, ExportFormat format);
std::string to_json(const SemanticGraph &g);
std::string to_dot(const SemanticGraph &g);

} // namespace seed::graph

#endif // SEED_GRAPH_HPP
