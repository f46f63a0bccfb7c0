// Licensed under the Apache License, Version 2.0.
// SPDX-License-Identifier: Apache-2.0

#include "seed/graph.hpp"

#include "seed/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

namespace seed::graph {

const char *variant_name(Variant v) {
  switch (v) {
  case Variant::Seed: return "seed";
  case Variant::SeedType: return "seed+type";
  case Variant::SeedIdentifier: return "seed+identifier";
  }
  return "?";
}

Variant parse_variant(std::string_view text) {
  if (text == "seed")
    return Variant::Seed;
  if (text == "seed+type")
    return Variant::SeedType;
  if (text == "seed+identifier")
    return Variant::SeedIdentifier;
  throw Error(ErrorCode::InvalidArgument,
              "unknown variant '" + std::string(text) +
                  "' (expected seed, seed+type or seed+identifier)");
}

const char *node_kind_name(NodeKind k) {
  switch (k) {
  case NodeKind::Operation: return "operation";
  case NodeKind::Label: return "label";
  case NodeKind::Constant: return "constant";
  case NodeKind::Input: return "input";
  case NodeKind::Identifier: return "identifier";
  case NodeKind::Datatype: return "datatype";
  }
  return "?";
}

const char *edge_type_name(EdgeType t) {
  return t == EdgeType::Data ? "data" : "control";
}

std::string constant_token(std::string_view literal) {
  if (literal.empty())
    return "@const";
  if (literal.front() == '@')
    return std::string(literal);
  if (literal == "true")
    return "1";
  if (literal == "false")
    return "0";
  if (literal == "poison")
    return "undef";
  long long value = 0;
  auto [ptr, ec] = std::from_chars(literal.data(), literal.data() + literal.size(), value);
  if (ec == std::errc() && ptr == literal.data() + literal.size())
    return (value >= -255 && value <= 255) ? std::to_string(value) : "@int";
  if (ec == std::errc::result_out_of_range)
    return "@int";
  bool numeric = std::isdigit(static_cast<unsigned char>(literal.front())) ||
                 literal.front() == '-';
  if (numeric)
    return "@float";
  return std::string(literal); // null, undef, zeroinitializer, ...
}

namespace {

class GraphBuilder {
public:
  GraphBuilder(const ir::IrFunction &f, Variant variant) : f_(f) {
    g_.function = f.name;
    g_.variant = variant;
  }

  SemanticGraph build() {
    create_nodes();
    add_dataflow_edges();
    add_controlflow_edges();
    finalize_edges();
    return std::move(g_);
  }

private:
  std::size_t add_node(NodeKind kind, std::string token, std::string name = {}) {
    std::size_t id = g_.nodes.size();
    if (name.empty())
      name = token;
    g_.nodes.push_back({id, kind, std::move(token), std::move(name)});
    return id;
  }

  void add_edge(std::size_t src, std::size_t dst, EdgeType t) {
    if (src != dst)
      pending_.push_back({src, dst, t});
  }

  // Node order: inputs, then per block its label followed by each operation,
  // the operation's constants, and (in the extended variants) its value node.
  void create_nodes() {
    for (const auto &p : f_.params)
      input_nodes_[p.name] = add_node(NodeKind::Input, p.dtype);

    for (const auto &block : f_.blocks) {
      std::size_t label = add_node(NodeKind::Label, "label", "label:" + block.label);
      label_nodes_[block.label] = label;
      for (const auto &inst : block.instructions) {
        std::size_t op = add_node(NodeKind::Operation, inst.opcode);
        op_nodes_.push_back(op);
        block_of_op_.push_back(label);
        if (inst.result)
          producers_[*inst.result] = op;

        std::vector<std::size_t> constants;
        for (const auto &operand : inst.operands) {
          if (operand.kind == ir::OperandKind::Constant)
            constants.push_back(
                add_node(NodeKind::Constant, constant_token(operand.name)));
        }
        constant_nodes_.push_back(std::move(constants));

        if (inst.result && g_.variant != Variant::Seed) {
          bool by_type = g_.variant == Variant::SeedType;
          std::size_t v = by_type
                              ? add_node(NodeKind::Datatype, inst.dtype.value_or("void"))
                              : add_node(NodeKind::Identifier, *inst.result);
          value_nodes_[*inst.result] = v;
        }
      }
    }
  }

  void add_dataflow_edges() {
    std::size_t k = 0;
    for (const auto &block : f_.blocks) {
      for (const auto &inst : block.instructions) {
        std::size_t consumer = op_nodes_[k];
        for (std::size_t c : constant_nodes_[k])
          add_edge(c, consumer, EdgeType::Data);
        for (const auto &operand : inst.operands) {
          if (operand.kind == ir::OperandKind::Input) {
            add_edge(input_nodes_.at(operand.name), consumer, EdgeType::Data);
          } else if (operand.kind == ir::OperandKind::Value) {
            if (auto it = producers_.find(operand.name); it != producers_.end())
              add_edge(it->second, consumer, EdgeType::Data);
            if (auto it = value_nodes_.find(operand.name); it != value_nodes_.end())
              add_edge(it->second, consumer, EdgeType::Data);
          }
        }
        ++k;
      }
    }
  }

  void add_controlflow_edges() {
    std::size_t k = 0;
    for (const auto &block : f_.blocks) {
      for (const auto &inst : block.instructions) {
        std::size_t op = op_nodes_[k];
        add_edge(block_of_op_[k], op, EdgeType::Control);
        if (inst.kind == ir::InstrKind::Branch)
          for (const auto &operand : inst.operands)
            if (operand.kind == ir::OperandKind::Label)
              add_edge(op, label_nodes_.at(operand.name), EdgeType::Control);
        ++k;
      }
    }
  }

  void finalize_edges() {
    std::set<Edge> seen;
    for (const auto &e : pending_)
      if (seen.insert(e).second)
        g_.edges.push_back(e);
  }

  const ir::IrFunction &f_;
  SemanticGraph g_;
  std::vector<Edge> pending_;
  std::unordered_map<std::string, std::size_t> input_nodes_, label_nodes_,
      producers_, value_nodes_;
  std::vector<std::size_t> op_nodes_, block_of_op_;
  std::vector<std::vector<std::size_t>> constant_nodes_;
};

} // namespace

SemanticGraph build_graph(const ir::IrFunction &function, Variant variant) {
  return GraphBuilder(function, variant).build();
}

SemanticGraph merge_graphs(const std::vector<SemanticGraph> &parts,
                           std::string name) {
  SemanticGraph out;
  out.function = std::move(name);
  if (!parts.empty())
    out.variant = parts.front().variant;
  for (const auto &g : parts) {
    std::size_t offset = out.nodes.size();
    for (auto n : g.nodes) {
      n.id += offset;
      out.nodes.push_back(std::move(n));
    }
    for (auto e : g.edges) {
      e.src += offset;
      e.dst += offset;
      out.edges.push_back(e);
    }
  }
  return out;
}

SemanticGraph build_module_graph(const std::vector<ir::IrFunction> &functions,
                                 Variant variant, std::string name) {
  std::vector<SemanticGraph> parts;
  parts.reserve(functions.size());
  for (const auto &f : functions)
    parts.push_back(build_graph(f, variant));
  if (parts.size() == 1) {
    parts.front().function = std::move(name);
    return std::move(parts.front());
  }
  return merge_graphs(parts, std::move(name));
}

std::size_t GraphStats::node_count() const {
  std::size_t n = 0;
  for (auto c : nodes_by_kind)
    n += c;
  return n;
}

std::size_t GraphStats::edge_count() const {
  return edges_by_type[0] + edges_by_type[1];
}

std::size_t GraphStats::operand_nodes() const {
  return nodes_of(NodeKind::Identifier) + nodes_of(NodeKind::Datatype) +
         nodes_of(NodeKind::Constant) + nodes_of(NodeKind::Input);
}

GraphStats graph_stats(const SemanticGraph &g) {
  GraphStats s;
  std::set<std::string> tokens;
  for (const auto &n : g.nodes) {
    ++s.nodes_by_kind[static_cast<std::size_t>(n.kind)];
    tokens.insert(n.token);
  }
  for (const auto &e : g.edges)
    ++s.edges_by_type[static_cast<std::size_t>(e.etype)];
  s.distinct_tokens = tokens.size();
  return s;
}

ExportFormat parse_export_format(std::string_view text) {
  if (text == "json")
    return ExportFormat::Json;
  if (text == "dot")
    return ExportFormat::Dot;
  throw Error(ErrorCode::InvalidArgument,
              "unknown format '" + std::string(text) + "' (expected json or dot)");
}

std::string to_json(const SemanticGraph &g) {
  nlohmann::ordered_json doc;
  doc["function"] = g.function;
  doc["variant"] = variant_name(g.variant);
  auto nodes = nlohmann::ordered_json::array();
  for (const auto &n : g.nodes) {
    nlohmann::ordered_json jn;
    jn["id"] = n.id;
    jn["kind"] = node_kind_name(n.kind);
    jn["token"] = n.token;
    if (n.name != n.token)
      jn["name"] = n.name;
    nodes.push_back(std::move(jn));
  }
  auto edges = nlohmann::ordered_json::array();
  for (const auto &e : g.edges) {
    nlohmann::ordered_json je;
    je["src"] = e.src;
    je["dst"] = e.dst;
    je["etype"] = edge_type_name(e.etype);
    edges.push_back(std::move(je));
  }
  doc["nodes"] = std::move(nodes);
  doc["edges"] = std::move(edges);
  return doc.dump() + "\n";
}

namespace {

std::string dot_escape(const std::string &s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\')
      out += '\\';
    out += c;
  }
  return out;
}

const char *dot_shape(NodeKind k) {
  switch (k) {
  case NodeKind::Operation: return "box";
  case NodeKind::Label: return "diamond";
  case NodeKind::Constant: return "ellipse";
  case NodeKind::Input: return "invhouse";
  case NodeKind::Identifier: return "note";
  case NodeKind::Datatype: return "component";
  }
  return "ellipse";
}

} // namespace

std::string to_dot(const SemanticGraph &g) {
  std::ostringstream out;
  out << "digraph \"" << dot_escape(g.function) << "\" {\n";
  out << "  // variant: " << variant_name(g.variant) << "\n";
  for (const auto &n : g.nodes)
    out << "  n" << n.id << " [label=\"" << dot_escape(n.name)
        << "\", shape=" << dot_shape(n.kind) << "];\n";
  for (const auto &e : g.edges) {
    const Node &s = g.nodes[e.src];
    const Node &d = g.nodes[e.dst];
    out << "  n" << e.src << " -> n" << e.dst
        << (e.etype == EdgeType::Data ? " [style=solid, color=black]"
                                      : " [style=dashed, color=blue]")
        << "; // " << s.name << " -> \"" << dot_escape(d.name) << "\"\n";
  }
  out << "}\n";
  return out.str();
}

std::string export_graph(const SemanticGraph &g, ExportFormat format) {
  return format == ExportFormat::Json ? to_json(g) : to_dot(g);
}

} // namespace seed::graph
