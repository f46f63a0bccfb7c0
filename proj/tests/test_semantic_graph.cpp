// Licensed under the Apache License, Version 2.0.
// SPDX-License-Identifier: Apache-2.0

#include "seed/error.hpp"
#include "seed/graph.hpp"
#include "seed/ir.hpp"

#include "support/fixtures.hpp"
#include "support/graph_oracle.hpp"
#include "support/random_ir.hpp"

#include <doctest.h>
#include <json.hpp>

#include <algorithm>
#include <map>
#include <set>

using namespace seed;
using namespace seed::graph;

namespace {

SemanticGraph fixture_graph(const std::string &name, Variant v = Variant::Seed) {
  return build_module_graph(ir::parse_module(testing::read_fixture(name), {true}), v,
                            name);
}

/// Edge present between two nodes identified by display name.
bool has_edge(const SemanticGraph &g, const std::string &src, const std::string &dst,
              EdgeType t) {
  return std::any_of(g.edges.begin(), g.edges.end(), [&](const Edge &e) {
    return e.etype == t && g.nodes[e.src].name == src && g.nodes[e.dst].name == dst;
  });
}

std::multiset<std::string> tokens_of(const SemanticGraph &g, NodeKind k) {
  std::multiset<std::string> out;
  for (const auto &n : g.nodes)
    if (n.kind == k)
      out.insert(n.token);
  return out;
}

} // namespace

TEST_SUITE("semantic_graph") {

TEST_CASE("every fixture matches its hand-derived oracle") {
  std::size_t checked = 0;
  for (const auto &entry : std::filesystem::directory_iterator(testing::fixture_dir())) {
    const std::string file = entry.path().filename().string();
    if (entry.path().extension() != ".oracle")
      continue;
    // <fixture>.<variant>.oracle
    const std::string stem = entry.path().stem().string();
    const auto dot = stem.find('.');
    const std::string fixture = stem.substr(0, dot) + ".ll";
    const Variant v = parse_variant(stem.substr(dot + 1));
    CAPTURE(file);
    const auto mismatch = testing::match_oracle(
        fixture_graph(fixture, v), testing::parse_oracle(testing::read_file(entry.path())));
    CHECK_MESSAGE(!mismatch, mismatch.value_or(""));
    ++checked;
  }
  CHECK(checked >= 15);
}

TEST_CASE("oracle matcher rejects perturbed oracles") {
  const auto g = fixture_graph("sum_loop.ll");
  const auto oracle = testing::parse_oracle(testing::read_fixture("sum_loop.seed.oracle"));
  REQUIRE_FALSE(testing::match_oracle(g, oracle));

  auto dropped = oracle;
  dropped.edges.pop_back();
  CHECK(testing::match_oracle(g, dropped));

  // Same counts, one edge redirected between two phi nodes.
  auto rewired = oracle;
  for (auto &e : rewired.edges)
    if (oracle.nodes[e.src].name == "phi_s" && oracle.nodes[e.dst].name == "pf") {
      for (std::size_t i = 0; i < oracle.nodes.size(); ++i)
        if (oracle.nodes[i].name == "phi_i")
          e.src = i;
    }
  CHECK(testing::match_oracle(g, rewired));

  auto retyped = oracle;
  retyped.edges.front().etype = EdgeType::Control;
  CHECK(testing::match_oracle(g, retyped));

  auto renamed = oracle;
  renamed.nodes.front().token = "i64";
  CHECK(testing::match_oracle(g, renamed));
}

TEST_CASE("loop function under the base variant") {
  const auto g = fixture_graph("sum_loop.ll");
  CHECK(tokens_of(g, NodeKind::Operation) ==
        std::multiset<std::string>{"phi", "phi", "icmp.sgt", "add", "add", "br", "br", "br",
                                   "printf", "ret"});
  CHECK(tokens_of(g, NodeKind::Label).size() == 4);
  CHECK(tokens_of(g, NodeKind::Input) == std::multiset<std::string>{"i32"});
  CHECK(tokens_of(g, NodeKind::Identifier).empty());
  CHECK(tokens_of(g, NodeKind::Datatype).empty());

  CHECK(has_edge(g, "phi", "icmp.sgt", EdgeType::Data));
  CHECK(has_edge(g, "phi", "printf", EdgeType::Data));
  CHECK(has_edge(g, "0", "icmp.sgt", EdgeType::Data));
  CHECK(has_edge(g, "br", "label:3", EdgeType::Control));
  CHECK(has_edge(g, "br", "label:7", EdgeType::Control));
  CHECK(has_edge(g, "label:3", "add", EdgeType::Control));
  CHECK(has_edge(g, "label:3", "br", EdgeType::Control));
  CHECK_FALSE(has_edge(g, "label:3", "phi", EdgeType::Control));
}

TEST_CASE("single return block") {
  const auto g = fixture_graph("ret_zero.ll");
  const auto s = graph_stats(g);
  CHECK(s.nodes_of(NodeKind::Label) == 1);
  CHECK(s.nodes_of(NodeKind::Operation) == 1);
  CHECK(s.nodes_of(NodeKind::Constant) == 1);
  CHECK(s.edge_count() == 2);
}

TEST_CASE("building is deterministic") {
  for (const auto &name : testing::fixture_names()) {
    CAPTURE(name);
    for (Variant v : {Variant::Seed, Variant::SeedType, Variant::SeedIdentifier})
      CHECK(fixture_graph(name, v) == fixture_graph(name, v));
  }
}

TEST_CASE("constant tokens") {
  CHECK(constant_token("0") == "0");
  CHECK(constant_token("-1") == "-1");
  CHECK(constant_token("255") == "255");
  CHECK(constant_token("256") == "@int");
  CHECK(constant_token("-300") == "@int");
  CHECK(constant_token("123456789012345678901234567890") == "@int");
  CHECK(constant_token("2.500000e-01") == "@float");
  CHECK(constant_token("0x3FF0000000000000") == "@float");
  CHECK(constant_token("true") == "1");
  CHECK(constant_token("false") == "0");
  CHECK(constant_token("@str") == "@str");
  CHECK(constant_token("null") == "null");
}

TEST_CASE("statistics") {
  const auto g = fixture_graph("sum_loop.ll", Variant::SeedType);
  const auto s = graph_stats(g);
  CHECK(s.operand_nodes() == s.nodes_of(NodeKind::Identifier) +
                                 s.nodes_of(NodeKind::Datatype) +
                                 s.nodes_of(NodeKind::Constant) + s.nodes_of(NodeKind::Input));
  CHECK(s.node_count() == g.nodes.size());
  CHECK(s.edge_count() == g.edges.size());
  CHECK(s.dataflow_edges() + s.edges_by_type[1] == s.edge_count());

  SemanticGraph bare = g;
  bare.edges.clear();
  const auto e = graph_stats(bare);
  CHECK(e.edge_count() == 0);
  CHECK(e.dataflow_edges() == 0);
  CHECK(e.edges_by_type[1] == 0);
}

TEST_CASE("JSON export follows the schema") {
  const auto g = fixture_graph("sum_loop.ll");
  const auto j = nlohmann::json::parse(to_json(g));
  CHECK(j.at("function") == "sum_loop.ll");
  CHECK(j.at("variant") == "seed");
  REQUIRE(j.at("nodes").size() == g.nodes.size());
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const auto &n = j["nodes"][i];
    CHECK(n.at("id") == i);
    CHECK(n.at("kind") == node_kind_name(g.nodes[i].kind));
    CHECK(n.at("token") == g.nodes[i].token);
  }
  REQUIRE(j.at("edges").size() == g.edges.size());
  for (const auto &e : j["edges"]) {
    CHECK(e.at("src").get<std::size_t>() < g.nodes.size());
    CHECK(e.at("dst").get<std::size_t>() < g.nodes.size());
    const std::string t = e.at("etype");
    CHECK((t == "data" || t == "control"));
  }
  CHECK(to_json(g) == to_json(fixture_graph("sum_loop.ll")));
}

TEST_CASE("DOT export") {
  const auto g = fixture_graph("sum_loop.ll");
  const std::string dot = to_dot(g);
  CHECK(dot.find("digraph") == 0);
  CHECK(dot.find("br -> \"label:3\"") != std::string::npos);
  CHECK(dot == to_dot(fixture_graph("sum_loop.ll")));
  CHECK(export_graph(g, parse_export_format("dot")) == dot);
  CHECK_THROWS_AS(parse_export_format("svg"), Error);
}

TEST_CASE("variant names") {
  for (Variant v : {Variant::Seed, Variant::SeedType, Variant::SeedIdentifier})
    CHECK(parse_variant(variant_name(v)) == v);
  CHECK_THROWS_AS(parse_variant("seed+ast"), Error);
}

TEST_CASE("module graphs merge functions disjointly") {
  const auto fns = ir::parse_module(testing::read_fixture("two_functions.ll"));
  REQUIRE(fns.size() == 2);
  const auto a = build_graph(fns[0], Variant::Seed);
  const auto b = build_graph(fns[1], Variant::Seed);
  const auto merged = build_module_graph(fns, Variant::Seed, "m");
  CHECK(merged.nodes.size() == a.nodes.size() + b.nodes.size());
  CHECK(merged.edges.size() == a.edges.size() + b.edges.size());
  for (const auto &e : merged.edges) {
    const bool left_src = e.src < a.nodes.size(), left_dst = e.dst < a.nodes.size();
    CHECK(left_src == left_dst);
  }
  const auto single = build_module_graph({fns[0]}, Variant::Seed, "only");
  CHECK(single.nodes == a.nodes);
  CHECK(single.function == "only");
}

TEST_CASE("property: structural invariants on random functions") {
  Rng rng(31337);
  for (int trial = 0; trial < 200; ++trial) {
    const std::string text = testing::random_function(rng);
    CAPTURE(text);
    const auto fns = ir::parse_module(text);
    REQUIRE(fns.size() == 1);
    std::size_t results = 0, instructions = fns[0].instruction_count();
    for (const auto &b : fns[0].blocks)
      for (const auto &i : b.instructions)
        results += i.result.has_value();

    const auto base = build_graph(fns[0], Variant::Seed);
    const auto typed = build_graph(fns[0], Variant::SeedType);
    const auto ident = build_graph(fns[0], Variant::SeedIdentifier);
    for (const auto *g : {&base, &typed, &ident}) {
      std::set<Edge> seen;
      std::map<std::size_t, std::size_t> control_in;
      for (const auto &e : g->edges) {
        REQUIRE(e.src < g->nodes.size());
        REQUIRE(e.dst < g->nodes.size());
        CHECK(e.src != e.dst);
        CHECK(seen.insert(e).second);
        if (e.etype == EdgeType::Control && g->nodes[e.src].kind == NodeKind::Label)
          control_in[e.dst]++;
        if (e.etype == EdgeType::Control)
          CHECK((g->nodes[e.src].kind == NodeKind::Label ||
                 g->nodes[e.dst].kind == NodeKind::Label));
      }
      for (const auto &n : g->nodes) {
        CHECK(n.id < g->nodes.size());
        if (n.kind == NodeKind::Operation)
          CHECK(control_in[n.id] == 1); // owned by exactly one block
      }
      CHECK(graph_stats(*g).nodes_of(NodeKind::Operation) == instructions);
      CHECK(graph_stats(*g).nodes_of(NodeKind::Label) == fns[0].blocks.size());
    }
    const auto sb = graph_stats(base), st = graph_stats(typed), si = graph_stats(ident);
    CHECK(sb.nodes_of(NodeKind::Identifier) + sb.nodes_of(NodeKind::Datatype) == 0);
    CHECK(st.nodes_of(NodeKind::Datatype) == results);
    CHECK(si.nodes_of(NodeKind::Identifier) == results);
    CHECK(st.operand_nodes() == sb.operand_nodes() + results);
    CHECK(si.operand_nodes() == st.operand_nodes());
    CHECK(sb.dataflow_edges() <= st.dataflow_edges());
    CHECK(st.dataflow_edges() == si.dataflow_edges());
    CHECK(sb.edges_by_type[1] == st.edges_by_type[1]);
  }
}

} // TEST_SUITE
