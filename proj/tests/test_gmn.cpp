// Licensed under the Apache License, Version 2.0.
// SPDX-License-Identifier: Apache-2.0

#include "seed/error.hpp"
#include "seed/gmn.hpp"
#include "seed/training.hpp"

#include "support/gradcheck.hpp"
#include "support/random_ir.hpp"

#include <doctest.h>

#include <cmath>

using namespace seed;
using namespace seed::gmn;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

double sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }

MatrixXd rows(std::initializer_list<std::initializer_list<double>> r) {
  MatrixXd m(static_cast<Eigen::Index>(r.size()),
             static_cast<Eigen::Index>(r.begin()->size()));
  Eigen::Index i = 0;
  for (const auto &row : r) {
    Eigen::Index j = 0;
    for (double v : row)
      m(i, j++) = v;
    ++i;
  }
  return m;
}

GraphInput path3() {
  return {{0, 1, 2},
          {{0, 1, graph::EdgeType::Data}, {1, 2, graph::EdgeType::Control}}};
}

} // namespace

TEST_SUITE("gmn_core") {

TEST_CASE("messages: isolated nodes and zero edge vectors") {
  auto p = testing::random_params(4, 3, 1);
  MatrixXd h = MatrixXd::Random(3, 3);
  const std::vector<graph::Edge> one = {{0, 1, graph::EdgeType::Data}};
  const MatrixXd m = message_pass(h, one, p);
  CHECK(m.row(2).norm() == 0.0); // node 2 touches no edge
  CHECK(m.row(1).norm() > 0.0);

  p.edge.setZero();
  CHECK(message_pass(h, one, p).norm() == 0.0);
  CHECK(message_pass(h, {}, testing::random_params(4, 3, 2)).norm() == 0.0);
}

TEST_CASE("messages: hand computation on a three-node path") {
  // One-dimensional states; W_msg = [a b], W_rev = [c e].
  auto p = ModelParams::zeros(3, 1);
  p.msg << 0.5, -1.0;
  p.msg_rev << 2.0, 0.25;
  p.edge << 2.0, -1.0; // data, control
  const MatrixXd h = rows({{1.0}, {2.0}, {3.0}});
  const auto g = path3();
  const MatrixXd m = message_pass(h, g.edges, p);
  // node 0: reverse message over 0->1: 2 * (2*h1 + 0.25*h0)
  CHECK(m(0, 0) == doctest::Approx(8.5).epsilon(1e-15));
  // node 1: forward 0->1: 2 * (0.5*h0 - h1); reverse 1->2: -1 * (2*h2 + 0.25*h1)
  CHECK(m(1, 0) == doctest::Approx(-9.5).epsilon(1e-15));
  // node 2: forward 1->2: -1 * (0.5*h1 - h2)
  CHECK(m(2, 0) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("attention: identical single nodes") {
  const MatrixXd h = rows({{0.3, -0.7, 1.1}});
  const auto att = cross_attention(h, h);
  CHECK(att.alpha_a(0, 0) == 1.0);
  CHECK(att.alpha_b(0, 0) == 1.0);
  CHECK(att.mu_a.norm() == 0.0);
  CHECK(att.mu_b.norm() == 0.0);
}

TEST_CASE("attention: orthogonal inputs attend uniformly") {
  const MatrixXd a = rows({{1, 0, 0, 0}, {0, 2, 0, 0}});
  const MatrixXd b = rows({{0, 0, 3, 0}, {0, 0, 0, 1}, {0, 0, 1, 1}});
  const auto att = cross_attention(a, b);
  for (Eigen::Index i = 0; i < 2; ++i)
    for (Eigen::Index k = 0; k < 3; ++k)
      CHECK(att.alpha_a(i, k) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  for (Eigen::Index k = 0; k < 3; ++k)
    for (Eigen::Index i = 0; i < 2; ++i)
      CHECK(att.alpha_b(k, i) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("attention: hand computation") {
  const MatrixXd a = rows({{1, 0}});
  const MatrixXd b = rows({{1, 0}, {0, 1}});
  const auto att = cross_attention(a, b);
  const double e = std::exp(1.0);
  CHECK(att.alpha_a(0, 0) == doctest::Approx(e / (e + 1)));
  CHECK(att.alpha_a(0, 1) == doctest::Approx(1 / (e + 1)));
  CHECK(att.mu_a(0, 0) == doctest::Approx(1 / (e + 1)));
  CHECK(att.mu_a(0, 1) == doctest::Approx(-1 / (e + 1)));
  CHECK(att.alpha_b(0, 0) == 1.0);
  CHECK(att.alpha_b(1, 0) == 1.0);
  CHECK(att.mu_b.row(0).norm() == 0.0);
  CHECK(att.mu_b(1, 0) == doctest::Approx(-1.0));
  CHECK(att.mu_b(1, 1) == doctest::Approx(1.0));
}

TEST_CASE("attention: zero vectors and large magnitudes stay finite") {
  const MatrixXd a = rows({{0, 0, 0}, {1e200, -1e200, 1e200}});
  const MatrixXd b = rows({{1e-300, 0, 0}, {3, 4, 5}});
  const auto att = cross_attention(a, b);
  CHECK(att.alpha_a.allFinite());
  CHECK(att.alpha_b.allFinite());
  for (Eigen::Index i = 0; i < 2; ++i)
    CHECK(att.alpha_a.row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(att.alpha_a(0, 0) == doctest::Approx(0.5)); // zero row: cosine 0 everywhere
}

TEST_CASE("node update: zero parameters halve the state") {
  const auto p = ModelParams::zeros(2, 4);
  const MatrixXd h = MatrixXd::Random(3, 4);
  const MatrixXd out = node_update(h, MatrixXd::Random(3, 4), MatrixXd::Random(3, 4), p);
  CHECK((out - 0.5 * h).norm() == doctest::Approx(0.0));
}

TEST_CASE("node update: one-dimensional hand computation") {
  auto p = ModelParams::zeros(1, 1);
  p.gru_wz << 0.2, -0.4;
  p.gru_uz << 0.3;
  p.gru_bz << 0.1;
  p.gru_wr << -0.5, 0.6;
  p.gru_ur << 0.7;
  p.gru_br << -0.2;
  p.gru_wn << 0.9, 0.8;
  p.gru_un << -1.1;
  p.gru_bn << 0.05;
  const double h = 0.6, m = -0.3, mu = 0.4;
  const double z = sig(0.2 * m - 0.4 * mu + 0.3 * h + 0.1);
  const double r = sig(-0.5 * m + 0.6 * mu + 0.7 * h - 0.2);
  const double n = std::tanh(0.9 * m + 0.8 * mu - 1.1 * (r * h) + 0.05);
  const double expected = (1 - z) * n + z * h;
  const MatrixXd out =
      node_update(MatrixXd::Constant(1, 1, h), MatrixXd::Constant(1, 1, m),
                  MatrixXd::Constant(1, 1, mu), p);
  CHECK(out(0, 0) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("node update: repeated updates converge") {
  auto p = testing::random_params(2, 6, 4, 0.0);
  for (auto &t : p.tensors())
    t.matrix() *= 0.2;
  MatrixXd h = MatrixXd::Random(5, 6);
  const MatrixXd m = MatrixXd::Random(5, 6) * 0.1, mu = MatrixXd::Random(5, 6) * 0.1;
  double last = INFINITY;
  for (int k = 0; k < 200; ++k) {
    const MatrixXd next = node_update(h, m, mu, p);
    last = (next - h).norm();
    h = next;
  }
  CHECK(last < 1e-10);
}

TEST_CASE("readout: single node and duplicated nodes") {
  const auto p = testing::random_params(2, 5, 8);
  const MatrixXd h = MatrixXd::Random(1, 5);
  auto graph_net = [&](const VectorXd &pooled) -> VectorXd {
    const VectorXd hidden = (p.out1_w * pooled + p.out1_b).array().tanh().matrix();
    return p.out2_w * hidden + p.out2_b;
  };
  VectorXd pooled(5);
  for (Eigen::Index k = 0; k < 5; ++k) {
    const double gate = sig(p.gate_w.row(k).dot(h.row(0)) + p.gate_b(k));
    pooled(k) = gate * (p.proj_w.row(k).dot(h.row(0)) + p.proj_b(k));
  }
  CHECK((readout(h, p) - graph_net(pooled)).norm() < 1e-12);

  MatrixXd doubled(2, 5);
  doubled << h, h;
  CHECK((readout(doubled, p) - graph_net(2.0 * pooled)).norm() < 1e-12);
}

TEST_CASE("readout: permutation invariance") {
  const auto p = testing::random_params(2, 6, 9);
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const MatrixXd h = MatrixXd::Random(7, 6);
    std::vector<Eigen::Index> perm(7);
    for (Eigen::Index i = 0; i < 7; ++i)
      perm[static_cast<std::size_t>(i)] = i;
    rng.shuffle(perm);
    MatrixXd ph(7, 6);
    for (Eigen::Index i = 0; i < 7; ++i)
      ph.row(i) = h.row(perm[static_cast<std::size_t>(i)]);
    CHECK((readout(h, p) - readout(ph, p)).norm() < 1e-12);
  }
}

TEST_CASE("cosine guards zero vectors") {
  VectorXd z = VectorXd::Zero(3), v(3), w(3);
  v << 1, 2, 3;
  w << -2, 0, 1;
  CHECK(cosine(z, v) == 0.0);
  CHECK(cosine(VectorXd::Constant(3, 1e-13), v) == 0.0);
  CHECK(cosine(v, v) == doctest::Approx(1.0));
  CHECK(cosine(v, w) == doctest::Approx(1.0 / std::sqrt(14.0 * 5.0)));
}

TEST_CASE("pair forward invariants") {
  Rng rng(77);
  for (int trial = 0; trial < 30; ++trial) {
    const auto p = testing::random_params(12, 8, 100 + static_cast<std::uint64_t>(trial));
    const auto a = testing::random_graph(rng, 2 + rng.below(9), 12);
    const auto b = testing::random_graph(rng, 2 + rng.below(9), 12);
    CHECK(forward_pair(a, a, p, 5).similarity == doctest::Approx(1.0).epsilon(1e-9));
    const double ab = forward_pair(a, b, p, 5).similarity;
    CHECK(forward_pair(b, a, p, 5).similarity == doctest::Approx(ab).epsilon(1e-12));
    CHECK(std::abs(ab) <= 1.0 + 1e-12);
    const auto pa = testing::permute_graph(rng, a);
    CHECK(forward_pair(pa, b, p, 5).similarity == doctest::Approx(ab).epsilon(1e-9));
  }
}

TEST_CASE("pair forward state history") {
  const auto p = testing::random_params(4, 4, 1);
  PairState state;
  const auto g = path3();
  forward_pair(g, g, p, 3, state);
  CHECK(state.iterations() == 3);
  CHECK(state.states_a.size() == 4);
  CHECK(state.states_a.back().rows() == 3);
}

TEST_CASE("empty graphs are rejected") {
  const auto p = testing::random_params(4, 4, 1);
  const GraphInput empty;
  CHECK_THROWS_AS(forward_pair(empty, path3(), p, 5), Error);
  try {
    forward_pair(path3(), empty, p, 5);
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::EmptyGraph);
  }
  GraphInput bad = path3();
  bad.tokens[0] = 99;
  CHECK_THROWS_AS(forward_pair(bad, path3(), p, 5), Error);
}

TEST_CASE("gradient matches central differences") {
  Rng rng(4242);
  for (int trial = 0; trial < 8; ++trial) {
    const std::size_t vocab = 6;
    const auto p = testing::random_params(vocab, 4, 500 + static_cast<std::uint64_t>(trial));
    const auto a = testing::random_graph(rng, 3 + rng.below(6), vocab);
    const auto b = testing::random_graph(rng, 3 + rng.below(6), vocab);
    const auto r = testing::check_similarity_gradient(a, b, p, 1 + rng.below(5));
    CAPTURE(trial);
    CHECK(r.analytic_norm > 1e-6);
    CHECK(r.relative_error < 1e-5);
    CHECK(r.worst_entry < 1e-3);
  }
}

TEST_CASE("pair loss gradient scales the similarity gradient") {
  const auto p = testing::random_params(5, 4, 61);
  Rng rng(5);
  const auto a = testing::random_graph(rng, 5, 5), b = testing::random_graph(rng, 4, 5);
  const double s = forward_pair(a, b, p, 3).similarity;
  // Margin chosen so the clone hinge is active.
  const double margin = s + 0.5;
  auto g_loss = ModelParams::zeros(5, 4), g_sim = ModelParams::zeros(5, 4);
  const double loss = backward_pair(a, b, true, margin, p, 3, g_loss);
  backward_similarity(a, b, p, 3, 1.0, g_sim);
  CHECK(loss == doctest::Approx(0.5));
  g_loss.add_scaled(g_sim, 1.0); // d(loss)/d(params) = -d(s)/d(params)
  for (const auto &t : g_loss.tensors())
    CHECK(t.matrix().norm() < 1e-12);
}

TEST_CASE("zero-loss pairs produce zero gradients") {
  const auto p = testing::random_params(5, 4, 62);
  Rng rng(6);
  const auto a = testing::random_graph(rng, 5, 5);
  auto g = ModelParams::zeros(5, 4);
  CHECK(backward_pair(a, a, true, 0.5, p, 5, g) == 0.0);
  for (const auto &t : g.tensors())
    CHECK(t.matrix().norm() == 0.0);
}

TEST_CASE("unused vocabulary rows get zero gradient") {
  const auto p = testing::random_params(10, 4, 63);
  const GraphInput a{{1, 2, 2}, {{0, 1, graph::EdgeType::Data}}};
  const GraphInput b{{2, 3}, {{1, 0, graph::EdgeType::Control}}};
  auto g = ModelParams::zeros(10, 4);
  backward_similarity(a, b, p, 5, 1.0, g);
  for (Eigen::Index row : {0, 4, 5, 6, 7, 8, 9})
    CHECK(g.embedding.row(row).norm() == 0.0);
  for (Eigen::Index row : {1, 2, 3})
    CHECK(g.embedding.row(row).norm() > 0.0);
}

} // TEST_SUITE
