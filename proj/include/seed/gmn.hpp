// Licensed under the Apache License, Version 2.0.
// SPDX-License-Identifier: Apache-2.0

#ifndef SEED_GMN_HPP
#define SEED_GMN_HPP

#include "seed/encoding.hpp"
#include "seed/graph.hpp"
#include "seed/model.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace seed::gmn {

/// A semantic graph reduced to what the network reads: vocabulary rows and
/// typed edges.
struct GraphInput {
  std::vector<std::size_t> tokens;
  std::vector<graph::Edge> edges;

  std::size_t node_count() const { return tokens.size(); }
};

GraphInput prepare(const graph::SemanticGraph &g,
                   const encoding::Vocabulary &vocab);

/// m_i = sum over edges j->i of e_type * (W_msg [h_j | h_i]) plus, for the
/// reversed direction, sum over edges i->j of e_type * (W_rev [h_j | h_i]).
Eigen::MatrixXd message_pass(const Eigen::MatrixXd &h,
                             std::span<const graph::Edge> edges,
                             const ModelParams &params);

struct CrossAttention {
  Eigen::MatrixXd mu_a;    ///< |A| x dim
  Eigen::MatrixXd mu_b;    ///< |B| x dim
  Eigen::MatrixXd alpha_a; ///< |A| x |B|, rows sum to one
  Eigen::MatrixXd alpha_b; ///< |B| x |A|, rows sum to one
};

/// Softmax-normalized cosine attention across the two graphs and the
/// attention-weighted differences mu_i = sum_k alpha_ki (h_i - h_k).
CrossAttention cross_attention(const Eigen::MatrixXd &ha,
                               const Eigen::MatrixXd &hb);

/// One GRU step with state `h` and input [m | mu].
Eigen::MatrixXd node_update(const Eigen::MatrixXd &h, const Eigen::MatrixXd &m,
                            const Eigen::MatrixXd &mu, const ModelParams &params);

/// Gated sum of node vectors followed by the graph-level network.
Eigen::VectorXd readout(const Eigen::MatrixXd &h, const ModelParams &params);

/// Cosine similarity; zero when either vector is (numerically) zero.
double cosine(const Eigen::VectorXd &a, const Eigen::VectorXd &b);

struct PairScore {
  Eigen::VectorXd graph_a;
  Eigen::VectorXd graph_b;
  double similarity = 0.0;
};

/// Node states of both graphs for t = 0..T.
struct PairState {
  std::vector<Eigen::MatrixXd> states_a;
  std::vector<Eigen::MatrixXd> states_b;
  std::size_t iterations() const {
    return states_a.empty() ? 0 : states_a.size() - 1;
  }
};

/// Throws Error(EmptyGraph) when either graph has no nodes.
PairScore forward_pair(const GraphInput &a, const GraphInput &b,
                       const ModelParams &params, std::size_t iterations);

PairScore forward_pair(const GraphInput &a, const GraphInput &b,
                       const ModelParams &params, std::size_t iterations,
                       PairState &state);

/// Runs forward and reverse mode for a pair; adds d(objective)/d(params)
/// into `grad`, where d(objective)/d(similarity) = `similarity_grad`.
/// Returns the forward score.
PairScore backward_similarity(const GraphInput &a, const GraphInput &b,
                              const ModelParams &params, std::size_t iterations,
                              double similarity_grad, ModelParams &grad);

/// Forward, margin pair loss and exact gradients accumulated into `grad`.
/// Returns the loss.
double backward_pair(const GraphInput &a, const GraphInput &b, bool is_clone,
                     double margin, const ModelParams &params,
                     std::size_t iterations, ModelParams &grad);

} // namespace seed::gmn

#endif // SEED_GMN_HPP
