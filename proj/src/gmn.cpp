// Licensed under the Apache License, Version 2.0.
// SPDX-License-Identifier: Apache-2.0

#include "seed/gmn.hpp"

#include "seed/error.hpp"
#include "seed/training.hpp"

#include <cmath>

namespace seed::gmn {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double kNormEpsilon = 1e-12;

MatrixXd sigmoid(const MatrixXd &x) {
  return x.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

MatrixXd tanh_of(const MatrixXd &x) {
  return x.unaryExpr([](double v) { return std::tanh(v); });
}

Index row(std::size_t i) { return static_cast<Index>(i); }

//===----------------------------------------------------------------------===//
// Message passing
//===----------------------------------------------------------------------===//

struct MessageCache {
  MatrixXd send, recv;         // forward-direction projections
  MatrixXd rev_send, rev_recv; // reversed-direction projections
};

MatrixXd message_forward(const MatrixXd &h, std::span<const graph::Edge> edges,
                         const ModelParams &p, MessageCache &c) {
  const Index d = h.cols();
  c.send = h * p.msg.leftCols(d).transpose();
  c.recv = h * p.msg.rightCols(d).transpose();
  c.rev_send = h * p.msg_rev.leftCols(d).transpose();
  c.rev_recv = h * p.msg_rev.rightCols(d).transpose();
  MatrixXd m = MatrixXd::Zero(h.rows(), d);
  for (const auto &e : edges) {
    const auto ev = p.edge.row(static_cast<Index>(e.etype));
    m.row(row(e.dst)) += ev.cwiseProduct(c.send.row(row(e.src)) + c.recv.row(row(e.dst)));
    m.row(row(e.src)) +=
        ev.cwiseProduct(c.rev_send.row(row(e.dst)) + c.rev_recv.row(row(e.src)));
  }
  return m;
}

/// Adds parameter gradients into `g` and returns dL/dh.
MatrixXd message_backward(const MatrixXd &h, std::span<const graph::Edge> edges,
                          const ModelParams &p, const MessageCache &c,
                          const MatrixXd &dm, ModelParams &g) {
  const Index d = h.cols();
  MatrixXd d_send = MatrixXd::Zero(h.rows(), d), d_recv = d_send;
  MatrixXd d_rev_send = d_send, d_rev_recv = d_send;
  for (const auto &e : edges) {
    const Index t = static_cast<Index>(e.etype);
    const auto ev = p.edge.row(t);
    {
      const auto up = dm.row(row(e.dst));
      g.edge.row(t) += up.cwiseProduct(c.send.row(row(e.src)) + c.recv.row(row(e.dst)));
      const Eigen::RowVectorXd pre = up.cwiseProduct(ev);
      d_send.row(row(e.src)) += pre;
      d_recv.row(row(e.dst)) += pre;
    }
    {
      const auto up = dm.row(row(e.src));
      g.edge.row(t) +=
          up.cwiseProduct(c.rev_send.row(row(e.dst)) + c.rev_recv.row(row(e.src)));
      const Eigen::RowVectorXd pre = up.cwiseProduct(ev);
      d_rev_send.row(row(e.dst)) += pre;
      d_rev_recv.row(row(e.src)) += pre;
    }
  }
  g.msg.leftCols(d) += d_send.transpose() * h;
  g.msg.rightCols(d) += d_recv.transpose() * h;
  g.msg_rev.leftCols(d) += d_rev_send.transpose() * h;
  g.msg_rev.rightCols(d) += d_rev_recv.transpose() * h;
  return d_send * p.msg.leftCols(d) + d_recv * p.msg.rightCols(d) +
         d_rev_send * p.msg_rev.leftCols(d) + d_rev_recv * p.msg_rev.rightCols(d);
}

//===----------------------------------------------------------------------===//
// Cross-graph attention
//===----------------------------------------------------------------------===//

struct CrossCache {
  MatrixXd unit_a, unit_b;         // row-normalized states (zero rows stay zero)
  VectorXd inv_norm_a, inv_norm_b; // 0 for zero rows
  MatrixXd cos;                    // |A| x |B|
  MatrixXd alpha_a, alpha_b;
};

void normalize_rows(const MatrixXd &h, MatrixXd &unit, VectorXd &inv_norm) {
  unit = h;
  inv_norm.resize(h.rows());
  for (Index i = 0; i < h.rows(); ++i) {
    const double n = h.row(i).norm();
    inv_norm(i) = n < kNormEpsilon ? 0.0 : 1.0 / n;
    unit.row(i) *= inv_norm(i);
  }
}

/// Row-wise softmax with max subtraction.
MatrixXd softmax_rows(const MatrixXd &x) {
  MatrixXd out(x.rows(), x.cols());
  for (Index i = 0; i < x.rows(); ++i) {
    const double mx = x.row(i).maxCoeff();
    double sum = 0.0;
    for (Index k = 0; k < x.cols(); ++k) {
      out(i, k) = std::exp(x(i, k) - mx);
      sum += out(i, k);
    }
    out.row(i) /= sum;
  }
  return out;
}

MatrixXd softmax_rows_backward(const MatrixXd &alpha, const MatrixXd &d_alpha) {
  MatrixXd out(alpha.rows(), alpha.cols());
  for (Index i = 0; i < alpha.rows(); ++i) {
    const double dot = alpha.row(i).dot(d_alpha.row(i));
    out.row(i) = alpha.row(i).cwiseProduct(d_alpha.row(i).array().matrix() -
                                           Eigen::RowVectorXd::Constant(alpha.cols(), dot));
  }
  return out;
}

CrossAttention cross_forward(const MatrixXd &ha, const MatrixXd &hb, CrossCache &c) {
  normalize_rows(ha, c.unit_a, c.inv_norm_a);
  normalize_rows(hb, c.unit_b, c.inv_norm_b);
  c.cos = c.unit_a * c.unit_b.transpose();
  c.alpha_a = softmax_rows(c.cos);
  c.alpha_b = softmax_rows(c.cos.transpose());
  CrossAttention out;
  out.mu_a = ha - c.alpha_a * hb;
  out.mu_b = hb - c.alpha_b * ha;
  out.alpha_a = c.alpha_a;
  out.alpha_b = c.alpha_b;
  return out;
}

/// Accumulates dL/dha and dL/dhb from the attention outputs' gradients.
void cross_backward(const MatrixXd &ha, const MatrixXd &hb, const CrossCache &c,
                    const MatrixXd &d_mu_a, const MatrixXd &d_mu_b, MatrixXd &d_ha,
                    MatrixXd &d_hb) {
  d_ha += d_mu_a;
  d_hb -= c.alpha_a.transpose() * d_mu_a;
  d_hb += d_mu_b;
  d_ha -= c.alpha_b.transpose() * d_mu_b;

  const MatrixXd d_alpha_a = -d_mu_a * hb.transpose();
  const MatrixXd d_alpha_b = -d_mu_b * ha.transpose();
  const MatrixXd d_cos = softmax_rows_backward(c.alpha_a, d_alpha_a) +
                         softmax_rows_backward(c.alpha_b, d_alpha_b).transpose();

  // cos_ik = u_i . v_k with u = ha_i / |ha_i|, v = hb_k / |hb_k|.
  const MatrixXd weighted = d_cos.cwiseProduct(c.cos);
  const VectorXd row_w = weighted.rowwise().sum();
  const VectorXd col_w = weighted.colwise().sum().transpose();
  MatrixXd ga = d_cos * c.unit_b;
  ga -= row_w.asDiagonal() * c.unit_a;
  MatrixXd gb = d_cos.transpose() * c.unit_a;
  gb -= col_w.asDiagonal() * c.unit_b;
  d_ha += c.inv_norm_a.asDiagonal() * ga;
  d_hb += c.inv_norm_b.asDiagonal() * gb;
}

//===----------------------------------------------------------------------===//
// GRU update
//===----------------------------------------------------------------------===//

struct GruCache {
  MatrixXd x, z, r, rh, cand;
};

MatrixXd gru_forward(const MatrixXd &h, const MatrixXd &m, const MatrixXd &mu,
                     const ModelParams &p, GruCache &c) {
  const Index d = h.cols();
  c.x.resize(h.rows(), 2 * d);
  c.x << m, mu;
  c.z = sigmoid((c.x * p.gru_wz.transpose() + h * p.gru_uz.transpose()).rowwise() +
                p.gru_bz.transpose());
  c.r = sigmoid((c.x * p.gru_wr.transpose() + h * p.gru_ur.transpose()).rowwise() +
                p.gru_br.transpose());
  c.rh = c.r.cwiseProduct(h);
  c.cand = tanh_of((c.x * p.gru_wn.transpose() + c.rh * p.gru_un.transpose()).rowwise() +
                   p.gru_bn.transpose());
  return (MatrixXd::Ones(h.rows(), d) - c.z).cwiseProduct(c.cand) + c.z.cwiseProduct(h);
}

/// Returns dL/dh_prev; writes dL/dm and dL/dmu.
MatrixXd gru_backward(const MatrixXd &h, const ModelParams &p, const GruCache &c,
                      const MatrixXd &d_out, MatrixXd &d_m, MatrixXd &d_mu,
                      ModelParams &g) {
  const Index d = h.cols();
  const MatrixXd ones = MatrixXd::Ones(h.rows(), d);
  MatrixXd d_h = d_out.cwiseProduct(c.z);
  const MatrixXd d_z = d_out.cwiseProduct(h - c.cand);
  const MatrixXd d_cand = d_out.cwiseProduct(ones - c.z);

  const MatrixXd d_cand_pre = d_cand.cwiseProduct(ones - c.cand.cwiseProduct(c.cand));
  g.gru_wn += d_cand_pre.transpose() * c.x;
  g.gru_un += d_cand_pre.transpose() * c.rh;
  g.gru_bn += d_cand_pre.colwise().sum().transpose();
  MatrixXd d_x = d_cand_pre * p.gru_wn;
  const MatrixXd d_rh = d_cand_pre * p.gru_un;
  d_h += d_rh.cwiseProduct(c.r);
  const MatrixXd d_r = d_rh.cwiseProduct(h);

  const MatrixXd d_r_pre = d_r.cwiseProduct(c.r.cwiseProduct(ones - c.r));
  g.gru_wr += d_r_pre.transpose() * c.x;
  g.gru_ur += d_r_pre.transpose() * h;
  g.gru_br += d_r_pre.colwise().sum().transpose();
  d_x += d_r_pre * p.gru_wr;
  d_h += d_r_pre * p.gru_ur;

  const MatrixXd d_z_pre = d_z.cwiseProduct(c.z.cwiseProduct(ones - c.z));
  g.gru_wz += d_z_pre.transpose() * c.x;
  g.gru_uz += d_z_pre.transpose() * h;
  g.gru_bz += d_z_pre.colwise().sum().transpose();
  d_x += d_z_pre * p.gru_wz;
  d_h += d_z_pre * p.gru_uz;

  d_m = d_x.leftCols(d);
  d_mu = d_x.rightCols(d);
  return d_h;
}

//===----------------------------------------------------------------------===//
// Readout
//===----------------------------------------------------------------------===//

struct ReadoutCache {
  MatrixXd gate, proj;
  VectorXd pooled, hidden;
};

VectorXd readout_forward(const MatrixXd &h, const ModelParams &p, ReadoutCache &c) {
  c.gate = sigmoid((h * p.gate_w.transpose()).rowwise() + p.gate_b.transpose());
  c.proj = (h * p.proj_w.transpose()).rowwise() + p.proj_b.transpose();
  c.pooled = c.gate.cwiseProduct(c.proj).colwise().sum().transpose();
  c.hidden = tanh_of(p.out1_w * c.pooled + p.out1_b);
  return p.out2_w * c.hidden + p.out2_b;
}

MatrixXd readout_backward(const MatrixXd &h, const ModelParams &p,
                          const ReadoutCache &c, const VectorXd &d_out,
                          ModelParams &g) {
  g.out2_w += d_out * c.hidden.transpose();
  g.out2_b += d_out;
  const VectorXd d_hidden = p.out2_w.transpose() * d_out;
  const VectorXd d_hidden_pre =
      d_hidden.cwiseProduct((VectorXd::Ones(c.hidden.size()) - c.hidden.cwiseAbs2()));
  g.out1_w += d_hidden_pre * c.pooled.transpose();
  g.out1_b += d_hidden_pre;
  const Eigen::RowVectorXd d_pooled = (p.out1_w.transpose() * d_hidden_pre).transpose();

  const MatrixXd d_gate = c.proj.array().rowwise() * d_pooled.array();
  const MatrixXd d_proj = c.gate.array().rowwise() * d_pooled.array();
  const MatrixXd d_gate_pre = d_gate.cwiseProduct(
      c.gate.cwiseProduct(MatrixXd::Ones(c.gate.rows(), c.gate.cols()) - c.gate));
  g.gate_w += d_gate_pre.transpose() * h;
  g.gate_b += d_gate_pre.colwise().sum().transpose();
  g.proj_w += d_proj.transpose() * h;
  g.proj_b += d_proj.colwise().sum().transpose();
  return d_gate_pre * p.gate_w + d_proj * p.proj_w;
}

//===----------------------------------------------------------------------===//
// Full pair tape
//===----------------------------------------------------------------------===//

struct GraphStep {
  MessageCache msg;
  MatrixXd m;
  GruCache gru;
};

struct StepCache {
  GraphStep a, b;
  CrossCache cross;
};

struct PairTape {
  std::vector<MatrixXd> states_a, states_b;
  std::vector<StepCache> steps;
  ReadoutCache read_a, read_b;
  PairScore score;
};

MatrixXd initial_states(const GraphInput &g, const ModelParams &p) {
  MatrixXd h(row(g.tokens.size()), p.embedding.cols());
  for (std::size_t i = 0; i < g.tokens.size(); ++i) {
    if (g.tokens[i] >= p.vocab_size())
      throw Error(ErrorCode::InvalidArgument, "token index outside the embedding table");
    h.row(row(i)) = p.embedding.row(row(g.tokens[i]));
  }
  return h;
}

void check_dims(const ModelParams &p) {
  if (p.edge.rows() != 2 || p.edge.cols() != p.embedding.cols())
    throw Error(ErrorCode::InvalidArgument,
                "edge vectors must have the node embedding dimension");
}

void run_forward(const GraphInput &a, const GraphInput &b, const ModelParams &p,
                 std::size_t iterations, PairTape &tape) {
  if (a.node_count() == 0 || b.node_count() == 0)
    throw Error(ErrorCode::EmptyGraph, "cannot score a pair with an empty graph");
  check_dims(p);
  tape.states_a.assign(1, initial_states(a, p));
  tape.states_b.assign(1, initial_states(b, p));
  tape.steps.resize(iterations);
  for (std::size_t t = 0; t < iterations; ++t) {
    StepCache &s = tape.steps[t];
    const MatrixXd &ha = tape.states_a.back();
    const MatrixXd &hb = tape.states_b.back();
    s.a.m = message_forward(ha, a.edges, p, s.a.msg);
    s.b.m = message_forward(hb, b.edges, p, s.b.msg);
    CrossAttention att = cross_forward(ha, hb, s.cross);
    MatrixXd next_a = gru_forward(ha, s.a.m, att.mu_a, p, s.a.gru);
    MatrixXd next_b = gru_forward(hb, s.b.m, att.mu_b, p, s.b.gru);
    tape.states_a.push_back(std::move(next_a));
    tape.states_b.push_back(std::move(next_b));
  }
  tape.score.graph_a = readout_forward(tape.states_a.back(), p, tape.read_a);
  tape.score.graph_b = readout_forward(tape.states_b.back(), p, tape.read_b);
  tape.score.similarity = cosine(tape.score.graph_a, tape.score.graph_b);
}

void run_backward(const GraphInput &a, const GraphInput &b, const ModelParams &p,
                  const PairTape &tape, double d_sim, ModelParams &g) {
  const VectorXd &ga = tape.score.graph_a;
  const VectorXd &gb = tape.score.graph_b;
  const double na = ga.norm(), nb = gb.norm();
  VectorXd d_ga = VectorXd::Zero(ga.size()), d_gb = VectorXd::Zero(gb.size());
  if (na >= kNormEpsilon && nb >= kNormEpsilon && d_sim != 0.0) {
    const double s = tape.score.similarity;
    d_ga = d_sim * (gb / (na * nb) - s * ga / (na * na));
    d_gb = d_sim * (ga / (na * nb) - s * gb / (nb * nb));
  }
  MatrixXd d_ha = readout_backward(tape.states_a.back(), p, tape.read_a, d_ga, g);
  MatrixXd d_hb = readout_backward(tape.states_b.back(), p, tape.read_b, d_gb, g);

  for (std::size_t t = tape.steps.size(); t-- > 0;) {
    const StepCache &s = tape.steps[t];
    const MatrixXd &ha = tape.states_a[t];
    const MatrixXd &hb = tape.states_b[t];
    MatrixXd d_m_a, d_mu_a, d_m_b, d_mu_b;
    MatrixXd prev_a = gru_backward(ha, p, s.a.gru, d_ha, d_m_a, d_mu_a, g);
    MatrixXd prev_b = gru_backward(hb, p, s.b.gru, d_hb, d_m_b, d_mu_b, g);
    prev_a += message_backward(ha, a.edges, p, s.a.msg, d_m_a, g);
    prev_b += message_backward(hb, b.edges, p, s.b.msg, d_m_b, g);
    cross_backward(ha, hb, s.cross, d_mu_a, d_mu_b, prev_a, prev_b);
    d_ha = std::move(prev_a);
    d_hb = std::move(prev_b);
  }
  for (std::size_t i = 0; i < a.tokens.size(); ++i)
    g.embedding.row(row(a.tokens[i])) += d_ha.row(row(i));
  for (std::size_t i = 0; i < b.tokens.size(); ++i)
    g.embedding.row(row(b.tokens[i])) += d_hb.row(row(i));
}

} // namespace

GraphInput prepare(const graph::SemanticGraph &g, const encoding::Vocabulary &vocab) {
  return {encoding::token_indices(g, vocab), g.edges};
}

MatrixXd message_pass(const MatrixXd &h, std::span<const graph::Edge> edges,
                      const ModelParams &params) {
  check_dims(params);
  MessageCache cache;
  return message_forward(h, edges, params, cache);
}

CrossAttention cross_attention(const MatrixXd &ha, const MatrixXd &hb) {
  if (ha.rows() == 0 || hb.rows() == 0)
    throw Error(ErrorCode::EmptyGraph, "cross attention needs non-empty graphs");
  CrossCache cache;
  return cross_forward(ha, hb, cache);
}

MatrixXd node_update(const MatrixXd &h, const MatrixXd &m, const MatrixXd &mu,
                     const ModelParams &params) {
  GruCache cache;
  return gru_forward(h, m, mu, params, cache);
}

VectorXd readout(const MatrixXd &h, const ModelParams &params) {
  ReadoutCache cache;
  return readout_forward(h, params, cache);
}

double cosine(const VectorXd &a, const VectorXd &b) {
  const double na = a.norm(), nb = b.norm();
  if (na < kNormEpsilon || nb < kNormEpsilon)
    return 0.0;
  return a.dot(b) / (na * nb);
}

PairScore forward_pair(const GraphInput &a, const GraphInput &b,
                       const ModelParams &params, std::size_t iterations) {
  PairTape tape;
  run_forward(a, b, params, iterations, tape);
  return tape.score;
}

PairScore forward_pair(const GraphInput &a, const GraphInput &b,
                       const ModelParams &params, std::size_t iterations,
                       PairState &state) {
  PairTape tape;
  run_forward(a, b, params, iterations, tape);
  state.states_a = tape.states_a;
  state.states_b = tape.states_b;
  return tape.score;
}

PairScore backward_similarity(const GraphInput &a, const GraphInput &b,
                              const ModelParams &params, std::size_t iterations,
                              double similarity_grad, ModelParams &grad) {
  PairTape tape;
  run_forward(a, b, params, iterations, tape);
  run_backward(a, b, params, tape, similarity_grad, grad);
  return tape.score;
}

double backward_pair(const GraphInput &a, const GraphInput &b, bool is_clone,
                     double margin, const ModelParams &params,
                     std::size_t iterations, ModelParams &grad) {
  PairTape tape;
  run_forward(a, b, params, iterations, tape);
  const double s = tape.score.similarity;
  const double d_sim = training::pair_loss_grad(s, is_clone, margin);
  if (d_sim != 0.0)
    run_backward(a, b, params, tape, d_sim, grad);
  return training::pair_loss(s, is_clone, margin);
}

} // namespace seed::gmn
