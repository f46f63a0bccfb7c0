// Licensed under the Apache License, Version 2.0.
// SPDX-License-Identifier: Apache-2.0

#ifndef SEED_MODEL_HPP
#define SEED_MODEL_HPP

#include "seed/encoding.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace seed {

/// Non-owning view of one named parameter tensor (column-major storage).
struct TensorView {
  const char *name;
  double *data;
  Eigen::Index rows;
  Eigen::Index cols;

  Eigen::Map<Eigen::MatrixXd> matrix() const { return {data, rows, cols}; }
  Eigen::Index size() const { return rows * cols; }
};

/// Every trainable tensor of the matching network. Node vectors, edge vectors
/// and the hidden state all share the dimension `dim`.
struct ModelParams {
  Eigen::MatrixXd embedding; ///< vocab x dim
  Eigen::MatrixXd edge;      ///< 2 x dim; row 0 data flow, row 1 control flow

  /// Message maps over [h_sender | h_receiver]; dim x 2dim.
  Eigen::MatrixXd msg;
  Eigen::MatrixXd msg_rev;

  // GRU over input [m | mu] (2dim) and state h (dim).
  Eigen::MatrixXd gru_wz, gru_wr, gru_wn; ///< dim x 2dim
  Eigen::MatrixXd gru_uz, gru_ur, gru_un; ///< dim x dim
  Eigen::VectorXd gru_bz, gru_br, gru_bn;

  // Readout: gate and transform are single affine maps, the graph-level
  // network is affine-tanh-affine.
  Eigen::MatrixXd gate_w;
  Eigen::VectorXd gate_b;
  Eigen::MatrixXd proj_w;
  Eigen::VectorXd proj_b;
  Eigen::MatrixXd out1_w;
  Eigen::VectorXd out1_b;
  Eigen::MatrixXd out2_w;
  Eigen::VectorXd out2_b;

  /// All tensors shaped for (vocab, dim) and set to zero.
  static ModelParams zeros(std::size_t vocab, std::size_t dim);
  /// Seeded initialization: embeddings uniform in [-0.1, 0.1], edge vectors
  /// around one, Glorot-uniform weights, zero biases.
  static ModelParams initialize(std::size_t vocab, std::size_t dim,
                                std::uint64_t seed);

  std::size_t dim() const { return static_cast<std::size_t>(embedding.cols()); }
  std::size_t vocab_size() const {
    return static_cast<std::size_t>(embedding.rows());
  }

  std::vector<TensorView> tensors();
  std::vector<TensorView> tensors() const;

  void set_zero();
  /// this += scale * other; shapes must match.
  void add_scaled(const ModelParams &other, double scale);
  std::size_t parameter_count() const;
  bool all_finite() const;

  friend bool operator==(const ModelParams &a, const ModelParams &b);
};

/// Trained model plus everything inference needs: the frozen vocabulary,
/// the validation-chosen threshold and the run configuration.
struct Checkpoint {
  static constexpr int kFormatVersion = 1;

  ModelParams params;
  encoding::Vocabulary vocab;
  double threshold = 0.0;
  std::vector<std::pair<std::string, std::string>> config;

  std::string config_value(const std::string &key,
                           const std::string &fallback = {}) const;
};

/// Writes `path` and its vocabulary file `path.vocab`. Values are stored as
/// hexadecimal floats so reloading is bit-exact.
void save_checkpoint(const std::filesystem::path &path, const Checkpoint &ckpt);

/// Throws Error(Checkpoint) on version, shape or vocabulary mismatch.
Checkpoint load_checkpoint(const std::filesystem::path &path);

} // namespace seed

#endif // SEED_MODEL_HPP
