// Licensed under the Apache License, Version 2.0.
// SPDX-License-Identifier: Apache-2.0

#ifndef SEED_ENCODING_HPP
#define SEED_ENCODING_HPP

#include "seed/graph.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace seed {
struct ModelParams;
}

namespace seed::encoding {

/// Token-to-row mapping for the embedding table. Index 0 is always `<unk>`;
/// the remaining tokens are kept in sorted order.
class Vocabulary {
public:
  static constexpr std::size_t kUnknown = 0;
  static constexpr std::string_view kUnknownToken = "<unk>";

  Vocabulary();

  /// Collects every node token of `graphs` and freezes the result.
  static Vocabulary build(std::span<const graph::SemanticGraph> graphs);
  /// Parses the one-token-per-line persisted form.
  static Vocabulary deserialize(std::string_view text);

  void add(std::string_view token);
  void freeze();
  bool frozen() const { return frozen_; }

  std::size_t size() const { return tokens_.size(); }
  bool contains(std::string_view token) const;
  /// Row for `token`, or kUnknown. Requires a frozen vocabulary.
  std::size_t index_of(std::string_view token) const;
  const std::vector<std::string> &tokens() const { return tokens_; }

  /// Sorted tokens, one per line, without the `<unk>` entry.
  std::string serialize() const;
  /// FNV-1a hash of the serialized form; ties checkpoints to vocabularies.
  std::uint64_t fingerprint() const;

  friend bool operator==(const Vocabulary &a, const Vocabulary &b) {
    return a.tokens_ == b.tokens_ && a.frozen_ == b.frozen_;
  }

private:
  void reindex();

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
  bool frozen_ = false;
};

/// Vocabulary row of every node, in node-id order.
std::vector<std::size_t> token_indices(const graph::SemanticGraph &g,
                                       const Vocabulary &vocab);

/// Initial node features: row i is the embedding of node i's token.
Eigen::MatrixXd encode_graph(const graph::SemanticGraph &g,
                             const Vocabulary &vocab, const ModelParams &params);

} // namespace seed::encoding

#endif // SEED_ENCODING_HPP
