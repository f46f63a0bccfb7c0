// Licensed under the Apache License, Version 2.0.
// SPDX-License-Identifier: Apache-2.0

#include "seed/encoding.hpp"

#include "seed/error.hpp"
#include "seed/model.hpp"

#include <algorithm>
#include <set>

namespace seed::encoding {

Vocabulary::Vocabulary() { reindex(); }

void Vocabulary::reindex() {
  std::set<std::string> sorted;
  for (const auto &t : tokens_)
    if (t != kUnknownToken)
      sorted.insert(t);
  tokens_.assign(1, std::string(kUnknownToken));
  tokens_.insert(tokens_.end(), sorted.begin(), sorted.end());
  index_.clear();
  for (std::size_t i = 0; i < tokens_.size(); ++i)
    index_.emplace(tokens_[i], i);
}

Vocabulary Vocabulary::build(std::span<const graph::SemanticGraph> graphs) {
  Vocabulary v;
  for (const auto &g : graphs)
    for (const auto &n : g.nodes)
      v.add(n.token);
  v.freeze();
  return v;
}

Vocabulary Vocabulary::deserialize(std::string_view text) {
  Vocabulary v;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t nl = text.find('\n', start);
    std::size_t end = nl == std::string_view::npos ? text.size() : nl;
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r')
      line.remove_suffix(1);
    if (!line.empty())
      v.add(line);
    start = end + 1;
  }
  v.freeze();
  return v;
}

void Vocabulary::add(std::string_view token) {
  if (frozen_)
    throw Error(ErrorCode::InvalidArgument, "vocabulary is frozen");
  if (token.empty())
    throw Error(ErrorCode::InvalidArgument, "empty token");
  if (index_.count(std::string(token)))
    return;
  index_.emplace(std::string(token), tokens_.size());
  tokens_.emplace_back(token);
}

void Vocabulary::freeze() {
  reindex();
  frozen_ = true;
}

bool Vocabulary::contains(std::string_view token) const {
  return index_.count(std::string(token)) > 0;
}

std::size_t Vocabulary::index_of(std::string_view token) const {
  if (!frozen_)
    throw Error(ErrorCode::InvalidArgument, "vocabulary must be frozen before lookup");
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnknown : it->second;
}

std::string Vocabulary::serialize() const {
  std::string out;
  for (std::size_t i = 1; i < tokens_.size(); ++i) {
    out += tokens_[i];
    out += '\n';
  }
  return out;
}

std::uint64_t Vocabulary::fingerprint() const {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : serialize()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::vector<std::size_t> token_indices(const graph::SemanticGraph &g,
                                       const Vocabulary &vocab) {
  std::vector<std::size_t> out;
  out.reserve(g.nodes.size());
  for (const auto &n : g.nodes)
    out.push_back(vocab.index_of(n.token));
  return out;
}

Eigen::MatrixXd encode_graph(const graph::SemanticGraph &g,
                             const Vocabulary &vocab, const ModelParams &params) {
  if (params.vocab_size() != vocab.size())
    throw Error(ErrorCode::InvalidArgument,
                "embedding table has " + std::to_string(params.vocab_size()) +
                    " rows but the vocabulary has " + std::to_string(vocab.size()));
  const auto rows = token_indices(g, vocab);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), params.embedding.cols());
  for (std::size_t i = 0; i < rows.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) =
        params.embedding.row(static_cast<Eigen::Index>(rows[i]));
  return out;
}

} // namespace seed::encoding
