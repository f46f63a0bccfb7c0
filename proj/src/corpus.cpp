// Licensed under the Apache License, Version 2.0.
// SPDX-License-Identifier: Apache-2.0

#include "seed/corpus.hpp"

#include "seed/error.hpp"
#include "seed/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

namespace seed::corpus {

namespace fs = std::filesystem;

namespace {

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
    return std::isdigit(static_cast<unsigned char>(c));
  });
}

std::string read_text(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  if (!in)
    throw Error(ErrorCode::Io, "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

} // namespace

bool NaturalLess::operator()(std::string_view a, std::string_view b) const {
  const bool na = all_digits(a), nb = all_digits(b);
  if (na && nb) {
    std::string_view ta = a.substr(std::min(a.find_first_not_of('0'), a.size()));
    std::string_view tb = b.substr(std::min(b.find_first_not_of('0'), b.size()));
    if (ta.size() != tb.size())
      return ta.size() < tb.size();
    if (ta != tb)
      return ta < tb;
    return a < b;
  }
  if (na != nb)
    return na; // numeric ids first
  return a < b;
}

std::size_t CorpusIndex::snippet_count() const {
  std::size_t n = 0;
  for (const auto &[_, snippets] : problems)
    n += snippets.size();
  return n;
}

std::vector<std::string> CorpusIndex::problem_ids() const {
  std::vector<std::string> ids;
  for (const auto &[id, _] : problems)
    ids.push_back(id);
  return ids;
}

const Snippet &CorpusIndex::snippet(std::string_view problem,
                                    std::string_view id) const {
  auto it = problems.find(problem);
  if (it != problems.end())
    for (const auto &s : it->second)
      if (s.id == id)
        return s;
  throw Error(ErrorCode::InvalidArgument,
              "unknown snippet " + std::string(problem) + "/" + std::string(id));
}

CorpusIndex scan_corpus(const fs::path &root, bool strict) {
  std::error_code ec;
  if (!fs::is_directory(root, ec))
    throw Error(ErrorCode::Io, "corpus directory not found: " + root.string());

  std::vector<fs::path> problem_dirs;
  for (const auto &entry : fs::directory_iterator(root))
    if (entry.is_directory())
      problem_dirs.push_back(entry.path());

  CorpusIndex index;
  for (const auto &dir : problem_dirs) {
    const std::string problem = dir.filename().string();
    std::vector<fs::path> files;
    for (const auto &entry : fs::directory_iterator(dir))
      if (entry.is_regular_file() && entry.path().extension() == ".ll")
        files.push_back(entry.path());
    std::sort(files.begin(), files.end(), [](const fs::path &a, const fs::path &b) {
      return NaturalLess{}(a.stem().string(), b.stem().string());
    });

    std::vector<Snippet> snippets;
    for (const auto &file : files) {
      Snippet s{problem, file.stem().string(), file, {}};
      try {
        s.functions = ir::parse_module(read_text(file), {strict});
      } catch (const Error &e) {
        if (strict)
          throw Error(e.code(), file.string() + ": " + e.what());
        index.skipped.push_back({file, e.what()});
        continue;
      }
      if (s.functions.empty()) {
        if (strict)
          throw Error(ErrorCode::MalformedIr,
                      file.string() + ": no function definitions");
        index.skipped.push_back({file, "no function definitions"});
        continue;
      }
      snippets.push_back(std::move(s));
    }
    if (!snippets.empty())
      index.problems.emplace(problem, std::move(snippets));
  }
  std::sort(index.skipped.begin(), index.skipped.end(),
            [](const SkippedFile &a, const SkippedFile &b) { return a.path < b.path; });
  if (index.snippet_count() == 0)
    throw Error(ErrorCode::EmptyCorpus, "no parseable snippets under " + root.string());
  return index;
}

//===----------------------------------------------------------------------===//
// Splits
//===----------------------------------------------------------------------===//

std::vector<std::string> expand_ids(std::string_view spec,
                                    const std::vector<std::string> &corpus_ids) {
  std::set<std::string, NaturalLess> out;
  std::size_t start = 0;
  while (start <= spec.size()) {
    std::size_t comma = spec.find(',', start);
    std::string_view item =
        trim(spec.substr(start, comma == std::string_view::npos ? spec.npos : comma - start));
    start = comma == std::string_view::npos ? spec.size() + 1 : comma + 1;
    if (item.empty())
      continue;
    std::size_t dash = item.find('-');
    if (dash != std::string_view::npos && all_digits(trim(item.substr(0, dash))) &&
        all_digits(trim(item.substr(dash + 1)))) {
      const unsigned long lo = std::stoul(std::string(trim(item.substr(0, dash))));
      const unsigned long hi = std::stoul(std::string(trim(item.substr(dash + 1))));
      if (lo > hi)
        throw Error(ErrorCode::InvalidArgument, "empty id range " + std::string(item));
      for (const auto &id : corpus_ids)
        if (all_digits(id)) {
          const unsigned long v = std::stoul(id);
          if (v >= lo && v <= hi)
            out.insert(id);
        }
      continue;
    }
    std::string id(item);
    if (std::find(corpus_ids.begin(), corpus_ids.end(), id) == corpus_ids.end())
      throw Error(ErrorCode::InvalidArgument, "problem id '" + id + "' is not in the corpus");
    out.insert(id);
  }
  return {out.begin(), out.end()};
}

void check_split(const SplitSpec &split, const CorpusIndex &index) {
  const std::pair<const char *, const std::vector<std::string> *> sets[] = {
      {"train", &split.train}, {"val", &split.val}, {"test", &split.test}};
  std::map<std::string, std::string> owner;
  for (const auto &[name, ids] : sets) {
    for (const auto &id : *ids) {
      auto [it, fresh] = owner.emplace(id, name);
      if (!fresh)
        throw Error(ErrorCode::OverlappingSplit,
                    "problem '" + id + "' appears in both the " + it->second +
                        " and the " + name + " split");
    }
  }
  for (const auto &[name, ids] : sets) {
    if (ids->empty())
      throw Error(ErrorCode::InvalidArgument, std::string("the ") + name + " split is empty");
    for (const auto &id : *ids)
      if (!index.problems.count(id))
        throw Error(ErrorCode::InvalidArgument,
                    "problem '" + id + "' in the " + name + " split is not in the corpus");
  }
}

SplitSpec make_splits(const CorpusIndex &index, const ExplicitSplit &spec) {
  const auto ids = index.problem_ids();
  SplitSpec split{expand_ids(spec.train, ids), expand_ids(spec.val, ids),
                  expand_ids(spec.test, ids)};
  check_split(split, index);
  return split;
}

SplitSpec make_splits(const CorpusIndex &index, const SplitRatios &ratios,
                      std::uint64_t seed) {
  if (!(ratios.train > 0 && ratios.val > 0 && ratios.test > 0))
    throw Error(ErrorCode::InvalidArgument, "split ratios must be positive");
  auto ids = index.problem_ids();
  const std::size_t n = ids.size();
  if (n < 3)
    throw Error(ErrorCode::InvalidArgument,
                "need at least 3 problems for train/val/test splits, found " +
                    std::to_string(n));
  const double total = ratios.train + ratios.val + ratios.test;
  auto share = [&](double r) {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(n * r / total)));
  };
  std::size_t n_train = share(ratios.train), n_val = share(ratios.val);
  while (n_train + n_val >= n) {
    if (n_train >= n_val && n_train > 1)
      --n_train;
    else
      --n_val;
  }
  Rng rng(seed);
  rng.shuffle(ids);
  SplitSpec split;
  split.train.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_train));
  split.val.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_train),
                   ids.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  split.test.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), ids.end());
  for (auto *v : {&split.train, &split.val, &split.test})
    std::sort(v->begin(), v->end(), NaturalLess{});
  check_split(split, index);
  return split;
}

//===----------------------------------------------------------------------===//
// Pair sampling
//===----------------------------------------------------------------------===//

namespace {

/// k distinct integers from [0, n) (Floyd's algorithm), in draw order.
std::vector<std::uint64_t> sample_distinct(std::uint64_t n, std::uint64_t k, Rng &rng) {
  std::vector<std::uint64_t> out;
  std::unordered_set<std::uint64_t> taken;
  for (std::uint64_t j = n - k; j < n; ++j) {
    std::uint64_t t = rng.below(j + 1);
    if (!taken.insert(t).second) {
      taken.insert(j);
      out.push_back(j);
    } else {
      out.push_back(t);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Index into the i<j pairs of an n-element set, row-major.
std::pair<std::size_t, std::size_t> triangular(std::uint64_t idx, std::size_t n) {
  std::size_t i = 0;
  std::uint64_t row = n - 1;
  while (idx >= row) {
    idx -= row;
    ++i;
    --row;
  }
  return {i, i + 1 + static_cast<std::size_t>(idx)};
}

} // namespace

std::vector<LabeledPair> sample_pairs(const CorpusIndex &index,
                                      std::span<const std::string> problems,
                                      std::size_t n_pairs, std::uint64_t seed) {
  std::vector<const std::vector<Snippet> *> groups;
  std::vector<std::string> ids(problems.begin(), problems.end());
  std::sort(ids.begin(), ids.end(), NaturalLess{});
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  for (const auto &id : ids) {
    auto it = index.problems.find(id);
    if (it == index.problems.end())
      throw Error(ErrorCode::InvalidArgument, "problem '" + id + "' is not in the corpus");
    groups.push_back(&it->second);
  }

  // Clone pairs: within a problem. Non-clone pairs: across two problems.
  std::vector<std::uint64_t> clone_cum{0};
  for (const auto *g : groups) {
    const std::uint64_t k = g->size();
    clone_cum.push_back(clone_cum.back() + k * (k - (k ? 1 : 0)) / 2);
  }
  struct Cross {
    std::size_t p, q;
  };
  std::vector<Cross> cross;
  std::vector<std::uint64_t> cross_cum{0};
  for (std::size_t p = 0; p < groups.size(); ++p)
    for (std::size_t q = p + 1; q < groups.size(); ++q) {
      cross.push_back({p, q});
      cross_cum.push_back(cross_cum.back() + groups[p]->size() * groups[q]->size());
    }
  const std::uint64_t n_clone_avail = clone_cum.back();
  const std::uint64_t n_non_avail = cross_cum.back();
  if (n_clone_avail == 0 || n_non_avail == 0)
    throw Error(ErrorCode::InsufficientPairs,
                n_clone_avail == 0 ? "no clone pairs available (every problem has one snippet)"
                                   : "no non-clone pairs available (fewer than two problems)");

  std::uint64_t want_clone = std::min<std::uint64_t>(n_clone_avail, (n_pairs + 1) / 2);
  std::uint64_t want_non =
      std::min<std::uint64_t>({n_non_avail, n_pairs - want_clone, want_clone + 1});
  want_clone = std::min(want_clone, want_non + 1);

  Rng rng(seed);
  std::vector<LabeledPair> out;
  auto ref = [](const Snippet &s) { return SnippetRef{s.problem, s.id}; };
  for (std::uint64_t idx : sample_distinct(n_clone_avail, want_clone, rng)) {
    std::size_t g = static_cast<std::size_t>(
        std::upper_bound(clone_cum.begin(), clone_cum.end(), idx) - clone_cum.begin() - 1);
    auto [i, j] = triangular(idx - clone_cum[g], groups[g]->size());
    out.push_back({ref((*groups[g])[i]), ref((*groups[g])[j]), true});
  }
  for (std::uint64_t idx : sample_distinct(n_non_avail, want_non, rng)) {
    std::size_t c = static_cast<std::size_t>(
        std::upper_bound(cross_cum.begin(), cross_cum.end(), idx) - cross_cum.begin() - 1);
    const std::uint64_t local = idx - cross_cum[c];
    const auto &gp = *groups[cross[c].p];
    const auto &gq = *groups[cross[c].q];
    out.push_back({ref(gp[local / gq.size()]), ref(gq[local % gq.size()]), false});
  }
  rng.shuffle(out);
  return out;
}

std::string format_pairs(std::span<const LabeledPair> pairs) {
  std::string out;
  for (const auto &p : pairs)
    out += p.a.key() + " " + p.b.key() + " " + (p.is_clone ? "clone" : "nonclone") + "\n";
  return out;
}

std::vector<LabeledPair> parse_pairs(std::string_view text) {
  std::vector<LabeledPair> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t number = 0;
  auto split_key = [&](const std::string &key) {
    auto slash = key.find('/');
    if (slash == std::string::npos)
      throw Error(ErrorCode::InvalidArgument,
                  "pair line " + std::to_string(number) + ": bad snippet key '" + key + "'");
    return SnippetRef{key.substr(0, slash), key.substr(slash + 1)};
  };
  while (std::getline(in, line)) {
    ++number;
    const auto body = trim(line);
    if (body.empty() || body.front() == '#')
      continue;
    std::istringstream fields(line);
    std::string a, b, label;
    if (!(fields >> a >> b >> label) || (label != "clone" && label != "nonclone"))
      throw Error(ErrorCode::InvalidArgument, "pair line " + std::to_string(number) +
                                                  ": expected 'A B clone|nonclone'");
    out.push_back({split_key(a), split_key(b), label == "clone"});
  }
  return out;
}

} // namespace seed::corpus
