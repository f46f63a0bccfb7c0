// Licensed under the Apache License, Version 2.0.
// SPDX-License-Identifier: Apache-2.0

#include "seed/model.hpp"

#include "seed/error.hpp"
#include "seed/rng.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace seed {

namespace {

using Eigen::Index;

template <typename Params, typename View>
std::vector<View> collect(Params &p) {
  auto view = [](const char *name, auto &t) {
    return View{name, const_cast<double *>(t.data()), t.rows(), t.cols()};
  };
  return {view("embedding", p.embedding), view("edge", p.edge),
          view("msg", p.msg),             view("msg_rev", p.msg_rev),
          view("gru_wz", p.gru_wz),       view("gru_wr", p.gru_wr),
          view("gru_wn", p.gru_wn),       view("gru_uz", p.gru_uz),
          view("gru_ur", p.gru_ur),       view("gru_un", p.gru_un),
          view("gru_bz", p.gru_bz),       view("gru_br", p.gru_br),
          view("gru_bn", p.gru_bn),       view("gate_w", p.gate_w),
          view("gate_b", p.gate_b),       view("proj_w", p.proj_w),
          view("proj_b", p.proj_b),       view("out1_w", p.out1_w),
          view("out1_b", p.out1_b),       view("out2_w", p.out2_w),
          view("out2_b", p.out2_b)};
}

void glorot(Eigen::MatrixXd &m, Rng &rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i)
      m(i, j) = rng.uniform(-a, a);
}

} // namespace

ModelParams ModelParams::zeros(std::size_t vocab, std::size_t dim) {
  const Index d = static_cast<Index>(dim);
  ModelParams p;
  p.embedding = Eigen::MatrixXd::Zero(static_cast<Index>(vocab), d);
  p.edge = Eigen::MatrixXd::Zero(2, d);
  p.msg = p.msg_rev = Eigen::MatrixXd::Zero(d, 2 * d);
  p.gru_wz = p.gru_wr = p.gru_wn = Eigen::MatrixXd::Zero(d, 2 * d);
  p.gru_uz = p.gru_ur = p.gru_un = Eigen::MatrixXd::Zero(d, d);
  p.gru_bz = p.gru_br = p.gru_bn = Eigen::VectorXd::Zero(d);
  p.gate_w = p.proj_w = p.out1_w = p.out2_w = Eigen::MatrixXd::Zero(d, d);
  p.gate_b = p.proj_b = p.out1_b = p.out2_b = Eigen::VectorXd::Zero(d);
  return p;
}

ModelParams ModelParams::initialize(std::size_t vocab, std::size_t dim,
                                    std::uint64_t seed) {
  ModelParams p = zeros(vocab, dim);
  Rng rng(seed);
  for (Index j = 0; j < p.embedding.cols(); ++j)
    for (Index i = 0; i < p.embedding.rows(); ++i)
      p.embedding(i, j) = rng.uniform(-0.1, 0.1);
  for (Index j = 0; j < p.edge.cols(); ++j)
    for (Index i = 0; i < p.edge.rows(); ++i)
      p.edge(i, j) = 1.0 + rng.uniform(-0.1, 0.1);
  for (auto *m : {&p.msg, &p.msg_rev, &p.gru_wz, &p.gru_wr, &p.gru_wn, &p.gru_uz,
                  &p.gru_ur, &p.gru_un, &p.gate_w, &p.proj_w, &p.out1_w, &p.out2_w})
    glorot(*m, rng);
  return p;
}

std::vector<TensorView> ModelParams::tensors() {
  return collect<ModelParams, TensorView>(*this);
}

std::vector<TensorView> ModelParams::tensors() const {
  return collect<const ModelParams, TensorView>(*this);
}

void ModelParams::set_zero() {
  for (auto &t : tensors())
    t.matrix().setZero();
}

void ModelParams::add_scaled(const ModelParams &other, double scale) {
  auto mine = tensors();
  auto theirs = other.tensors();
  for (std::size_t i = 0; i < mine.size(); ++i) {
    if (mine[i].rows != theirs[i].rows || mine[i].cols != theirs[i].cols)
      throw Error(ErrorCode::InvalidArgument,
                  std::string("shape mismatch in tensor ") + mine[i].name);
    mine[i].matrix() += scale * theirs[i].matrix();
  }
}

std::size_t ModelParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto &t : tensors())
    n += static_cast<std::size_t>(t.size());
  return n;
}

bool ModelParams::all_finite() const {
  for (const auto &t : tensors())
    if (!t.matrix().allFinite())
      return false;
  return true;
}

bool operator==(const ModelParams &a, const ModelParams &b) {
  auto ta = a.tensors();
  auto tb = b.tensors();
  for (std::size_t i = 0; i < ta.size(); ++i) {
    if (ta[i].rows != tb[i].rows || ta[i].cols != tb[i].cols)
      return false;
    if (ta[i].matrix() != tb[i].matrix())
      return false;
  }
  return true;
}

std::string Checkpoint::config_value(const std::string &key,
                                     const std::string &fallback) const {
  for (const auto &[k, v] : config)
    if (k == key)
      return v;
  return fallback;
}

//===----------------------------------------------------------------------===//
// Serialization
//===----------------------------------------------------------------------===//

namespace {

constexpr const char *kMagic = "SEED-CHECKPOINT";

std::string hex_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::hex);
  return std::string(buf, ptr);
}

double parse_hex_double(const std::string &s) {
  double v = 0;
  const char *first = s.data();
  const char *last = s.data() + s.size();
  bool negative = first != last && *first == '-';
  if (negative)
    ++first;
  auto [ptr, ec] = std::from_chars(first, last, v, std::chars_format::hex);
  if (ec != std::errc() || ptr != last)
    throw Error(ErrorCode::Checkpoint, "malformed tensor value '" + s + "'");
  return negative ? -v : v;
}

std::string read_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(ErrorCode::Io, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

[[noreturn]] void corrupt(const std::string &what) {
  throw Error(ErrorCode::Checkpoint, "invalid checkpoint: " + what);
}

} // namespace

void save_checkpoint(const std::filesystem::path &path, const Checkpoint &ckpt) {
  if (ckpt.params.vocab_size() != ckpt.vocab.size())
    throw Error(ErrorCode::Checkpoint, "embedding rows do not match vocabulary size");
  std::filesystem::path vocab_path = path;
  vocab_path += ".vocab";
  {
    std::ofstream v(vocab_path, std::ios::binary);
    if (!v)
      throw Error(ErrorCode::Io, "cannot write " + vocab_path.string());
    v << ckpt.vocab.serialize();
  }
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error(ErrorCode::Io, "cannot write " + path.string());
  char fp[32];
  std::snprintf(fp, sizeof fp, "%016llx",
                static_cast<unsigned long long>(ckpt.vocab.fingerprint()));
  out << kMagic << ' ' << Checkpoint::kFormatVersion << '\n';
  out << "vocab " << vocab_path.filename().string() << ' ' << fp << ' '
      << ckpt.vocab.size() << '\n';
  out << "threshold " << hex_double(ckpt.threshold) << '\n';
  out << "config " << ckpt.config.size() << '\n';
  for (const auto &[k, v] : ckpt.config)
    out << k << '=' << v << '\n';
  const auto tensors = ckpt.params.tensors();
  out << "tensors " << tensors.size() << '\n';
  for (const auto &t : tensors) {
    out << "tensor " << t.name << ' ' << t.rows << ' ' << t.cols << '\n';
    auto m = t.matrix();
    for (Index i = 0; i < t.rows; ++i) {
      for (Index j = 0; j < t.cols; ++j)
        out << (j ? " " : "") << hex_double(m(i, j));
      out << '\n';
    }
  }
  out << "end\n";
  if (!out)
    throw Error(ErrorCode::Io, "failed writing " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path &path) {
  std::istringstream in(read_file(path));
  std::string magic, word;
  int version = 0;
  if (!(in >> magic >> version) || magic != kMagic)
    corrupt("missing header in " + path.string());
  if (version != Checkpoint::kFormatVersion)
    corrupt("unsupported format version " + std::to_string(version));

  std::string vocab_file, fingerprint;
  std::size_t vocab_size = 0;
  if (!(in >> word >> vocab_file >> fingerprint >> vocab_size) || word != "vocab")
    corrupt("missing vocabulary reference");

  Checkpoint ckpt;
  std::string threshold;
  if (!(in >> word >> threshold) || word != "threshold")
    corrupt("missing threshold");
  ckpt.threshold = parse_hex_double(threshold);

  std::size_t n_config = 0;
  if (!(in >> word >> n_config) || word != "config")
    corrupt("missing config block");
  std::getline(in, word);
  for (std::size_t i = 0; i < n_config; ++i) {
    std::string line;
    if (!std::getline(in, line))
      corrupt("truncated config block");
    auto eq = line.find('=');
    if (eq == std::string::npos)
      corrupt("bad config line '" + line + "'");
    ckpt.config.emplace_back(line.substr(0, eq), line.substr(eq + 1));
  }

  const auto vocab_path = path.parent_path() / vocab_file;
  if (!std::filesystem::is_regular_file(vocab_path))
    corrupt("referenced vocabulary file " + vocab_path.string() + " is missing");
  ckpt.vocab = encoding::Vocabulary::deserialize(read_file(vocab_path));
  char fp[32];
  std::snprintf(fp, sizeof fp, "%016llx",
                static_cast<unsigned long long>(ckpt.vocab.fingerprint()));
  if (fingerprint != fp || ckpt.vocab.size() != vocab_size)
    corrupt("vocabulary file " + vocab_file +
            " does not match the checkpoint (fingerprint or size differs)");

  std::size_t n_tensors = 0;
  if (!(in >> word >> n_tensors) || word != "tensors")
    corrupt("missing tensor block");

  std::size_t dim = 0;
  // The embedding is stored first and fixes the expected shapes.
  std::vector<std::tuple<std::string, Index, Index, std::vector<double>>> raw;
  for (std::size_t k = 0; k < n_tensors; ++k) {
    std::string name;
    Index rows = 0, cols = 0;
    if (!(in >> word >> name >> rows >> cols) || word != "tensor")
      corrupt("bad tensor header");
    std::vector<double> values(static_cast<std::size_t>(rows * cols));
    for (Index i = 0; i < rows; ++i)
      for (Index j = 0; j < cols; ++j) {
        std::string v;
        if (!(in >> v))
          corrupt("truncated tensor " + name);
        values[static_cast<std::size_t>(i * cols + j)] = parse_hex_double(v);
      }
    if (k == 0)
      dim = static_cast<std::size_t>(cols);
    raw.emplace_back(name, rows, cols, std::move(values));
  }
  if (!(in >> word) || word != "end")
    corrupt("missing end marker");

  ckpt.params = ModelParams::zeros(ckpt.vocab.size(), dim);
  auto views = ckpt.params.tensors();
  if (raw.size() != views.size())
    corrupt("expected " + std::to_string(views.size()) + " tensors, found " +
            std::to_string(raw.size()));
  for (std::size_t k = 0; k < views.size(); ++k) {
    const auto &[name, rows, cols, values] = raw[k];
    if (name != views[k].name)
      corrupt("tensor " + std::to_string(k) + " is '" + name + "', expected '" +
              views[k].name + "'");
    if (rows != views[k].rows || cols != views[k].cols)
      corrupt("tensor '" + name + "' has shape " + std::to_string(rows) + "x" +
              std::to_string(cols) + ", expected " + std::to_string(views[k].rows) +
              "x" + std::to_string(views[k].cols));
    auto m = views[k].matrix();
    for (Index i = 0; i < rows; ++i)
      for (Index j = 0; j < cols; ++j)
        m(i, j) = values[static_cast<std::size_t>(i * cols + j)];
  }
  return ckpt;
}

} // namespace seed
