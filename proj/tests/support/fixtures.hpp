// Licensed under the Apache License, Version 2.0.
// SPDX-License-Identifier: Apache-2.0

#ifndef SEED_TESTS_FIXTURES_HPP
#define SEED_TESTS_FIXTURES_HPP

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <unistd.h>

#ifndef SEED_FIXTURE_DIR
#error "SEED_FIXTURE_DIR must point at tests/fixtures"
#endif

namespace seed::testing {

inline std::filesystem::path fixture_dir() { return SEED_FIXTURE_DIR; }

inline std::string read_file(const std::filesystem::path &p) {
  std::ifstream in(p, std::ios::binary);
  if (!in)
    throw std::runtime_error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string read_fixture(const std::string &name) {
  return read_file(fixture_dir() / name);
}

/// Every `.ll` fixture, sorted.
inline std::vector<std::string> fixture_names() {
  std::vector<std::string> out;
  for (const auto &e : std::filesystem::directory_iterator(fixture_dir()))
    if (e.path().extension() == ".ll")
      out.push_back(e.path().filename().string());
  std::sort(out.begin(), out.end());
  return out;
}

/// Scratch directory removed on destruction.
class TempDir {
public:
  explicit TempDir(const std::string &tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("seed-test-" + tag + "-" + std::to_string(::getpid()) + "-" +
             std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir &) = delete;
  TempDir &operator=(const TempDir &) = delete;

  const std::filesystem::path &path() const { return path_; }

private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path &p, const std::string &text) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << text;
  if (!out)
    throw std::runtime_error("cannot write " + p.string());
}

} // namespace seed::testing

#endif // SEED_TESTS_FIXTURES_HPP
