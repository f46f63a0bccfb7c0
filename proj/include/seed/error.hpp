// Licensed under the Apache License, Version 2.0.
// SPDX-License-Identifier: Apache-2.0

#ifndef SEED_ERROR_HPP
#define SEED_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace seed {

enum class ErrorCode {
  InvalidArgument,
  Io,
  MalformedIr,
  UnsupportedInstruction,
  EmptyGraph,
  EmptyCorpus,
  InsufficientPairs,
  OverlappingSplit,
  DegenerateData,
  Checkpoint,
};

const char *error_code_name(ErrorCode code);

/// Base for every error raised by the library. The C layer maps `code()` onto
/// its status enum.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string &message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

class MalformedIr : public Error {
public:
  MalformedIr(std::size_t line, const std::string &message)
      : Error(ErrorCode::MalformedIr,
              "line " + std::to_string(line) + ": " + message),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

class UnsupportedInstruction : public Error {
public:
  UnsupportedInstruction(std::string opcode, std::size_t line = 0)
      : Error(ErrorCode::UnsupportedInstruction,
              (line ? "line " + std::to_string(line) + ": " : std::string()) +
                  "unsupported instruction '" + opcode + "'"),
        opcode_(std::move(opcode)), line_(line) {}

  const std::string &opcode() const noexcept { return opcode_; }
  std::size_t line() const noexcept { return line_; }

private:
  std::string opcode_;
  std::size_t line_;
};

} // namespace seed

#endif // SEED_ERROR_HPP
