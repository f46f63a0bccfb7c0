// Licensed under the Apache License, Version 2.0.
// SPDX-License-Identifier: Apache-2.0

#include "seed/error.hpp"

namespace seed {

const char *error_code_name(ErrorCode code) {
  switch (code) {
  case ErrorCode::InvalidArgument: return "InvalidArgument";
  case ErrorCode::Io: return "Io";
  case ErrorCode::MalformedIr: return "MalformedIr";
  case ErrorCode::UnsupportedInstruction: return "UnsupportedInstruction";
  case ErrorCode::EmptyGraph: return "EmptyGraph";
  case ErrorCode::EmptyCorpus: return "EmptyCorpus";
  case ErrorCode::InsufficientPairs: return "InsufficientPairs";
  case ErrorCode::OverlappingSplit: return "OverlappingSplit";
  case ErrorCode::DegenerateData: return "DegenerateData";
  case ErrorCode::Checkpoint: return "Checkpoint";
  }
  return "Unknown";
}

} // namespace seed
