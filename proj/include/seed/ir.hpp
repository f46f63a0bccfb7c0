// Licensed under the Apache License, Version 2.0.
// SPDX-License-Identifier: Apache-2.0

#ifndef SEED_IR_HPP
#define SEED_IR_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace seed::ir {

enum class InstrKind { Operator, ApiCall, Branch, Return, Phi };

const char *instr_kind_name(InstrKind kind);

enum class OperandKind { Value, Constant, Label, Input };

/// One instruction operand. `name` holds the SSA value name, the block label,
/// the parameter name, or the constant literal depending on `kind`; names are
/// stored without their `%` sigil. `dtype` is the normalized type token the
/// operand was written with (empty for labels).
struct Operand {
  OperandKind kind = OperandKind::Value;
  std::string name;
  std::string dtype;

  static Operand value(std::string name, std::string dtype = {}) {
    return {OperandKind::Value, std::move(name), std::move(dtype)};
  }
  static Operand constant(std::string literal, std::string dtype = {}) {
    return {OperandKind::Constant, std::move(literal), std::move(dtype)};
  }
  static Operand label(std::string name) {
    return {OperandKind::Label, std::move(name), {}};
  }
  static Operand input(std::string name, std::string dtype) {
    return {OperandKind::Input, std::move(name), std::move(dtype)};
  }

  friend bool operator==(const Operand &, const Operand &) = default;
};

struct Instruction {
  InstrKind kind = InstrKind::Operator;
  /// Opcode for operators (`add`, `icmp.sgt`, ...) or callee name for calls.
  std::string opcode;
  std::optional<std::string> result;
  std::vector<Operand> operands;
  /// Result type for value-producing instructions, stored type for `store`,
  /// returned type for `ret`.
  std::optional<std::string> dtype;
  /// 1-based source line; not part of structural equality.
  std::size_t line = 0;

  friend bool operator==(const Instruction &a, const Instruction &b) {
    return a.kind == b.kind && a.opcode == b.opcode && a.result == b.result &&
           a.operands == b.operands && a.dtype == b.dtype;
  }
};

struct BasicBlock {
  std::string label;
  std::vector<Instruction> instructions;

  friend bool operator==(const BasicBlock &, const BasicBlock &) = default;
};

struct Param {
  std::string name;
  std::string dtype;

  friend bool operator==(const Param &, const Param &) = default;
};

struct IrFunction {
  std::string name;
  std::vector<Param> params;
  std::vector<BasicBlock> blocks;

  std::size_t instruction_count() const;

  friend bool operator==(const IrFunction &, const IrFunction &) = default;
};

struct ParseOptions {
  /// Raise on unsupported instructions instead of dropping them.
  bool strict = false;
};

/// Parses every function definition in a textual IR module. Declarations,
/// globals, metadata and attribute groups are skipped.
std::vector<IrFunction> parse_module(std::string_view source,
                                     const ParseOptions &options = {});

/// Parses a single instruction line. Operands naming values are returned as
/// `Value` operands; `parse_module` later rewrites parameter references to
/// `Input` operands.
Instruction parse_instruction(std::string_view line);

/// Normalizes a textual IR type (`i8*`, `[4 x i32]`, `%struct.s`) into the
/// type token used throughout the pipeline.
std::string normalize_type(std::string_view type_text);

/// Prints a function in the canonical textual form accepted by parse_module.
std::string print_function(const IrFunction &function);
std::string print_module(const std::vector<IrFunction> &functions);
/// Structural JSON dump: functions, params, blocks and instructions.
std::string module_to_json(const std::vector<IrFunction> &functions);

/// Checks the function-level invariants (terminators, SSA uniqueness, label
/// resolution). Throws MalformedIr on violation.
void validate_function(const IrFunction &function);

} // namespace seed::ir

#endif // SEED_IR_HPP
