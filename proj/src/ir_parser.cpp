// Licensed under the Apache License, Version 2.0.
// SPDX-License-Identifier: Apache-2.0

#include "seed/ir.hpp"

#include "seed/error.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <unordered_set>

namespace seed::ir {

namespace {

//===----------------------------------------------------------------------===//
// Lexing
//===----------------------------------------------------------------------===//

enum class Tok { Local, Global, Word, Int, Float, String, Punct, Meta, AttrRef };

struct Token {
  Tok kind;
  std::string text;

  bool is(Tok k, std::string_view t) const { return kind == k && text == t; }
  bool punct(std::string_view t) const { return is(Tok::Punct, t); }
  bool word(std::string_view t) const { return is(Tok::Word, t); }
};

using Tokens = std::vector<Token>;

bool is_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' ||
         c == '$' || c == '-';
}

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' ||
         c == '$';
}

class Lexer {
public:
  Lexer(std::string_view text, std::size_t line) : text_(text), line_(line) {}

  Tokens run() {
    Tokens out;
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else if (c == ';') {
        break;
      } else if (c == '%' || c == '@') {
        ++pos_;
        out.push_back({c == '%' ? Tok::Local : Tok::Global, name()});
      } else if (c == '!') {
        ++pos_;
        std::string n = peek() == '"' ? quoted() : run_of(is_word_char);
        out.push_back({Tok::Meta, "!" + n});
      } else if (c == '#') {
        ++pos_;
        out.push_back({Tok::AttrRef, run_of(is_word_char)});
      } else if (c == 'c' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '"') {
        ++pos_;
        out.push_back({Tok::String, quoted()});
      } else if (c == '"') {
        out.push_back({Tok::String, quoted()});
      } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                 (c == '-' && pos_ + 1 < text_.size() &&
                  std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])))) {
        out.push_back(number());
      } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' ||
                 c == '$') {
        out.push_back({Tok::Word, run_of(is_word_char)});
      } else if (text_.substr(pos_, 3) == "...") {
        pos_ += 3;
        out.push_back({Tok::Punct, "..."});
      } else if (std::string_view("()[]{}<>,=*:").find(c) !=
                 std::string_view::npos) {
        ++pos_;
        out.push_back({Tok::Punct, std::string(1, c)});
      } else {
        throw MalformedIr(line_, std::string("unexpected character '") + c +
                                     "'");
      }
    }
    return out;
  }

private:
  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  template <typename Pred> std::string run_of(Pred pred) {
    std::size_t start = pos_;
    while (pos_ < text_.size() && pred(text_[pos_]))
      ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }

  std::string quoted() {
    ++pos_; // opening quote
    std::size_t start = pos_;
    while (pos_ < text_.size() && text_[pos_] != '"')
      ++pos_;
    if (pos_ >= text_.size())
      throw MalformedIr(line_, "unterminated string");
    std::string s(text_.substr(start, pos_ - start));
    ++pos_;
    return s;
  }

  std::string name() {
    if (peek() == '"')
      return quoted();
    std::string n = run_of(is_name_char);
    if (n.empty())
      throw MalformedIr(line_, "empty value name");
    return n;
  }

  Token number() {
    std::size_t start = pos_;
    bool is_float = false;
    if (peek() == '-')
      ++pos_;
    if (text_.substr(pos_, 2) == "0x") {
      pos_ += 2;
      run_of([](char c) { return std::isxdigit(static_cast<unsigned char>(c)) ||
                                 c == 'K' || c == 'L' || c == 'M' || c == 'H' ||
                                 c == 'R'; });
      is_float = true;
    } else {
      run_of([](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
      if (peek() == '.') {
        is_float = true;
        ++pos_;
        run_of([](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
      }
      if (peek() == 'e' || peek() == 'E') {
        is_float = true;
        ++pos_;
        if (peek() == '+' || peek() == '-')
          ++pos_;
        run_of([](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
      }
    }
    return {is_float ? Tok::Float : Tok::Int,
            std::string(text_.substr(start, pos_ - start))};
  }

  std::string_view text_;
  std::size_t line_;
  std::size_t pos_ = 0;
};

//===----------------------------------------------------------------------===//
// Token-level helpers
//===----------------------------------------------------------------------===//

bool is_open(const Token &t) {
  return t.kind == Tok::Punct &&
         (t.text == "(" || t.text == "[" || t.text == "{" || t.text == "<");
}
bool is_close(const Token &t) {
  return t.kind == Tok::Punct &&
         (t.text == ")" || t.text == "]" || t.text == "}" || t.text == ">");
}

/// Index one past the bracket group starting at `open`.
std::size_t skip_balanced(const Tokens &toks, std::size_t open,
                          std::size_t line) {
  int depth = 0;
  for (std::size_t i = open; i < toks.size(); ++i) {
    if (is_open(toks[i]))
      ++depth;
    else if (is_close(toks[i]) && --depth == 0)
      return i + 1;
  }
  throw MalformedIr(line, "unbalanced brackets");
}

std::vector<Tokens> split_groups(const Tokens &toks, std::size_t begin,
                                 std::size_t end) {
  std::vector<Tokens> groups;
  Tokens current;
  int depth = 0;
  for (std::size_t i = begin; i < end; ++i) {
    const Token &t = toks[i];
    if (is_open(t))
      ++depth;
    else if (is_close(t))
      --depth;
    if (depth == 0 && t.punct(",")) {
      groups.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(t);
    }
  }
  if (!current.empty() || !groups.empty())
    groups.push_back(std::move(current));
  return groups;
}

/// Drops trailing metadata attachments, alignment and similar annotations.
void drop_annotations(std::vector<Tokens> &groups) {
  static const std::set<std::string, std::less<>> annotation_words = {
      "align", "addrspace", "syncscope", "inrange"};
  std::erase_if(groups, [](const Tokens &g) {
    return g.empty() || g.front().kind == Tok::Meta ||
           g.front().kind == Tok::AttrRef ||
           (g.front().kind == Tok::Word &&
            annotation_words.count(g.front().text));
  });
}

const std::set<std::string, std::less<>> &scalar_type_words() {
  static const std::set<std::string, std::less<>> words = {
      "half",   "bfloat", "float", "double", "x86_fp80", "fp128", "ppc_fp128",
      "void",   "ptr",    "label", "metadata", "token",  "array", "struct",
      "vector", "opaque", "x86_mmx", "fnty"};
  return words;
}

bool is_int_type_word(std::string_view w) {
  return w.size() > 1 && w[0] == 'i' &&
         std::all_of(w.begin() + 1, w.end(),
                     [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

bool is_type_word(std::string_view w) {
  return is_int_type_word(w) || scalar_type_words().count(w) > 0;
}

bool starts_type(const Tokens &toks, std::size_t i) {
  if (i >= toks.size())
    return false;
  const Token &t = toks[i];
  if (t.kind == Tok::Word)
    return is_type_word(t.text);
  if (t.kind == Tok::Local)
    return true; // named struct type
  return t.punct("[") || t.punct("{") || t.punct("<");
}

/// Parses a type starting at `pos`; returns the normalized token.
std::string parse_type(const Tokens &toks, std::size_t &pos, std::size_t line) {
  if (!starts_type(toks, pos))
    throw MalformedIr(line, "expected a type");
  std::string result;
  const Token &t = toks[pos];
  if (t.kind == Tok::Word) {
    result = t.text;
    ++pos;
  } else if (t.kind == Tok::Local) {
    result = "struct";
    ++pos;
  } else {
    bool packed = t.punct("<") && pos + 1 < toks.size() && toks[pos + 1].punct("{");
    result = t.punct("[") ? "array" : (t.punct("{") || packed) ? "struct" : "vector";
    pos = skip_balanced(toks, pos, line);
  }
  for (;;) {
    if (pos < toks.size() && toks[pos].punct("*")) {
      result = "ptr";
      ++pos;
    } else if (pos + 1 < toks.size() && toks[pos].word("addrspace") &&
               toks[pos + 1].punct("(")) {
      pos = skip_balanced(toks, pos + 1, line);
    } else if (pos < toks.size() && toks[pos].punct("(")) {
      // Function type; only meaningful as a pointee.
      std::size_t after = skip_balanced(toks, pos, line);
      if (after < toks.size() && toks[after].punct("*")) {
        pos = after;
        continue;
      }
      break;
    } else {
      break;
    }
  }
  return result;
}

//===----------------------------------------------------------------------===//
// Instruction parsing
//===----------------------------------------------------------------------===//

struct Context {
  const std::unordered_set<std::string> *string_globals = nullptr;
  std::size_t line = 0;
};

std::string global_placeholder(const std::string &name, const Context &ctx) {
  if (name == "str" || name.rfind(".str", 0) == 0 ||
      (ctx.string_globals && ctx.string_globals->count(name)))
    return "@str";
  if (name == "const")
    return "@const";
  return "@global";
}

const std::set<std::string, std::less<>> &literal_words() {
  static const std::set<std::string, std::less<>> words = {
      "true", "false", "null", "undef", "poison", "zeroinitializer", "none"};
  return words;
}

/// Extracts the operand value sitting at the end of `g[from..]`.
std::optional<Operand> extract_value(const Tokens &g, std::size_t from,
                                     const std::string &dtype,
                                     const Context &ctx) {
  if (from >= g.size())
    return std::nullopt;
  const Token &last = g.back();
  switch (last.kind) {
  case Tok::Local:
    return Operand::value(last.text, dtype);
  case Tok::Global:
    return Operand::constant(global_placeholder(last.text, ctx), dtype);
  case Tok::Int:
  case Tok::Float:
    return Operand::constant(last.text, dtype);
  case Tok::String:
    return Operand::constant("@str", dtype);
  case Tok::Word:
    if (literal_words().count(last.text))
      return Operand::constant(last.text, dtype);
    return std::nullopt;
  case Tok::Punct:
    if (last.punct(")")) {
      // Constant expression such as getelementptr (..., @.str, ...).
      for (std::size_t i = from; i < g.size(); ++i)
        if (g[i].kind == Tok::Global)
          return Operand::constant(global_placeholder(g[i].text, ctx), dtype);
      return Operand::constant("@const", dtype);
    }
    if (is_close(last))
      return Operand::constant("@const", dtype);
    return std::nullopt;
  default:
    return std::nullopt;
  }
}

Operand require_value(const Tokens &g, std::size_t from, const std::string &dtype,
                      const Context &ctx) {
  auto op = extract_value(g, from, dtype, ctx);
  if (!op)
    throw MalformedIr(ctx.line, "expected an operand value");
  return *op;
}

/// `<type> [attrs] <value>` group.
Operand typed_value(const Tokens &g, const Context &ctx) {
  std::size_t pos = 0;
  std::string dtype = parse_type(g, pos, ctx.line);
  if (dtype == "label") {
    if (g.size() != pos + 1 || g[pos].kind != Tok::Local)
      throw MalformedIr(ctx.line, "expected a label reference");
    return Operand::label(g[pos].text);
  }
  return require_value(g, pos, dtype, ctx);
}

const std::set<std::string, std::less<>> &binary_opcodes() {
  static const std::set<std::string, std::less<>> ops = {
      "add",  "sub",  "mul",  "udiv", "sdiv", "urem", "srem", "fadd", "fsub",
      "fmul", "fdiv", "frem", "shl",  "lshr", "ashr", "and",  "or",   "xor"};
  return ops;
}

const std::set<std::string, std::less<>> &conversion_opcodes() {
  static const std::set<std::string, std::less<>> ops = {
      "trunc",  "zext",   "sext",     "fptrunc",  "fpext",   "fptoui", "fptosi",
      "uitofp", "sitofp", "ptrtoint", "inttoptr", "bitcast", "addrspacecast"};
  return ops;
}

const std::set<std::string, std::less<>> &modifier_words() {
  static const std::set<std::string, std::less<>> words = {
      "nsw",      "nuw",     "exact",    "fast", "nnan",    "ninf",
      "nsz",      "arcp",    "contract", "afn",  "reassoc", "disjoint",
      "nneg",     "inbounds", "volatile", "samesign", "nusw", "inalloca"};
  return words;
}

/// Calls to these intrinsics are debug bookkeeping and carry no semantics.
bool is_ignorable_callee(std::string_view callee) {
  return callee.rfind("llvm.dbg.", 0) == 0 ||
         callee.rfind("llvm.lifetime.", 0) == 0 ||
         callee.rfind("llvm.experimental.noalias", 0) == 0;
}

struct Ignorable {};

class InstructionParser {
public:
  InstructionParser(Tokens toks, const Context &ctx)
      : toks_(std::move(toks)), ctx_(ctx) {}

  /// Returns nullopt for ignorable lines (debug intrinsics).
  std::optional<Instruction> parse() {
    Instruction inst;
    inst.line = ctx_.line;
    if (toks_.size() >= 2 && toks_[0].kind == Tok::Local && toks_[1].punct("=")) {
      inst.result = toks_[0].text;
      pos_ = 2;
    }
    while (pos_ < toks_.size() &&
           (toks_[pos_].word("tail") || toks_[pos_].word("musttail") ||
            toks_[pos_].word("notail")))
      ++pos_;
    if (pos_ >= toks_.size() || toks_[pos_].kind != Tok::Word)
      throw MalformedIr(ctx_.line, "expected an opcode");
    const std::string opcode = toks_[pos_++].text;

    if (binary_opcodes().count(opcode)) {
      parse_binary(inst, opcode);
    } else if (opcode == "fneg") {
      skip_modifiers();
      std::string dtype = parse_type(toks_, pos_, ctx_.line);
      inst.opcode = opcode;
      inst.operands.push_back(require_value(rest_groups().at(0), 0, dtype, ctx_));
      inst.dtype = dtype;
    } else if (opcode == "icmp" || opcode == "fcmp") {
      parse_compare(inst, opcode);
    } else if (conversion_opcodes().count(opcode)) {
      parse_conversion(inst, opcode);
    } else if (opcode == "load") {
      parse_load(inst);
    } else if (opcode == "store") {
      parse_store(inst);
    } else if (opcode == "alloca") {
      parse_alloca(inst);
    } else if (opcode == "getelementptr") {
      parse_gep(inst);
    } else if (opcode == "select") {
      parse_select(inst);
    } else if (opcode == "phi") {
      parse_phi(inst);
    } else if (opcode == "call") {
      if (!parse_call(inst))
        return std::nullopt;
    } else if (opcode == "br") {
      parse_br(inst);
    } else if (opcode == "switch") {
      parse_switch(inst);
    } else if (opcode == "ret") {
      parse_ret(inst);
    } else if (opcode == "unreachable") {
      inst.kind = InstrKind::Return;
      inst.opcode = opcode;
    } else {
      throw UnsupportedInstruction(opcode, ctx_.line);
    }
    if (inst.kind == InstrKind::Operator && inst.opcode != "alloca" &&
        inst.operands.empty())
      throw MalformedIr(ctx_.line, "operator '" + inst.opcode + "' has no operands");
    return inst;
  }

private:
  void skip_modifiers() {
    while (pos_ < toks_.size() && toks_[pos_].kind == Tok::Word &&
           modifier_words().count(toks_[pos_].text))
      ++pos_;
  }

  std::vector<Tokens> rest_groups() {
    auto groups = split_groups(toks_, pos_, toks_.size());
    drop_annotations(groups);
    return groups;
  }

  void expect_groups(const std::vector<Tokens> &groups, std::size_t n,
                     std::string_view what) {
    if (groups.size() != n)
      throw MalformedIr(ctx_.line, std::string(what) + " expects " +
                                       std::to_string(n) + " operands");
  }

  void parse_binary(Instruction &inst, const std::string &opcode) {
    skip_modifiers();
    std::string dtype = parse_type(toks_, pos_, ctx_.line);
    auto groups = rest_groups();
    expect_groups(groups, 2, opcode);
    inst.opcode = opcode;
    inst.dtype = dtype;
    for (const auto &g : groups)
      inst.operands.push_back(require_value(g, 0, dtype, ctx_));
  }

  void parse_compare(Instruction &inst, const std::string &opcode) {
    skip_modifiers();
    if (pos_ >= toks_.size() || toks_[pos_].kind != Tok::Word)
      throw MalformedIr(ctx_.line, "expected a comparison predicate");
    inst.opcode = opcode + "." + toks_[pos_++].text;
    std::string dtype = parse_type(toks_, pos_, ctx_.line);
    auto groups = rest_groups();
    expect_groups(groups, 2, opcode);
    for (const auto &g : groups)
      inst.operands.push_back(require_value(g, 0, dtype, ctx_));
    inst.dtype = "i1";
  }

  void parse_conversion(Instruction &inst, const std::string &opcode) {
    skip_modifiers();
    auto to = std::find_if(toks_.begin() + static_cast<std::ptrdiff_t>(pos_),
                           toks_.end(), [](const Token &t) { return t.word("to"); });
    if (to == toks_.end())
      throw MalformedIr(ctx_.line, "conversion without 'to'");
    std::size_t to_pos = static_cast<std::size_t>(to - toks_.begin());
    Tokens source(toks_.begin() + static_cast<std::ptrdiff_t>(pos_), to);
    inst.opcode = opcode;
    inst.operands.push_back(typed_value(source, ctx_));
    std::size_t p = to_pos + 1;
    inst.dtype = parse_type(toks_, p, ctx_.line);
  }

  void parse_load(Instruction &inst) {
    if (pos_ < toks_.size() && toks_[pos_].word("atomic"))
      throw UnsupportedInstruction("load.atomic", ctx_.line);
    skip_modifiers();
    auto groups = rest_groups();
    if (groups.size() != 2)
      throw MalformedIr(ctx_.line, "load expects a type and a pointer");
    std::size_t p = 0;
    inst.opcode = "load";
    inst.dtype = parse_type(groups[0], p, ctx_.line);
    inst.operands.push_back(typed_value(groups[1], ctx_));
  }

  void parse_store(Instruction &inst) {
    if (pos_ < toks_.size() && toks_[pos_].word("atomic"))
      throw UnsupportedInstruction("store.atomic", ctx_.line);
    skip_modifiers();
    auto groups = rest_groups();
    expect_groups(groups, 2, "store");
    inst.opcode = "store";
    for (const auto &g : groups)
      inst.operands.push_back(typed_value(g, ctx_));
    inst.dtype = inst.operands[0].dtype;
  }

  void parse_alloca(Instruction &inst) {
    skip_modifiers();
    auto groups = rest_groups();
    if (groups.empty())
      throw MalformedIr(ctx_.line, "alloca without a type");
    inst.opcode = "alloca";
    inst.dtype = "ptr";
    for (std::size_t i = 1; i < groups.size(); ++i)
      inst.operands.push_back(typed_value(groups[i], ctx_));
  }

  void parse_gep(Instruction &inst) {
    skip_modifiers();
    auto groups = rest_groups();
    if (groups.size() < 2)
      throw MalformedIr(ctx_.line, "getelementptr expects a base pointer");
    inst.opcode = "getelementptr";
    inst.dtype = "ptr";
    for (std::size_t i = 1; i < groups.size(); ++i) {
      // Strip `inrange` style index modifiers.
      Tokens g = groups[i];
      while (!g.empty() && g.front().kind == Tok::Word &&
             modifier_words().count(g.front().text))
        g.erase(g.begin());
      inst.operands.push_back(typed_value(g, ctx_));
    }
  }

  void parse_select(Instruction &inst) {
    skip_modifiers();
    auto groups = rest_groups();
    expect_groups(groups, 3, "select");
    inst.opcode = "select";
    for (const auto &g : groups)
      inst.operands.push_back(typed_value(g, ctx_));
    inst.dtype = inst.operands[1].dtype;
  }

  void parse_phi(Instruction &inst) {
    inst.kind = InstrKind::Phi;
    inst.opcode = "phi";
    skip_modifiers();
    std::string dtype = parse_type(toks_, pos_, ctx_.line);
    inst.dtype = dtype;
    for (const auto &g : rest_groups()) {
      if (g.size() < 2 || !g.front().punct("[") || !g.back().punct("]"))
        throw MalformedIr(ctx_.line, "malformed phi incoming pair");
      auto inner = split_groups(g, 1, g.size() - 1);
      if (inner.size() != 2 || inner[1].size() != 1 ||
          inner[1][0].kind != Tok::Local)
        throw MalformedIr(ctx_.line, "malformed phi incoming pair");
      inst.operands.push_back(require_value(inner[0], 0, dtype, ctx_));
      inst.operands.push_back(Operand::label(inner[1][0].text));
    }
    if (inst.operands.size() < 2)
      throw MalformedIr(ctx_.line, "phi without incoming values");
  }

  bool parse_call(Instruction &inst) {
    inst.kind = InstrKind::ApiCall;
    // Locate the callee: the first name directly followed by '('.
    std::size_t callee = toks_.size();
    for (std::size_t i = pos_; i + 1 < toks_.size(); ++i) {
      if ((toks_[i].kind == Tok::Global || toks_[i].kind == Tok::Local) &&
          toks_[i + 1].punct("(")) {
        callee = i;
        break;
      }
      if (is_open(toks_[i]))
        i = skip_balanced(toks_, i, ctx_.line) - 1;
    }
    if (callee == toks_.size())
      throw MalformedIr(ctx_.line, "call without a callee");
    if (toks_[callee].kind == Tok::Local)
      throw UnsupportedInstruction("call.indirect", ctx_.line);
    if (is_ignorable_callee(toks_[callee].text))
      return false;

    std::string ret_type;
    for (std::size_t i = pos_; i < callee; ++i) {
      if (starts_type(toks_, i)) {
        std::size_t p = i;
        ret_type = parse_type(toks_, p, ctx_.line);
        break;
      }
      if (i + 1 < callee && toks_[i + 1].punct("("))
        i = skip_balanced(toks_, i + 1, ctx_.line) - 1;
    }
    if (ret_type.empty())
      throw MalformedIr(ctx_.line, "call without a return type");

    inst.opcode = toks_[callee].text;
    std::size_t close = skip_balanced(toks_, callee + 1, ctx_.line);
    auto groups = split_groups(toks_, callee + 2, close - 1);
    for (const auto &g : groups) {
      if (g.empty() || g.front().punct("..."))
        continue;
      inst.operands.push_back(typed_value(g, ctx_));
    }
    if (ret_type != "void")
      inst.dtype = ret_type;
    return true;
  }

  void parse_br(Instruction &inst) {
    inst.kind = InstrKind::Branch;
    inst.opcode = "br";
    auto groups = rest_groups();
    for (const auto &g : groups)
      inst.operands.push_back(typed_value(g, ctx_));
    std::size_t labels = std::count_if(
        inst.operands.begin(), inst.operands.end(),
        [](const Operand &o) { return o.kind == OperandKind::Label; });
    bool ok = (groups.size() == 1 && labels == 1) ||
              (groups.size() == 3 && labels == 2 &&
               inst.operands[0].kind != OperandKind::Label);
    if (!ok)
      throw MalformedIr(ctx_.line, "malformed br");
  }

  void parse_switch(Instruction &inst) {
    inst.kind = InstrKind::Branch;
    inst.opcode = "switch";
    std::string dtype = parse_type(toks_, pos_, ctx_.line);
    auto bracket = std::find_if(toks_.begin() + static_cast<std::ptrdiff_t>(pos_),
                                toks_.end(), [](const Token &t) { return t.punct("["); });
    std::size_t bpos = static_cast<std::size_t>(bracket - toks_.begin());
    auto groups = split_groups(toks_, pos_, bpos);
    if (groups.size() != 2)
      throw MalformedIr(ctx_.line, "malformed switch");
    inst.operands.push_back(require_value(groups[0], 0, dtype, ctx_));
    inst.operands.push_back(typed_value(groups[1], ctx_));
    if (bracket == toks_.end())
      throw MalformedIr(ctx_.line, "switch without a case table");
    std::size_t end = skip_balanced(toks_, bpos, ctx_.line);
    for (std::size_t i = bpos + 1; i + 1 < end; ++i)
      if (toks_[i].word("label") && toks_[i + 1].kind == Tok::Local)
        inst.operands.push_back(Operand::label(toks_[i + 1].text));
  }

  void parse_ret(Instruction &inst) {
    inst.kind = InstrKind::Return;
    inst.opcode = "ret";
    if (pos_ < toks_.size() && toks_[pos_].word("void")) {
      inst.dtype = "void";
      return;
    }
    auto groups = rest_groups();
    expect_groups(groups, 1, "ret");
    inst.operands.push_back(typed_value(groups[0], ctx_));
    inst.dtype = inst.operands[0].dtype;
  }

  Tokens toks_;
  Context ctx_;
  std::size_t pos_ = 0;
};

std::optional<Instruction> parse_instruction_tokens(Tokens toks,
                                                    const Context &ctx) {
  return InstructionParser(std::move(toks), ctx).parse();
}

//===----------------------------------------------------------------------===//
// Module parsing
//===----------------------------------------------------------------------===//

struct SourceLine {
  std::size_t number;
  std::string_view text;
};

std::vector<SourceLine> split_lines(std::string_view source) {
  std::vector<SourceLine> lines;
  std::size_t start = 0, number = 1;
  while (start <= source.size()) {
    std::size_t nl = source.find('\n', start);
    std::size_t end = nl == std::string_view::npos ? source.size() : nl;
    std::string_view text = source.substr(start, end - start);
    if (!text.empty() && text.back() == '\r')
      text.remove_suffix(1);
    lines.push_back({number++, text});
    if (nl == std::string_view::npos)
      break;
    start = nl + 1;
  }
  return lines;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

bool starts_with_word(std::string_view line, std::string_view word) {
  return line.rfind(word, 0) == 0 &&
         (line.size() == word.size() ||
          std::isspace(static_cast<unsigned char>(line[word.size()])));
}

/// Label lines look like `name:` possibly followed by a comment.
std::optional<std::string> label_of(const Tokens &toks) {
  if (toks.size() == 2 && toks[1].punct(":") &&
      (toks[0].kind == Tok::Word || toks[0].kind == Tok::Int ||
       toks[0].kind == Tok::String))
    return toks[0].text;
  return std::nullopt;
}

int bracket_balance(const Tokens &toks) {
  int depth = 0;
  for (const auto &t : toks) {
    if (is_open(t))
      ++depth;
    else if (is_close(t))
      --depth;
  }
  return depth;
}

struct Header {
  std::string name;
  std::vector<Param> params;
  std::string implicit_entry;
};

Header parse_header(const Tokens &toks, std::size_t line) {
  Header h;
  std::size_t name_pos = toks.size();
  for (std::size_t i = 0; i + 1 < toks.size(); ++i)
    if (toks[i].kind == Tok::Global && toks[i + 1].punct("(")) {
      name_pos = i;
      break;
    }
  if (name_pos == toks.size())
    throw MalformedIr(line, "function definition without a name");
  h.name = toks[name_pos].text;
  std::size_t close = skip_balanced(toks, name_pos + 1, line);
  std::size_t unnamed = 0;
  for (const auto &g : split_groups(toks, name_pos + 2, close - 1)) {
    if (g.empty() || g.front().punct("..."))
      continue;
    std::size_t p = 0;
    std::string dtype = parse_type(g, p, line);
    std::string name;
    if (g.back().kind == Tok::Local && p < g.size())
      name = g.back().text;
    else
      name = std::to_string(unnamed);
    bool numeric = !name.empty() &&
                   std::all_of(name.begin(), name.end(), [](char c) {
                     return std::isdigit(static_cast<unsigned char>(c));
                   });
    if (numeric)
      ++unnamed;
    h.params.push_back({name, dtype});
  }
  h.implicit_entry = std::to_string(unnamed);
  return h;
}

void rewrite_inputs(IrFunction &f) {
  for (auto &block : f.blocks)
    for (auto &inst : block.instructions)
      for (auto &op : inst.operands) {
        if (op.kind != OperandKind::Value)
          continue;
        auto it = std::find_if(f.params.begin(), f.params.end(),
                               [&](const Param &p) { return p.name == op.name; });
        if (it != f.params.end())
          op = Operand::input(it->name, it->dtype);
      }
}

std::unordered_set<std::string> collect_string_globals(
    const std::vector<SourceLine> &lines) {
  std::unordered_set<std::string> out;
  for (const auto &l : lines) {
    std::string_view t = trim(l.text);
    if (t.empty() || t.front() != '@')
      continue;
    std::size_t eq = t.find('=');
    if (eq == std::string_view::npos)
      continue;
    std::string_view rest = t.substr(eq);
    if (rest.find("c\"") != std::string_view::npos) {
      std::string_view name = trim(t.substr(1, eq - 1));
      if (!name.empty() && name.front() == '"' && name.back() == '"')
        name = name.substr(1, name.size() - 2);
      out.emplace(name);
    }
  }
  return out;
}

} // namespace

//===----------------------------------------------------------------------===//
// Public API
//===----------------------------------------------------------------------===//

const char *instr_kind_name(InstrKind kind) {
  switch (kind) {
  case InstrKind::Operator: return "operator";
  case InstrKind::ApiCall: return "api_call";
  case InstrKind::Branch: return "branch";
  case InstrKind::Return: return "return";
  case InstrKind::Phi: return "phi";
  }
  return "?";
}

std::size_t IrFunction::instruction_count() const {
  std::size_t n = 0;
  for (const auto &b : blocks)
    n += b.instructions.size();
  return n;
}

std::string normalize_type(std::string_view type_text) {
  Tokens toks = Lexer(type_text, 0).run();
  std::size_t pos = 0;
  std::string t = parse_type(toks, pos, 0);
  if (pos != toks.size())
    throw MalformedIr(0, "trailing tokens after type");
  return t;
}

Instruction parse_instruction(std::string_view line) {
  Context ctx;
  ctx.line = 1;
  auto inst = parse_instruction_tokens(Lexer(line, 1).run(), ctx);
  if (!inst)
    throw UnsupportedInstruction("call.intrinsic", 1);
  return *inst;
}

void validate_function(const IrFunction &f) {
  if (f.blocks.empty())
    throw MalformedIr(0, "function '" + f.name + "' has no basic blocks");
  std::unordered_set<std::string> labels, values;
  for (const auto &p : f.params)
    if (!values.insert(p.name).second)
      throw MalformedIr(0, "duplicate parameter name %" + p.name);
  for (const auto &block : f.blocks) {
    if (!labels.insert(block.label).second)
      throw MalformedIr(block.instructions.empty() ? 0 : block.instructions.front().line,
                        "duplicate block label " + block.label);
    if (block.instructions.empty())
      throw MalformedIr(0, "empty basic block " + block.label);
    for (std::size_t i = 0; i < block.instructions.size(); ++i) {
      const auto &inst = block.instructions[i];
      bool terminator =
          inst.kind == InstrKind::Branch || inst.kind == InstrKind::Return;
      bool last = i + 1 == block.instructions.size();
      if (terminator != last)
        throw MalformedIr(inst.line,
                          last ? "block " + block.label +
                                     " does not end in a branch or return"
                               : "terminator in the middle of block " + block.label);
      if (inst.result && !values.insert(*inst.result).second)
        throw MalformedIr(inst.line, "duplicate SSA name %" + *inst.result);
    }
  }
  for (const auto &block : f.blocks)
    for (const auto &inst : block.instructions) {
      if (inst.kind != InstrKind::Branch)
        continue;
      for (const auto &op : inst.operands)
        if (op.kind == OperandKind::Label && !labels.count(op.name))
          throw MalformedIr(inst.line, "branch to missing label %" + op.name);
    }
}

std::vector<IrFunction> parse_module(std::string_view source,
                                     const ParseOptions &options) {
  const auto lines = split_lines(source);
  const auto string_globals = collect_string_globals(lines);
  std::vector<IrFunction> functions;

  std::size_t i = 0;
  while (i < lines.size()) {
    std::string_view text = trim(lines[i].text);
    if (!starts_with_word(text, "define")) {
      ++i;
      continue;
    }
    const std::size_t define_line = lines[i].number;
    // The header may span lines up to the opening brace.
    Tokens header_toks = Lexer(lines[i].text, define_line).run();
    while (std::none_of(header_toks.begin(), header_toks.end(),
                        [](const Token &t) { return t.punct("{"); })) {
      if (++i >= lines.size())
        throw MalformedIr(define_line, "function header without a body");
      auto more = Lexer(lines[i].text, lines[i].number).run();
      header_toks.insert(header_toks.end(), more.begin(), more.end());
    }
    ++i;
    Header header = parse_header(header_toks, define_line);

    IrFunction f;
    f.name = header.name;
    f.params = header.params;
    bool closed = false;
    while (i < lines.size()) {
      const std::size_t number = lines[i].number;
      std::string_view body = trim(lines[i].text);
      if (body == "}") {
        closed = true;
        ++i;
        break;
      }
      if (starts_with_word(body, "define"))
        throw MalformedIr(number, "function definition inside a function body");
      Tokens toks = Lexer(lines[i].text, number).run();
      ++i;
      if (toks.empty())
        continue;
      if (auto label = label_of(toks)) {
        f.blocks.push_back({*label, {}});
        continue;
      }
      // Multi-line instructions (switch tables) continue until brackets close.
      while (bracket_balance(toks) > 0 && i < lines.size()) {
        auto more = Lexer(lines[i].text, lines[i].number).run();
        toks.insert(toks.end(), more.begin(), more.end());
        ++i;
      }
      if (f.blocks.empty())
        f.blocks.push_back({header.implicit_entry, {}});
      Context ctx{&string_globals, number};
      std::optional<Instruction> inst;
      try {
        inst = parse_instruction_tokens(std::move(toks), ctx);
      } catch (const UnsupportedInstruction &) {
        if (options.strict)
          throw;
        continue;
      }
      if (inst)
        f.blocks.back().instructions.push_back(std::move(*inst));
    }
    if (!closed)
      throw MalformedIr(define_line, "unterminated body of function @" + f.name);
    if (f.blocks.empty())
      throw MalformedIr(define_line, "function @" + f.name + " has an empty body");
    rewrite_inputs(f);
    try {
      validate_function(f);
    } catch (const MalformedIr &e) {
      if (e.line() == 0)
        throw MalformedIr(define_line, e.what());
      throw;
    }
    functions.push_back(std::move(f));
  }
  return functions;
}

//===----------------------------------------------------------------------===//
// Printing
//===----------------------------------------------------------------------===//

namespace {

std::string sigil_name(char sigil, const std::string &name) {
  bool plain = !name.empty() && std::all_of(name.begin(), name.end(), is_name_char);
  return plain ? std::string(1, sigil) + name
               : std::string(1, sigil) + "\"" + name + "\"";
}

std::string label_decl(const std::string &name) {
  bool plain = !name.empty() && std::all_of(name.begin(), name.end(), is_word_char);
  return plain ? name : "\"" + name + "\"";
}

std::string value_text(const Operand &op) {
  switch (op.kind) {
  case OperandKind::Value:
  case OperandKind::Input:
    return sigil_name('%', op.name);
  case OperandKind::Label:
    return "label " + sigil_name('%', op.name);
  case OperandKind::Constant:
    return op.name; // placeholders already carry their '@'
  }
  return {};
}

std::string typed(const Operand &op) {
  if (op.kind == OperandKind::Label)
    return value_text(op);
  return op.dtype + " " + value_text(op);
}

std::string join_typed(const std::vector<Operand> &ops, std::size_t from = 0) {
  std::string out;
  for (std::size_t i = from; i < ops.size(); ++i) {
    if (i > from)
      out += ", ";
    out += typed(ops[i]);
  }
  return out;
}

std::string print_instruction(const Instruction &inst) {
  std::string out;
  if (inst.result)
    out = sigil_name('%', *inst.result) + " = ";
  const auto &ops = inst.operands;
  const std::string &op = inst.opcode;

  if (inst.kind == InstrKind::ApiCall) {
    out += "call " + inst.dtype.value_or("void") + " " + sigil_name('@', op) +
           "(" + join_typed(ops) + ")";
  } else if (inst.kind == InstrKind::Phi) {
    out += "phi " + inst.dtype.value_or("i32");
    for (std::size_t i = 0; i + 1 < ops.size(); i += 2)
      out += std::string(i ? "," : "") + " [ " + value_text(ops[i]) + ", " +
             sigil_name('%', ops[i + 1].name) + " ]";
  } else if (op == "br") {
    out += "br " + join_typed(ops);
  } else if (op == "switch") {
    out += "switch " + typed(ops[0]) + ", " + typed(ops[1]) + " [";
    for (std::size_t i = 2; i < ops.size(); ++i)
      out += " " + ops[0].dtype + " " + std::to_string(i - 2) + ", " + typed(ops[i]);
    out += " ]";
  } else if (op == "ret") {
    out += ops.empty() ? std::string("ret void") : "ret " + typed(ops[0]);
  } else if (op == "unreachable") {
    out += "unreachable";
  } else if (op.rfind("icmp.", 0) == 0 || op.rfind("fcmp.", 0) == 0) {
    out += op.substr(0, 4) + " " + op.substr(5) + " " + ops[0].dtype + " " +
           value_text(ops[0]) + ", " + value_text(ops[1]);
  } else if (binary_opcodes().count(op)) {
    out += op + " " + ops[0].dtype + " " + value_text(ops[0]) + ", " +
           value_text(ops[1]);
  } else if (op == "fneg") {
    out += "fneg " + typed(ops[0]);
  } else if (conversion_opcodes().count(op)) {
    out += op + " " + typed(ops[0]) + " to " + inst.dtype.value_or("i32");
  } else if (op == "load") {
    out += "load " + inst.dtype.value_or("i32") + ", " + typed(ops[0]);
  } else if (op == "store") {
    out += "store " + join_typed(ops);
  } else if (op == "alloca") {
    out += "alloca i8";
    if (!ops.empty())
      out += ", " + join_typed(ops);
  } else if (op == "getelementptr") {
    out += "getelementptr i8, " + join_typed(ops);
  } else if (op == "select") {
    out += "select " + join_typed(ops);
  } else {
    out += op + " " + join_typed(ops);
  }
  return out;
}

} // namespace

std::string print_function(const IrFunction &f) {
  std::string ret_type = "void";
  for (const auto &b : f.blocks)
    for (const auto &inst : b.instructions)
      if (inst.opcode == "ret" && inst.dtype)
        ret_type = *inst.dtype;

  std::string out = "define " + ret_type + " " + sigil_name('@', f.name) + "(";
  for (std::size_t i = 0; i < f.params.size(); ++i) {
    if (i)
      out += ", ";
    out += f.params[i].dtype + " " + sigil_name('%', f.params[i].name);
  }
  out += ") {\n";
  for (std::size_t b = 0; b < f.blocks.size(); ++b) {
    if (b)
      out += "\n";
    out += label_decl(f.blocks[b].label) + ":\n";
    for (const auto &inst : f.blocks[b].instructions)
      out += "  " + print_instruction(inst) + "\n";
  }
  out += "}\n";
  return out;
}

std::string print_module(const std::vector<IrFunction> &functions) {
  std::string out;
  for (std::size_t i = 0; i < functions.size(); ++i) {
    if (i)
      out += "\n";
    out += print_function(functions[i]);
  }
  return out;
}

} // namespace seed::ir
