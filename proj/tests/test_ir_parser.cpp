// Licensed under the Apache License, Version 2.0.
// SPDX-License-Identifier: Apache-2.0

#include "seed/error.hpp"
#include "seed/ir.hpp"

#include "support/fixtures.hpp"
#include "support/random_ir.hpp"
#include "support/synthetic.hpp"

#include <doctest.h>

#include <set>

using namespace seed;
using namespace seed::ir;

TEST_SUITE("ir_parser") {

TEST_CASE("loop function parses into four labelled blocks") {
  const auto fns = parse_module(testing::read_fixture("sum_loop.ll"));
  REQUIRE(fns.size() == 1);
  const auto &f = fns[0];
  CHECK(f.name == "sum_down");
  REQUIRE(f.params.size() == 1);
  CHECK(f.params[0] == Param{"n", "i32"});
  std::vector<std::string> labels;
  for (const auto &b : f.blocks)
    labels.push_back(b.label);
  CHECK(labels == std::vector<std::string>{"entry", "1", "3", "7"});
  CHECK(f.instruction_count() == 10);
}

TEST_CASE("empty module has no functions") {
  CHECK(parse_module("").empty());
  CHECK(parse_module("; only a comment\n@g = global i32 0\n").empty());
  CHECK(parse_module("declare i32 @printf(ptr, ...)\n").empty());
}

TEST_CASE("minimal function") {
  const auto fns = parse_module("define i32 @zero() {\n  ret i32 0\n}\n");
  REQUIRE(fns.size() == 1);
  REQUIRE(fns[0].blocks.size() == 1);
  CHECK(fns[0].blocks[0].label == "0");
  REQUIRE(fns[0].blocks[0].instructions.size() == 1);
  const auto &ret = fns[0].blocks[0].instructions[0];
  CHECK(ret.kind == InstrKind::Return);
  CHECK(ret.operands == std::vector<Operand>{Operand::constant("0", "i32")});
}

TEST_CASE("implicit entry label follows unnamed parameters") {
  const auto fns = parse_module("define i32 @g(i32 %0, i32 %1) {\n"
                                "  %3 = add i32 %0, %1\n  ret i32 %3\n}\n");
  REQUIRE(fns.size() == 1);
  CHECK(fns[0].blocks[0].label == "2");
  CHECK(fns[0].blocks[0].instructions[0].operands[0].kind == OperandKind::Input);
}

TEST_CASE("malformed bodies report a line number") {
  SUBCASE("unbalanced body") {
    try {
      parse_module("define i32 @f() {\n  ret i32 0\n");
      FAIL("expected MalformedIr");
    } catch (const MalformedIr &e) {
      CHECK(e.line() == 1);
      CHECK(e.code() == ErrorCode::MalformedIr);
    }
  }
  SUBCASE("duplicate SSA name") {
    try {
      parse_module("define i32 @f(i32 %a) {\nentry:\n  %x = add i32 %a, 1\n"
                   "  %x = add i32 %a, 2\n  ret i32 %x\n}\n");
      FAIL("expected MalformedIr");
    } catch (const MalformedIr &e) {
      CHECK(e.line() == 4);
    }
  }
  SUBCASE("branch to a missing label") {
    try {
      parse_module("define void @f() {\nentry:\n  br label %nowhere\n}\n");
      FAIL("expected MalformedIr");
    } catch (const MalformedIr &e) {
      CHECK(e.line() == 3);
    }
  }
  SUBCASE("block without terminator") {
    CHECK_THROWS_AS(parse_module("define i32 @f(i32 %a) {\n  %x = add i32 %a, 1\n}\n"),
                    MalformedIr);
  }
}

TEST_CASE("operator instruction") {
  const auto inst = parse_instruction("%4 = add nsw i32 %sum.0, %i.0");
  CHECK(inst.kind == InstrKind::Operator);
  CHECK(inst.opcode == "add");
  CHECK(inst.result == "4");
  REQUIRE(inst.operands.size() == 2);
  CHECK(inst.operands[0].name == "sum.0");
  CHECK(inst.operands[1].name == "i.0");
  CHECK(inst.dtype == "i32");
}

TEST_CASE("call instruction names its callee") {
  const auto inst =
      parse_instruction("%8 = call i32 (ptr, ...) @printf(ptr noundef @.str, i32 noundef %sum.0)");
  CHECK(inst.kind == InstrKind::ApiCall);
  CHECK(inst.opcode == "printf");
  CHECK(inst.result == "8");
  REQUIRE(inst.operands.size() == 2);
  CHECK(inst.operands[0].kind == OperandKind::Constant);
  CHECK(inst.operands[1].name == "sum.0");
}

TEST_CASE("void return") {
  const auto inst = parse_instruction("ret void");
  CHECK(inst.kind == InstrKind::Return);
  CHECK_FALSE(inst.result.has_value());
  CHECK(inst.operands.empty());
}

TEST_CASE("comparison, branch and phi forms") {
  const auto cmp = parse_instruction("%2 = icmp sgt i32 %i.0, 0");
  CHECK(cmp.opcode == "icmp.sgt");
  CHECK(cmp.dtype == "i1");
  CHECK(cmp.operands[1] == Operand::constant("0", "i32"));

  const auto br = parse_instruction("br i1 %2, label %3, label %7");
  CHECK(br.kind == InstrKind::Branch);
  REQUIRE(br.operands.size() == 3);
  CHECK(br.operands[1] == Operand::label("3"));
  CHECK(br.operands[2] == Operand::label("7"));

  const auto phi = parse_instruction("%sum.0 = phi i32 [ 0, %0 ], [ %4, %3 ]");
  CHECK(phi.kind == InstrKind::Phi);
  REQUIRE(phi.operands.size() == 4);
  CHECK(phi.operands[1] == Operand::label("0"));
  CHECK(phi.operands[2].name == "4");

  const auto conv = parse_instruction("%w = sext i32 %v to i64");
  CHECK(conv.opcode == "sext");
  CHECK(conv.dtype == "i64");
}

TEST_CASE("unsupported instructions") {
  const std::string text = "define void @f() {\nentry:\n"
                           "  %p = landingpad { ptr, i32 } cleanup\n  ret void\n}\n";
  SUBCASE("strict mode fails with the opcode") {
    try {
      parse_module(text, {true});
      FAIL("expected UnsupportedInstruction");
    } catch (const UnsupportedInstruction &e) {
      CHECK(e.opcode() == "landingpad");
      CHECK(e.line() == 3);
    }
  }
  SUBCASE("lenient mode skips") {
    const auto fns = parse_module(text);
    REQUIRE(fns.size() == 1);
    CHECK(fns[0].instruction_count() == 1);
  }
  CHECK_THROWS_AS(parse_instruction("%p = landingpad { ptr, i32 } cleanup"),
                  UnsupportedInstruction);
}

TEST_CASE("debug intrinsics are dropped") {
  const auto fns = parse_module(testing::read_fixture("api_calls.ll"), {true});
  REQUIRE(fns.size() == 1);
  for (const auto &b : fns[0].blocks)
    for (const auto &i : b.instructions)
      CHECK(i.opcode.rfind("llvm.", 0) != 0);
}

TEST_CASE("every fixture satisfies SSA uniqueness and label resolution") {
  for (const auto &name : testing::fixture_names()) {
    CAPTURE(name);
    const auto fns = parse_module(testing::read_fixture(name), {true});
    REQUIRE_FALSE(fns.empty());
    for (const auto &f : fns) {
      CHECK_NOTHROW(validate_function(f));
      std::set<std::string> defs, labels;
      for (const auto &b : f.blocks) {
        CHECK(labels.insert(b.label).second);
        for (const auto &i : b.instructions)
          if (i.result)
            CHECK(defs.insert(*i.result).second);
      }
      for (const auto &b : f.blocks)
        for (const auto &i : b.instructions)
          for (const auto &op : i.operands)
            if (op.kind == OperandKind::Label)
              CHECK(labels.count(op.name) == 1);
    }
  }
}

TEST_CASE("property: print then parse is stable") {
  auto round_trip = [](const std::string &text) {
    const auto first = parse_module(text);
    const std::string printed = print_module(first);
    const auto second = parse_module(printed);
    CHECK(first == second);
    CHECK(print_module(second) == printed);
  };
  for (const auto &name : testing::fixture_names()) {
    CAPTURE(name);
    round_trip(testing::read_fixture(name));
  }
  Rng rng(2024);
  for (int i = 0; i < 200; ++i) {
    const std::string text = testing::random_function(rng);
    CAPTURE(text);
    round_trip(text);
  }
  for (std::size_t p = 0; p < testing::synthetic_problem_names().size(); ++p)
    round_trip(testing::synthetic_variant(p, 11));
}

TEST_CASE("property: parsing is pure") {
  Rng rng(99);
  for (int i = 0; i < 50; ++i) {
    const std::string text = testing::random_function(rng);
    CHECK(parse_module(text) == parse_module(text));
  }
}

} // TEST_SUITE
