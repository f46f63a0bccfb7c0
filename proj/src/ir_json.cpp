// Licensed under the Apache License, Version 2.0.
// SPDX-License-Identifier: Apache-2.0

#include "seed/ir.hpp"

#include <json.hpp>

namespace seed::ir {

namespace {

const char *operand_kind_name(OperandKind k) {
  switch (k) {
  case OperandKind::Value: return "value";
  case OperandKind::Constant: return "constant";
  case OperandKind::Label: return "label";
  case OperandKind::Input: return "input";
  }
  return "value";
}

} // namespace

std::string module_to_json(const std::vector<IrFunction> &functions) {
  using json = nlohmann::ordered_json;
  json out = json::array();
  for (const auto &f : functions) {
    json jf;
    jf["name"] = f.name;
    jf["params"] = json::array();
    for (const auto &p : f.params)
      jf["params"].push_back({{"name", p.name}, {"dtype", p.dtype}});
    jf["blocks"] = json::array();
    for (const auto &b : f.blocks) {
      json jb;
      jb["label"] = b.label;
      jb["instructions"] = json::array();
      for (const auto &inst : b.instructions) {
        json ji;
        ji["kind"] = instr_kind_name(inst.kind);
        ji["opcode"] = inst.opcode;
        ji["result"] = inst.result ? json(*inst.result) : json(nullptr);
        ji["operands"] = json::array();
        for (const auto &op : inst.operands) {
          json jo{{"kind", operand_kind_name(op.kind)}, {"name", op.name}};
          if (!op.dtype.empty())
            jo["dtype"] = op.dtype;
          ji["operands"].push_back(jo);
        }
        ji["dtype"] = inst.dtype ? json(*inst.dtype) : json(nullptr);
        jb["instructions"].push_back(ji);
      }
      jf["blocks"].push_back(jb);
    }
    out.push_back(jf);
  }
  return json{{"functions", out}}.dump(2);
}

} // namespace seed::ir
