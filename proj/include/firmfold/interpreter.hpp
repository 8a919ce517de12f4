#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "firmfold/graph.hpp"

namespace firmfold {

inline constexpr std::size_t kDefaultFuel = 10'000;

/// Runs the graph from its StartBlock and returns the value handed to the
/// Return. Pure operations are evaluated on demand; Phis take the input
/// whose position matches the predecessor edge the block was entered by.
class Interpreter {
 public:
  Interpreter(const ProgramGraph& g, std::size_t fuel) : g_(g), fuel_(fuel) {}

  std::int32_t run() {
    auto starts = g_.blocks_of_kind(BlockKind::StartBlock);
    if (starts.size() != 1) malformed("expected exactly one StartBlock");
    current_ = starts.front();
    while (true) {
      burn();
      NodeId term = terminator(current_);
      Op op = g_.op_kind(term).op();
      if (op == Op::Return) return value(operand(term, 0));
      std::optional<Port> next;
      if (op == Op::Jmp) {
        auto succs = g_.control_succs(term);
        if (succs.size() != 1) malformed(to_string(term) + ": Jmp needs one successor");
        next = succs.front();
      } else {
        int branch = value(operand(term, 0)) != 0 ? 1 : 0;
        for (const Port& s : g_.control_succs(term)) {
          if (g_.edge(s.edge).branch == branch) next = s;
        }
        if (!next) malformed(to_string(term) + ": missing branch " + std::to_string(branch));
      }
      enter(next->node, g_.edge(next->edge).position);
    }
  }

 private:
  [[noreturn]] static void malformed(const std::string& why) {
    throw Error(Errc::MalformedGraph, why);
  }

  void burn() {
    if (steps_++ >= fuel_) throw Error(Errc::FuelExhausted, std::to_string(fuel_) + " steps");
  }

  NodeId terminator(NodeId block) const {
    std::optional<NodeId> found;
    for (NodeId op : g_.members(block)) {
      if (!is_control_source(g_.op_kind(op).op())) continue;
      if (found) malformed(to_string(block) + " has several terminators");
      found = op;
    }
    if (!found) malformed(to_string(block) + " has no terminator");
    return *found;
  }

  NodeId operand(NodeId op, std::uint32_t position) const {
    for (const Port& in : g_.data_inputs(op)) {
      if (in.position == position) return in.node;
    }
    malformed(to_string(op) + " has no input " + std::to_string(position));
  }

  // Phi operands are read before any Phi of the block is updated.
  void enter(NodeId block, std::uint32_t position) {
    std::map<NodeId, std::int32_t> incoming;
    for (NodeId op : g_.members(block)) {
      if (g_.op_kind(op).op() == Op::Phi) incoming[op] = value(operand(op, position));
    }
    for (const auto& [phi, v] : incoming) phis_[phi] = v;
    current_ = block;
  }

  std::int32_t value(NodeId op) {
    burn();
    const OpKind& kind = g_.op_kind(op);
    switch (kind.op()) {
      case Op::Const: return kind.value();
      case Op::Add: return wrap_add(value(operand(op, 0)), value(operand(op, 1)));
      case Op::Cmp:
        return holds(kind.relation(), value(operand(op, 0)), value(operand(op, 1))) ? 1 : 0;
      case Op::Phi: {
        auto it = phis_.find(op);
        if (it == phis_.end()) malformed(to_string(op) + " read before its block was entered");
        return it->second;
      }
      default: malformed(to_string(op) + " (" + to_string(kind) + ") produces no value");
    }
  }

  const ProgramGraph& g_;
  std::size_t fuel_;
  std::size_t steps_ = 0;
  NodeId current_;
  std::map<NodeId, std::int32_t> phis_;
};

inline std::int32_t evaluate(const ProgramGraph& g, std::size_t fuel = kDefaultFuel) {
  return Interpreter(g, fuel).run();
}

}  // namespace firmfold
