#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "firmfold/graph.hpp"

namespace firmfold {

enum class CheckName { SingleStart, SingleEnd, Containment, PhiCheck, PosCheck, Consts };

inline std::string_view to_string(CheckName check) {
  switch (check) {
    case CheckName::SingleStart: return "single-start";
    case CheckName::SingleEnd: return "single-end";
    case CheckName::Containment: return "containment";
    case CheckName::PhiCheck: return "phi-check";
    case CheckName::PosCheck: return "pos-check";
    case CheckName::Consts: return "consts";
  }
  return "?";
}

/// One failed sanity check. `absence` marks the "no StartBlock" and
/// "no EndBlock" cases, which have nothing to point at and so carry no
/// witnesses; every other violation names at least one node.
struct Violation {
  CheckName check;
  std::vector<NodeId> witnesses;
  std::string message;
  bool absence = false;

  friend bool operator==(const Violation&, const Violation&) = default;
};

/// `<check>: <message> [witnesses: n3, n7]`; absence violations omit the
/// witness list.
inline std::string format_violation(const Violation& v) {
  std::string line = std::string(to_string(v.check)) + ": " + v.message;
  if (!v.witnesses.empty()) {
    line += " [witnesses: ";
    for (std::size_t i = 0; i < v.witnesses.size(); ++i) {
      if (i > 0) line += ", ";
      line += to_string(v.witnesses[i]);
    }
    line += "]";
  }
  return line;
}

namespace detail {

inline std::vector<Violation> check_unique_block(const ProgramGraph& g, BlockKind kind,
                                                 CheckName check) {
  std::vector<Violation> result;
  std::vector<NodeId> found = g.blocks_of_kind(kind);
  std::string name(to_string(kind));
  if (found.empty()) {
    result.push_back(Violation{check, {}, "graph has no " + name, /*absence=*/true});
    return result;
  }
  for (std::size_t i = 0; i < found.size(); ++i) {
    for (std::size_t j = i + 1; j < found.size(); ++j) {
      result.push_back(Violation{check, {found[i], found[j]}, "more than one " + name});
    }
  }
  return result;
}

inline std::vector<std::uint32_t> positions_of(const std::vector<Port>& ports) {
  std::vector<std::uint32_t> result;
  for (const Port& p : ports) result.push_back(p.position);
  return result;
}

inline bool contiguous(const std::vector<std::uint32_t>& sorted_positions) {
  for (std::size_t i = 0; i < sorted_positions.size(); ++i) {
    if (sorted_positions[i] != i) return false;
  }
  return true;
}

}  // namespace detail

inline std::vector<Violation> check_single_start(const ProgramGraph& g) {
  return detail::check_unique_block(g, BlockKind::StartBlock, CheckName::SingleStart);
}

inline std::vector<Violation> check_single_end(const ProgramGraph& g) {
  return detail::check_unique_block(g, BlockKind::EndBlock, CheckName::SingleEnd);
}

inline std::vector<Violation> check_containment(const ProgramGraph& g) {
  std::vector<Violation> result;
  for (const auto& [id, kind] : g.ops()) {
    if (!g.block_of(id)) {
      result.push_back(Violation{CheckName::Containment, {id},
                                 to_string(kind) + " is not contained in a block"});
    }
  }
  return result;
}

/// A Phi's input positions must be exactly the input positions of its block.
inline std::vector<Violation> check_phi(const ProgramGraph& g) {
  std::vector<Violation> result;
  for (NodeId phi : g.ops_of(Op::Phi)) {
    auto block = g.block_of(phi);
    if (!block) continue;
    auto data = detail::positions_of(g.data_inputs(phi));
    auto control = detail::positions_of(g.control_preds(*block));
    if (std::set(data.begin(), data.end()) != std::set(control.begin(), control.end())) {
      result.push_back(Violation{CheckName::PhiCheck, {phi, *block},
                                 "Phi inputs do not line up with the block's predecessors"});
    }
  }
  return result;
}

inline std::vector<Violation> check_positions(const ProgramGraph& g) {
  std::vector<Violation> result;
  // Walk ops and blocks together in id order so witnesses come out sorted.
  std::set<NodeId> nodes;
  for (const auto& entry : g.ops()) nodes.insert(entry.first);
  for (const auto& entry : g.blocks()) nodes.insert(entry.first);
  for (NodeId id : nodes) {
    bool is_op = g.is_op(id);
    auto ports = is_op ? g.data_inputs(id) : g.control_preds(id);
    auto positions = detail::positions_of(ports);
    if (!detail::contiguous(positions)) {
      result.push_back(Violation{CheckName::PosCheck, {id},
                                 "input positions are not 0.." +
                                     std::to_string(static_cast<long>(positions.size()) - 1)});
    }
    if (!is_op) continue;
    Op op = g.op_kind(id).op();
    if (auto arity = fixed_arity(op); arity && *arity != positions.size()) {
      result.push_back(Violation{CheckName::PosCheck, {id},
                                 std::string(to_string(op)) + " expects " +
                                     std::to_string(*arity) + " inputs, has " +
                                     std::to_string(positions.size())});
    }
  }
  return result;
}

inline std::vector<Violation> check_consts(const ProgramGraph& g) {
  std::vector<Violation> result;
  for (NodeId c : g.ops_of(Op::Const)) {
    auto block = g.block_of(c);
    if (block && g.block_kind(*block) != BlockKind::StartBlock) {
      result.push_back(
          Violation{CheckName::Consts, {c, *block}, "constant outside the StartBlock"});
    }
  }
  return result;
}

/// All six checks, in the order single-start, single-end, containment,
/// phi-check, pos-check, consts.
inline std::vector<Violation> verify(const ProgramGraph& g) {
  std::vector<Violation> result;
  for (auto check : {check_single_start, check_single_end, check_containment, check_phi,
                     check_positions, check_consts}) {
    auto found = check(g);
    result.insert(result.end(), found.begin(), found.end());
  }
  return result;
}

}  // namespace firmfold
