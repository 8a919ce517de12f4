#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "firmfold/engine.hpp"
#include "firmfold/graph.hpp"

namespace firmfold::rules {

inline constexpr const char* kCleanupDanglingDataflow = "cleanup-dangling-dataflow";
inline constexpr const char* kCleanupDanglingControl = "cleanup-dangling-control";
inline constexpr const char* kCleanupUnrefConst = "cleanup-unref-const";
inline constexpr const char* kCmpFoldInt = "cmp-fold-int";
inline constexpr const char* kCondFoldTrue = "cond-fold-true";
inline constexpr const char* kCondFoldFalse = "cond-fold-false";
inline constexpr const char* kBlockRemove = "block-remove";
inline constexpr const char* kPhiAdjust = "phi-adjust";
inline constexpr const char* kPhiFoldSingle = "phi-fold-single";
inline constexpr const char* kAddFoldInt = "add-fold-int";

namespace detail {

// Folded constants are created here. With several StartBlocks the lowest id
// wins; with none, the folding rules do not match.
inline std::optional<NodeId> start_block(const ProgramGraph& g) {
  auto starts = g.blocks_of_kind(BlockKind::StartBlock);
  if (starts.empty()) return std::nullopt;
  return starts.front();
}

inline std::optional<std::int32_t> const_value(const ProgramGraph& g, NodeId n) {
  const OpKind& kind = g.op_kind(n);
  if (kind.op() != Op::Const) return std::nullopt;
  return kind.value();
}

/// Binary operation whose inputs sit at positions 0 and 1 and are both
/// constants. Anchors: [op, lhs const, rhs const].
inline std::vector<Match> binary_const_matches(const ProgramGraph& g, Op op) {
  std::vector<Match> result;
  if (!start_block(g)) return result;
  for (NodeId n : g.ops_of(op)) {
    auto inputs = g.data_inputs(n);
    if (inputs.size() != 2 || inputs[0].position != 0 || inputs[1].position != 1) continue;
    if (!const_value(g, inputs[0].node) || !const_value(g, inputs[1].node)) continue;
    result.push_back(Match{"", {n, inputs[0].node, inputs[1].node}});
  }
  return result;
}

/// Replaces `n` by a fresh constant in the StartBlock: every dataflow edge
/// leaving `n` is re-sourced at the constant, then `n` and its inputs go.
inline ProgramGraph replace_with_const(const ProgramGraph& g, NodeId n, std::int32_t value) {
  ProgramGraph out = g;
  NodeId c = out.add_op(OpKind::constant(value), *start_block(g));
  for (const Port& user : g.data_users(n)) out.set_source(user.edge, c);
  out.delete_node(n);
  return out;
}

inline std::vector<Match> dangling_matches(const ProgramGraph& g, EdgeKind kind) {
  std::vector<Match> result;
  for (const auto& [id, e] : g.edges()) {
    if (e.kind == kind && !g.block_of(e.source)) result.push_back(Match{"", {id}});
  }
  return result;
}

/// Cond whose selector is a constant that selects `branch`, and which has an
/// outgoing edge for that branch. Anchors: [cond, selector const].
inline std::vector<Match> cond_matches(const ProgramGraph& g, int branch) {
  std::vector<Match> result;
  for (NodeId cond : g.ops_of(Op::Cond)) {
    if (!g.block_of(cond)) continue;
    auto inputs = g.data_inputs(cond);
    if (inputs.size() != 1) continue;
    auto value = const_value(g, inputs[0].node);
    if (!value || (*value != 0 ? 1 : 0) != branch) continue;
    bool has_taken = false;
    for (const Port& succ : g.control_succs(cond)) {
      if (g.edge(succ.edge).branch == branch) has_taken = true;
    }
    if (has_taken) result.push_back(Match{"", {cond, inputs[0].node}});
  }
  return result;
}

inline ProgramGraph cond_apply(const ProgramGraph& g, const Match& m) {
  NodeId cond = m.anchors[0];
  int taken = *const_value(g, m.anchors[1]) != 0 ? 1 : 0;
  ProgramGraph out = g;
  NodeId jmp = out.add_op(Op::Jmp, *g.block_of(cond));
  for (const Port& succ : g.control_succs(cond)) {
    if (g.edge(succ.edge).branch == taken) out.set_source(succ.edge, jmp);
  }
  // Removes the selector edge and the untaken successor with it.
  out.delete_node(cond);
  return out;
}

}  // namespace detail

inline std::vector<Match> match_cleanup_dangling_dataflow(const ProgramGraph& g) {
  return detail::dangling_matches(g, EdgeKind::Dataflow);
}

inline std::vector<Match> match_cleanup_dangling_control(const ProgramGraph& g) {
  return detail::dangling_matches(g, EdgeKind::Controlflow);
}

inline ProgramGraph apply_delete_anchor(const ProgramGraph& g, const Match& m) {
  ProgramGraph out = g;
  out.delete_node(m.anchors[0]);
  return out;
}

inline std::vector<Match> match_cleanup_unref_const(const ProgramGraph& g) {
  std::vector<Match> result;
  for (NodeId c : g.ops_of(Op::Const)) {
    if (g.data_users(c).empty()) result.push_back(Match{"", {c}});
  }
  return result;
}

inline std::vector<Match> match_cmp_fold_int(const ProgramGraph& g) {
  return detail::binary_const_matches(g, Op::Cmp);
}

inline ProgramGraph apply_cmp_fold_int(const ProgramGraph& g, const Match& m) {
  Relation rel = g.op_kind(m.anchors[0]).relation();
  bool result = holds(rel, g.op_kind(m.anchors[1]).value(), g.op_kind(m.anchors[2]).value());
  return detail::replace_with_const(g, m.anchors[0], result ? 1 : 0);
}

inline std::vector<Match> match_cond_fold_true(const ProgramGraph& g) {
  return detail::cond_matches(g, 1);
}

inline std::vector<Match> match_cond_fold_false(const ProgramGraph& g) {
  return detail::cond_matches(g, 0);
}

/// Plain blocks (never Start/EndBlock) nothing jumps to. Anchors: [block].
inline std::vector<Match> match_block_remove(const ProgramGraph& g) {
  std::vector<Match> result;
  for (NodeId b : g.blocks_of_kind(BlockKind::Block)) {
    if (g.control_preds(b).empty()) result.push_back(Match{"", {b}});
  }
  return result;
}

inline ProgramGraph apply_block_remove(const ProgramGraph& g, const Match& m) {
  ProgramGraph out = g;
  for (NodeId member : g.members(m.anchors[0])) out.delete_node(member);
  out.delete_node(m.anchors[0]);
  return out;
}

/// Phi input whose position has no predecessor in the Phi's block.
/// Anchors: [phi, edge node].
inline std::vector<Match> match_phi_adjust(const ProgramGraph& g) {
  std::vector<Match> result;
  for (NodeId phi : g.ops_of(Op::Phi)) {
    auto block = g.block_of(phi);
    if (!block) continue;
    auto control = firmfold::detail::position_set(g.control_preds(*block));
    for (const Port& in : g.data_inputs(phi)) {
      if (!control.contains(in.position)) result.push_back(Match{"", {phi, in.edge}});
    }
  }
  return result;
}

inline ProgramGraph apply_phi_adjust(const ProgramGraph& g, const Match& m) {
  ProgramGraph out = g;
  out.delete_node(m.anchors[1]);
  return out;
}

/// Phi with one input, aligned with the single predecessor of its block.
/// Anchors: [phi].
inline std::vector<Match> match_phi_fold_single(const ProgramGraph& g) {
  std::vector<Match> result;
  for (NodeId phi : g.ops_of(Op::Phi)) {
    auto block = g.block_of(phi);
    if (!block) continue;
    auto preds = g.control_preds(*block);
    auto inputs = g.data_inputs(phi);
    if (preds.size() != 1 || inputs.size() != 1) continue;
    if (inputs[0].position != preds[0].position || inputs[0].node == phi) continue;
    result.push_back(Match{"", {phi}});
  }
  return result;
}

inline ProgramGraph apply_phi_fold_single(const ProgramGraph& g, const Match& m) {
  NodeId phi = m.anchors[0];
  NodeId operand = g.data_inputs(phi).front().node;
  ProgramGraph out = g;
  for (const Port& user : g.data_users(phi)) out.set_source(user.edge, operand);
  out.delete_node(phi);
  return out;
}

inline std::vector<Match> match_add_fold_int(const ProgramGraph& g) {
  return detail::binary_const_matches(g, Op::Add);
}

inline ProgramGraph apply_add_fold_int(const ProgramGraph& g, const Match& m) {
  std::int32_t sum = wrap_add(g.op_kind(m.anchors[1]).value(), g.op_kind(m.anchors[2]).value());
  return detail::replace_with_const(g, m.anchors[0], sum);
}

/// The ten rules, in priority order: three cleanups first, then the seven
/// folding rules.
inline const std::vector<Rule>& catalog() {
  static const std::vector<Rule> kCatalog = {
      {kCleanupDanglingDataflow, 1, match_cleanup_dangling_dataflow, apply_delete_anchor},
      {kCleanupDanglingControl, 2, match_cleanup_dangling_control, apply_delete_anchor},
      {kCleanupUnrefConst, 3, match_cleanup_unref_const, apply_delete_anchor},
      {kCmpFoldInt, 4, match_cmp_fold_int, apply_cmp_fold_int},
      {kCondFoldTrue, 5, match_cond_fold_true, detail::cond_apply},
      {kCondFoldFalse, 6, match_cond_fold_false, detail::cond_apply},
      {kBlockRemove, 7, match_block_remove, apply_block_remove},
      {kPhiAdjust, 8, match_phi_adjust, apply_phi_adjust},
      {kPhiFoldSingle, 9, match_phi_fold_single, apply_phi_fold_single},
      {kAddFoldInt, 10, match_add_fold_int, apply_add_fold_int},
  };
  return kCatalog;
}

inline const Rule& rule(std::string_view name) {
  for (const Rule& r : catalog()) {
    if (r.name == name) return r;
  }
  throw std::out_of_range("no rule named " + std::string(name));
}

// Checked entry points: each throws StaleMatch unless `m` is a current
// match of the named rule.
inline ProgramGraph add_fold_int(const ProgramGraph& g, const Match& m) { return apply(g, rule(kAddFoldInt), m); }
inline ProgramGraph cmp_fold_int(const ProgramGraph& g, const Match& m) { return apply(g, rule(kCmpFoldInt), m); }
inline ProgramGraph cond_fold_true(const ProgramGraph& g, const Match& m) { return apply(g, rule(kCondFoldTrue), m); }
inline ProgramGraph cond_fold_false(const ProgramGraph& g, const Match& m) { return apply(g, rule(kCondFoldFalse), m); }
inline ProgramGraph block_remove(const ProgramGraph& g, const Match& m) { return apply(g, rule(kBlockRemove), m); }
inline ProgramGraph phi_adjust(const ProgramGraph& g, const Match& m) { return apply(g, rule(kPhiAdjust), m); }
inline ProgramGraph phi_fold_single(const ProgramGraph& g, const Match& m) { return apply(g, rule(kPhiFoldSingle), m); }
inline ProgramGraph cleanup_dangling_dataflow(const ProgramGraph& g, const Match& m) { return apply(g, rule(kCleanupDanglingDataflow), m); }
inline ProgramGraph cleanup_dangling_control(const ProgramGraph& g, const Match& m) { return apply(g, rule(kCleanupDanglingControl), m); }
inline ProgramGraph cleanup_unref_const(const ProgramGraph& g, const Match& m) { return apply(g, rule(kCleanupUnrefConst), m); }

}  // namespace firmfold::rules
