#pragma once

#include <cstdint>

#include "firmfold/graph.hpp"

namespace firmfold {

/// Node handles of the graph built by build_min_plus_one_parts.
struct MinPlusOne {
  ProgramGraph graph;
  NodeId start, on_true, on_false, merge, end;
  NodeId const_a, const_b, const_one, cmp, cond;
  NodeId jmp_true, jmp_false, phi, add, ret;
};

/// `return (a REL b ? a : b) + 1` with constant operands, as a diamond:
///
///   StartBlock: Const a, Const b, Const 1, Cmp(a, b), Cond(Cmp)
///   true Block: Jmp -> merge@0        false Block: Jmp -> merge@1
///   merge Block: Phi(a@0, b@1), Add(Phi, Const 1), Return(Add) -> EndBlock
inline MinPlusOne build_min_plus_one_parts(std::int32_t a, std::int32_t b, Relation rel) {
  MinPlusOne p;
  ProgramGraph& g = p.graph;
  p.start = g.add_block(BlockKind::StartBlock);
  p.on_true = g.add_block(BlockKind::Block);
  p.on_false = g.add_block(BlockKind::Block);
  p.merge = g.add_block(BlockKind::Block);
  p.end = g.add_block(BlockKind::EndBlock);

  p.const_a = g.add_op(OpKind::constant(a), p.start);
  p.const_b = g.add_op(OpKind::constant(b), p.start);
  p.const_one = g.add_op(OpKind::constant(1), p.start);
  p.cmp = g.add_op(OpKind::compare(rel), p.start);
  p.cond = g.add_op(Op::Cond, p.start);
  p.jmp_true = g.add_op(Op::Jmp, p.on_true);
  p.jmp_false = g.add_op(Op::Jmp, p.on_false);
  p.phi = g.add_op(Op::Phi, p.merge);
  p.add = g.add_op(Op::Add, p.merge);
  p.ret = g.add_op(Op::Return, p.merge);

  g.connect(p.const_a, p.cmp, EdgeKind::Dataflow, 0);
  g.connect(p.const_b, p.cmp, EdgeKind::Dataflow, 1);
  g.connect(p.cmp, p.cond, EdgeKind::Dataflow, 0);
  g.connect(p.cond, p.on_true, EdgeKind::Controlflow, 0, 1);
  g.connect(p.cond, p.on_false, EdgeKind::Controlflow, 0, 0);
  g.connect(p.jmp_true, p.merge, EdgeKind::Controlflow, 0);
  g.connect(p.jmp_false, p.merge, EdgeKind::Controlflow, 1);
  g.connect(p.const_a, p.phi, EdgeKind::Dataflow, 0);
  g.connect(p.const_b, p.phi, EdgeKind::Dataflow, 1);
  g.connect(p.phi, p.add, EdgeKind::Dataflow, 0);
  g.connect(p.const_one, p.add, EdgeKind::Dataflow, 1);
  g.connect(p.add, p.ret, EdgeKind::Dataflow, 0);
  g.connect(p.ret, p.end, EdgeKind::Controlflow, 0);
  return p;
}

inline ProgramGraph build_min_plus_one(std::int32_t a, std::int32_t b, Relation rel) {
  return build_min_plus_one_parts(a, b, rel).graph;
}

}  // namespace firmfold
