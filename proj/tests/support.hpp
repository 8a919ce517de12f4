#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "firmfold/firmfold.hpp"

namespace firmfold::testing {

inline std::string data_path(const std::string& name) {
  return std::string(FIRMFOLD_TEST_DATA) + "/" + name;
}

inline std::string read_data(const std::string& name) {
  std::ifstream in(data_path(name), std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Independent arithmetic for `(a REL b ? a : b) + 1` in 32-bit
/// two's-complement.
inline std::int32_t min_plus_one_oracle(std::int32_t a, std::int32_t b, Relation rel) {
  std::int64_t x = a;
  std::int64_t y = b;
  bool taken = false;
  switch (rel) {
    case Relation::lt: taken = x < y; break;
    case Relation::le: taken = x <= y; break;
    case Relation::gt: taken = x > y; break;
    case Relation::ge: taken = x >= y; break;
    case Relation::eq: taken = x == y; break;
    case Relation::ne: taken = x != y; break;
  }
  std::int64_t sum = (taken ? x : y) + 1;
  if (sum > INT32_MAX) sum -= (std::int64_t{1} << 32);
  return static_cast<std::int32_t>(sum);
}

inline constexpr Relation kRelations[] = {Relation::lt, Relation::le, Relation::gt,
                                          Relation::ge, Relation::eq, Relation::ne};

/// Random graph built through the public operations only. Values are drawn
/// from a small range so that look-alike nodes are common.
inline ProgramGraph random_graph(std::mt19937& rng) {
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  ProgramGraph g;
  std::vector<NodeId> blocks;
  std::vector<NodeId> ops;
  int block_count = pick(1, 4);
  for (int i = 0; i < block_count; ++i) {
    blocks.push_back(g.add_block(static_cast<BlockKind>(pick(0, 2))));
  }
  int op_count = pick(0, 9);
  for (int i = 0; i < op_count; ++i) {
    Op op = static_cast<Op>(pick(0, 6));
    OpKind kind = op;
    if (op == Op::Const) kind = OpKind::constant(pick(-2, 2));
    if (op == Op::Cmp) kind = OpKind::compare(kRelations[pick(0, 5)]);
    if (pick(0, 9) == 0) {
      ops.push_back(g.add_detached_op(kind));
    } else {
      ops.push_back(g.add_op(kind, blocks[pick(0, block_count - 1)]));
    }
  }
  if (ops.empty()) return g;
  int attempts = pick(0, 14);
  for (int i = 0; i < attempts; ++i) {
    NodeId source = ops[pick(0, static_cast<int>(ops.size()) - 1)];
    bool data = pick(0, 2) != 0;
    NodeId target = data ? ops[pick(0, static_cast<int>(ops.size()) - 1)]
                         : blocks[pick(0, block_count - 1)];
    std::optional<int> branch;
    if (!data && g.op_kind(source).op() == Op::Cond) branch = pick(0, 1);
    try {
      g.connect(source, target, data ? EdgeKind::Dataflow : EdgeKind::Controlflow,
                static_cast<std::uint32_t>(pick(0, 3)), branch);
    } catch (const Error&) {
      // incompatible or duplicate: skip
    }
  }
  return g;
}

/// Rebuilds `g` with every node class inserted in shuffled order, so all
/// ids change while the structure stays the same.
inline ProgramGraph permuted_copy(const ProgramGraph& g, std::mt19937& rng) {
  ProgramGraph out;
  std::map<NodeId, NodeId> ids;
  // A few throwaway nodes shift the id space.
  int pad = std::uniform_int_distribution<int>(0, 3)(rng);
  for (int i = 0; i < pad; ++i) out.delete_node(out.add_block(BlockKind::Block));

  std::vector<std::pair<NodeId, BlockKind>> blocks(g.blocks().begin(), g.blocks().end());
  std::ranges::shuffle(blocks, rng);
  for (const auto& [id, kind] : blocks) ids[id] = out.add_block(kind);

  std::vector<std::pair<NodeId, OpKind>> ops(g.ops().begin(), g.ops().end());
  std::ranges::shuffle(ops, rng);
  for (const auto& [id, kind] : ops) {
    auto block = g.block_of(id);
    ids[id] = block ? out.add_op(kind, ids.at(*block)) : out.add_detached_op(kind);
  }

  std::vector<EdgeNode> edges;
  for (const auto& entry : g.edges()) edges.push_back(entry.second);
  std::ranges::shuffle(edges, rng);
  for (const EdgeNode& e : edges) {
    out.connect(ids.at(e.source), ids.at(e.target), e.kind, e.position, e.branch);
  }
  return out;
}

inline bool trace_contains(const std::vector<TraceStep>& trace, std::string_view rule) {
  return std::ranges::any_of(trace, [&](const TraceStep& s) { return s.rule == rule; });
}

inline std::size_t trace_count(const std::vector<TraceStep>& trace, std::string_view rule) {
  return static_cast<std::size_t>(
      std::ranges::count_if(trace, [&](const TraceStep& s) { return s.rule == rule; }));
}

/// The operand of the (single) Return, if the graph has exactly one.
inline std::optional<NodeId> return_operand(const ProgramGraph& g) {
  auto rets = g.ops_of(Op::Return);
  if (rets.size() != 1) return std::nullopt;
  auto inputs = g.data_inputs(rets.front());
  if (inputs.size() != 1) return std::nullopt;
  return inputs.front().node;
}

struct Mutation {
  CheckName check;
  std::string description;
  ProgramGraph graph;
};

/// One single-element mutation of the valid example per check, each meant
/// to trip exactly that check.
inline std::vector<Mutation> verifier_mutations() {
  std::vector<Mutation> result;
  auto base = [] { return build_min_plus_one_parts(3, 5, Relation::lt); };
  {
    auto p = base();
    p.graph.add_block(BlockKind::StartBlock);
    result.push_back({CheckName::SingleStart, "second StartBlock", p.graph});
  }
  {
    auto p = base();
    p.graph.add_block(BlockKind::EndBlock);
    result.push_back({CheckName::SingleEnd, "second EndBlock", p.graph});
  }
  {
    auto p = base();
    p.graph.detach_from_block(p.jmp_true);
    result.push_back({CheckName::Containment, "Jmp without block", p.graph});
  }
  {
    auto p = base();
    p.graph.connect(p.const_one, p.phi, EdgeKind::Dataflow, 2);
    result.push_back({CheckName::PhiCheck, "third Phi input", p.graph});
  }
  {
    auto p = base();
    p.graph.connect(p.const_b, p.add, EdgeKind::Dataflow, 2);
    result.push_back({CheckName::PosCheck, "third Add input", p.graph});
  }
  {
    auto p = base();
    p.graph.move_to_block(p.const_one, p.merge);
    result.push_back({CheckName::Consts, "Const in merge block", p.graph});
  }
  return result;
}

}  // namespace firmfold::testing
