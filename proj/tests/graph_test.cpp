#include <gtest/gtest.h>

#include <random>

#include "firmfold/firmfold.hpp"
#include "support.hpp"

namespace firmfold {
namespace {

TEST(GraphTest, NewGraphIsEmpty) {
  ProgramGraph g = new_graph();
  EXPECT_TRUE(g.ops().empty());
  EXPECT_TRUE(g.blocks().empty());
  EXPECT_TRUE(g.edges().empty());
  EXPECT_EQ(g.element_count(), 0u);

  g.add_block(BlockKind::StartBlock);
  EXPECT_EQ(g.blocks().size(), 1u);
  EXPECT_EQ(g.ops().size(), 0u);
}

TEST(GraphTest, IndependentIdSpaces) {
  ProgramGraph a = new_graph();
  ProgramGraph b = new_graph();
  EXPECT_EQ(a.add_block(BlockKind::Block), b.add_block(BlockKind::Block));
}

TEST(GraphTest, AddBlockReturnsFreshIds) {
  ProgramGraph g;
  NodeId s = g.add_block(BlockKind::StartBlock);
  EXPECT_EQ(g.block_kind(s), BlockKind::StartBlock);
  NodeId b1 = g.add_block(BlockKind::Block);
  NodeId b2 = g.add_block(BlockKind::Block);
  EXPECT_NE(b1, b2);
}

TEST(GraphTest, DuplicateStartBlockIsOnlyAVerifierConcern) {
  ProgramGraph g;
  g.add_block(BlockKind::StartBlock);
  g.add_block(BlockKind::StartBlock);
  auto violations = check_single_start(g);
  ASSERT_EQ(violations.size(), 1u);
  EXPECT_EQ(violations[0].check, CheckName::SingleStart);
}

TEST(GraphTest, IdsAreNeverReused) {
  ProgramGraph g;
  NodeId b = g.add_block(BlockKind::Block);
  g.delete_node(b);
  EXPECT_GT(g.add_block(BlockKind::Block), b);
}

TEST(GraphTest, AddOp) {
  ProgramGraph g;
  NodeId start = g.add_block(BlockKind::StartBlock);
  NodeId c = g.add_op(OpKind::constant(3), start);
  EXPECT_EQ(g.op_kind(c).op(), Op::Const);
  EXPECT_EQ(g.op_kind(c).value(), 3);
  EXPECT_EQ(g.block_of(c), start);

  try {
    g.add_op(Op::Add, c);
    FAIL() << "expected UnknownBlock";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::UnknownBlock);
  }

  NodeId merge = g.add_block(BlockKind::Block);
  NodeId phi = g.add_op(Op::Phi, merge);
  EXPECT_TRUE(g.data_inputs(phi).empty());
}

TEST(GraphTest, ConnectOrdersInputsByPosition) {
  ProgramGraph g;
  NodeId s = g.add_block(BlockKind::StartBlock);
  NodeId c0 = g.add_op(OpKind::constant(1), s);
  NodeId c1 = g.add_op(OpKind::constant(2), s);
  NodeId add = g.add_op(Op::Add, s);
  g.connect(c1, add, EdgeKind::Dataflow, 1);
  g.connect(c0, add, EdgeKind::Dataflow, 0);
  auto inputs = g.data_inputs(add);
  ASSERT_EQ(inputs.size(), 2u);
  EXPECT_EQ(inputs[0].node, c0);
  EXPECT_EQ(inputs[1].node, c1);
  EXPECT_EQ(inputs[0].position, 0u);
}

TEST(GraphTest, ConnectControlflow) {
  ProgramGraph g;
  NodeId b = g.add_block(BlockKind::Block);
  NodeId merge = g.add_block(BlockKind::Block);
  NodeId jmp = g.add_op(Op::Jmp, b);
  NodeId e = g.connect(jmp, merge, EdgeKind::Controlflow, 0);
  auto preds = g.control_preds(merge);
  ASSERT_EQ(preds.size(), 1u);
  EXPECT_EQ(preds[0], (Port{e, jmp, 0}));
}

TEST(GraphTest, ConnectRejectsDuplicatePosition) {
  ProgramGraph g;
  NodeId s = g.add_block(BlockKind::StartBlock);
  NodeId c = g.add_op(OpKind::constant(1), s);
  NodeId add = g.add_op(Op::Add, s);
  g.connect(c, add, EdgeKind::Dataflow, 0);
  try {
    g.connect(c, add, EdgeKind::Dataflow, 0);
    FAIL() << "expected DuplicatePosition";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::DuplicatePosition);
  }
}

TEST(GraphTest, ConnectRejectsIncompatibleEndpoints) {
  ProgramGraph g;
  NodeId s = g.add_block(BlockKind::StartBlock);
  NodeId c = g.add_op(OpKind::constant(1), s);
  NodeId cond = g.add_op(Op::Cond, s);
  NodeId jmp = g.add_op(Op::Jmp, s);
  auto code_of = [](auto&& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.code();
    }
    return Errc::MalformedGraph;
  };
  // Dataflow into a block.
  EXPECT_EQ(code_of([&] { g.connect(c, s, EdgeKind::Dataflow, 0); }), Errc::IncompatibleEndpoints);
  // Controlflow from a Const.
  EXPECT_EQ(code_of([&] { g.connect(c, s, EdgeKind::Controlflow, 0); }), Errc::IncompatibleEndpoints);
  // Controlflow into an operation.
  EXPECT_EQ(code_of([&] { g.connect(jmp, c, EdgeKind::Controlflow, 0); }), Errc::IncompatibleEndpoints);
  // Cond successors need a branch, others must not have one.
  EXPECT_EQ(code_of([&] { g.connect(cond, s, EdgeKind::Controlflow, 0); }), Errc::IncompatibleEndpoints);
  EXPECT_EQ(code_of([&] { g.connect(jmp, s, EdgeKind::Controlflow, 0, 1); }), Errc::IncompatibleEndpoints);
  NodeId b = g.add_block(BlockKind::Block);
  g.connect(cond, b, EdgeKind::Controlflow, 0, 1);
  EXPECT_EQ(code_of([&] { g.connect(cond, s, EdgeKind::Controlflow, 0, 1); }), Errc::IncompatibleEndpoints);
  EXPECT_EQ(code_of([&] { g.connect(c, NodeId{999}, EdgeKind::Dataflow, 0); }), Errc::UnknownNode);
}

TEST(GraphTest, DeleteNodeCountsIncidentEdges) {
  ProgramGraph g;
  NodeId s = g.add_block(BlockKind::StartBlock);
  NodeId lone = g.add_op(OpKind::constant(7), s);
  EXPECT_EQ(g.delete_node(lone), 1u);

  NodeId c0 = g.add_op(OpKind::constant(1), s);
  NodeId c1 = g.add_op(OpKind::constant(2), s);
  NodeId add = g.add_op(Op::Add, s);
  NodeId ret = g.add_op(Op::Return, s);
  g.connect(c0, add, EdgeKind::Dataflow, 0);
  g.connect(c1, add, EdgeKind::Dataflow, 1);
  g.connect(add, ret, EdgeKind::Dataflow, 0);
  EXPECT_EQ(g.delete_node(add), 4u);
  EXPECT_TRUE(g.data_users(c0).empty());
  EXPECT_TRUE(g.data_inputs(ret).empty());

  try {
    g.delete_node(NodeId{12345});
    FAIL() << "expected UnknownNode";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::UnknownNode);
  }
}

TEST(GraphTest, DeletingABlockKeepsItsMembers) {
  ProgramGraph g;
  NodeId b = g.add_block(BlockKind::Block);
  NodeId jmp = g.add_op(Op::Jmp, b);
  g.delete_node(b);
  EXPECT_TRUE(g.is_op(jmp));
  EXPECT_FALSE(g.block_of(jmp).has_value());
  EXPECT_TRUE(g.containment().empty());
}

TEST(GraphTest, DataUsersAndMembers) {
  ProgramGraph g;
  NodeId s = g.add_block(BlockKind::StartBlock);
  NodeId c = g.add_op(OpKind::constant(1), s);
  EXPECT_TRUE(g.data_users(c).empty());
  NodeId cmp = g.add_op(OpKind::compare(Relation::lt), s);
  NodeId add = g.add_op(Op::Add, s);
  g.connect(c, add, EdgeKind::Dataflow, 0);
  g.connect(c, cmp, EdgeKind::Dataflow, 0);
  auto users = g.data_users(c);
  ASSERT_EQ(users.size(), 2u);
  EXPECT_EQ(users[0].node, cmp);
  EXPECT_EQ(users[1].node, add);

  NodeId empty = g.add_block(BlockKind::Block);
  EXPECT_TRUE(g.members(empty).empty());
  EXPECT_EQ(g.members(s), (std::vector<NodeId>{c, cmp, add}));
  g.delete_node(cmp);
  EXPECT_EQ(g.members(s), (std::vector<NodeId>{c, add}));
}

TEST(GraphTest, ExampleGraphQueries) {
  MinPlusOne p = build_min_plus_one_parts(3, 5, Relation::lt);
  const ProgramGraph& g = p.graph;
  auto preds = g.control_preds(p.merge);
  ASSERT_EQ(preds.size(), 2u);
  EXPECT_EQ(preds[0].node, p.jmp_true);
  EXPECT_EQ(preds[1].node, p.jmp_false);
  EXPECT_TRUE(g.control_preds(p.start).empty());
  auto members = g.members(p.start);
  EXPECT_EQ(members, (std::vector<NodeId>{p.const_a, p.const_b, p.const_one, p.cmp, p.cond}));
}

TEST(GraphTest, EndBlockAfterFoldingHasOnePredecessor) {
  FoldResult r = fold(build_min_plus_one(3, 5, Relation::lt), rules::catalog(), 100);
  auto ends = r.graph.blocks_of_kind(BlockKind::EndBlock);
  ASSERT_EQ(ends.size(), 1u);
  auto preds = r.graph.control_preds(ends.front());
  ASSERT_EQ(preds.size(), 1u);
  EXPECT_EQ(r.graph.op_kind(preds.front().node).op(), Op::Return);
}

TEST(GraphTest, PhiInputsAfterPhiAdjust) {
  MinPlusOne p = build_min_plus_one_parts(3, 5, Relation::lt);
  ProgramGraph g = p.graph;
  g.delete_node(p.jmp_false);  // merge loses predecessor 1
  auto found = matches(g, rules::rule(rules::kPhiAdjust));
  ASSERT_EQ(found.size(), 1u);
  g = rules::phi_adjust(g, found.front());
  auto inputs = g.data_inputs(p.phi);
  ASSERT_EQ(inputs.size(), 1u);
  EXPECT_EQ(inputs[0].node, p.const_a);
}

TEST(GraphTest, AddFoldUsersMoveToNewConst) {
  ProgramGraph g;
  NodeId s = g.add_block(BlockKind::StartBlock);
  NodeId c2 = g.add_op(OpKind::constant(2), s);
  NodeId c3 = g.add_op(OpKind::constant(3), s);
  NodeId add = g.add_op(Op::Add, s);
  g.connect(c2, add, EdgeKind::Dataflow, 0);
  g.connect(c3, add, EdgeKind::Dataflow, 1);
  NodeId r1 = g.add_op(Op::Return, s);
  NodeId r2 = g.add_op(Op::Phi, s);
  g.connect(add, r1, EdgeKind::Dataflow, 0);
  g.connect(add, r2, EdgeKind::Dataflow, 3);
  auto before = g.data_users(add);

  auto m = matches(g, rules::rule(rules::kAddFoldInt));
  ASSERT_EQ(m.size(), 1u);
  ProgramGraph out = rules::add_fold_int(g, m.front());
  auto fresh = out.ops_of(Op::Const).back();
  auto after = out.data_users(fresh);
  ASSERT_EQ(after.size(), before.size());
  for (std::size_t i = 0; i < after.size(); ++i) {
    EXPECT_EQ(after[i].edge, before[i].edge);
    EXPECT_EQ(after[i].node, before[i].node);
    EXPECT_EQ(after[i].position, before[i].position);
  }
}

// Property: graphs built through the public operations never hold dangling
// references, and delete_node removes exactly the node plus its incident
// Edge nodes.
TEST(GraphTest, RandomGraphsStayReferentiallyIntact) {
  std::mt19937 rng(20240611);
  for (int round = 0; round < 200; ++round) {
    ProgramGraph g = testing::random_graph(rng);
    auto check = [](const ProgramGraph& h) {
      for (const auto& [id, e] : h.edges()) {
        ASSERT_TRUE(h.contains(e.source));
        ASSERT_TRUE(h.contains(e.target));
      }
      for (const auto& [op, block] : h.containment()) ASSERT_TRUE(h.is_block(block));
    };
    check(g);
    std::vector<NodeId> nodes;
    for (const auto& entry : g.ops()) nodes.push_back(entry.first);
    for (const auto& entry : g.blocks()) nodes.push_back(entry.first);
    if (nodes.empty()) continue;
    NodeId victim = nodes[rng() % nodes.size()];
    std::set<NodeId> touching = g.incoming(victim);
    touching.insert(g.outgoing(victim).begin(), g.outgoing(victim).end());
    std::size_t incident = touching.size();
    std::size_t before = g.element_count();
    EXPECT_EQ(g.delete_node(victim), 1 + incident);
    EXPECT_EQ(g.element_count(), before - 1 - incident);
    check(g);
  }
}

TEST(GraphTest, ConnectRoundTripsThroughDataInputs) {
  std::mt19937 rng(7);
  for (int round = 0; round < 100; ++round) {
    ProgramGraph g;
    NodeId s = g.add_block(BlockKind::StartBlock);
    NodeId phi = g.add_op(Op::Phi, s);
    std::set<std::uint32_t> used;
    for (int i = 0; i < 5; ++i) {
      auto pos = static_cast<std::uint32_t>(rng() % 8);
      if (!used.insert(pos).second) continue;
      NodeId c = g.add_op(OpKind::constant(i), s);
      g.connect(c, phi, EdgeKind::Dataflow, pos);
      bool found = false;
      for (const Port& p : g.data_inputs(phi)) found |= (p.node == c && p.position == pos);
      EXPECT_TRUE(found);
    }
  }
}

}  // namespace
}  // namespace firmfold
