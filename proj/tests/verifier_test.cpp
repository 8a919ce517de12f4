#include <gtest/gtest.h>

#include "firmfold/firmfold.hpp"
#include "support.hpp"

namespace firmfold {
namespace {

std::vector<CheckName> checks_of(const std::vector<Violation>& violations) {
  std::vector<CheckName> result;
  for (const Violation& v : violations) result.push_back(v.check);
  return result;
}

TEST(VerifierTest, ExampleIsValid) {
  ProgramGraph g = build_min_plus_one(3, 5, Relation::lt);
  EXPECT_TRUE(check_single_start(g).empty());
  EXPECT_TRUE(check_single_end(g).empty());
  EXPECT_TRUE(check_containment(g).empty());
  EXPECT_TRUE(check_phi(g).empty());
  EXPECT_TRUE(check_positions(g).empty());
  EXPECT_TRUE(check_consts(g).empty());
  EXPECT_TRUE(verify(g).empty());
}

TEST(VerifierTest, SingleStartAndEnd) {
  ProgramGraph g;
  auto none = check_single_start(g);
  ASSERT_EQ(none.size(), 1u);
  EXPECT_TRUE(none[0].absence);
  EXPECT_TRUE(none[0].witnesses.empty());

  NodeId s1 = g.add_block(BlockKind::StartBlock);
  EXPECT_TRUE(check_single_start(g).empty());
  NodeId s2 = g.add_block(BlockKind::StartBlock);
  auto dup = check_single_start(g);
  ASSERT_EQ(dup.size(), 1u);
  EXPECT_FALSE(dup[0].absence);
  EXPECT_EQ(dup[0].witnesses, (std::vector<NodeId>{s1, s2}));

  // Three StartBlocks: one violation per unordered pair.
  g.add_block(BlockKind::StartBlock);
  EXPECT_EQ(check_single_start(g).size(), 3u);

  EXPECT_EQ(check_single_end(g).size(), 1u);
  g.add_block(BlockKind::EndBlock);
  EXPECT_TRUE(check_single_end(g).empty());
  g.add_block(BlockKind::EndBlock);
  EXPECT_EQ(check_single_end(g).size(), 1u);
}

TEST(VerifierTest, Containment) {
  EXPECT_TRUE(check_containment(ProgramGraph{}).empty());
  auto p = build_min_plus_one_parts(3, 5, Relation::lt);
  p.graph.delete_node(p.on_true);
  auto found = check_containment(p.graph);
  ASSERT_EQ(found.size(), 1u);
  EXPECT_EQ(found[0].witnesses, (std::vector<NodeId>{p.jmp_true}));
}

TEST(VerifierTest, PhiCheck) {
  ProgramGraph plain;
  plain.add_op(Op::Add, plain.add_block(BlockKind::StartBlock));
  EXPECT_TRUE(check_phi(plain).empty());

  // 2-input Phi in a block with one predecessor.
  ProgramGraph g;
  NodeId s = g.add_block(BlockKind::StartBlock);
  NodeId b = g.add_block(BlockKind::Block);
  NodeId jmp = g.add_op(Op::Jmp, s);
  g.connect(jmp, b, EdgeKind::Controlflow, 0);
  NodeId c0 = g.add_op(OpKind::constant(0), s);
  NodeId c1 = g.add_op(OpKind::constant(1), s);
  NodeId phi = g.add_op(Op::Phi, b);
  g.connect(c0, phi, EdgeKind::Dataflow, 0);
  g.connect(c1, phi, EdgeKind::Dataflow, 1);
  auto found = check_phi(g);
  ASSERT_EQ(found.size(), 1u);
  EXPECT_EQ(found[0].witnesses.front(), phi);
}

TEST(VerifierTest, PhiCheckComparesSetsNotCounts) {
  ProgramGraph g;
  NodeId s = g.add_block(BlockKind::StartBlock);
  NodeId b = g.add_block(BlockKind::Block);
  NodeId jmp = g.add_op(Op::Jmp, s);
  g.connect(jmp, b, EdgeKind::Controlflow, 0);
  NodeId phi = g.add_op(Op::Phi, b);
  g.connect(g.add_op(OpKind::constant(0), s), phi, EdgeKind::Dataflow, 1);
  EXPECT_EQ(check_phi(g).size(), 1u);
}

TEST(VerifierTest, PositionsAndArity) {
  auto build = [](std::vector<std::uint32_t> positions) {
    ProgramGraph g;
    NodeId s = g.add_block(BlockKind::StartBlock);
    NodeId add = g.add_op(Op::Add, s);
    for (auto p : positions) g.connect(g.add_op(OpKind::constant(1), s), add, EdgeKind::Dataflow, p);
    return g;
  };
  EXPECT_TRUE(check_positions(build({0, 1})).empty());
  auto gap = check_positions(build({0, 2}));
  ASSERT_EQ(gap.size(), 1u);
  EXPECT_EQ(gap[0].check, CheckName::PosCheck);
  auto arity = check_positions(build({0}));
  ASSERT_EQ(arity.size(), 1u);
  EXPECT_NE(arity[0].message.find("expects 2"), std::string::npos);
}

TEST(VerifierTest, BlockPositions) {
  ProgramGraph g;
  NodeId s = g.add_block(BlockKind::StartBlock);
  NodeId b = g.add_block(BlockKind::Block);
  g.connect(g.add_op(Op::Jmp, s), b, EdgeKind::Controlflow, 1);
  auto found = check_positions(g);
  ASSERT_EQ(found.size(), 1u);
  EXPECT_EQ(found[0].witnesses, (std::vector<NodeId>{b}));
}

TEST(VerifierTest, Consts) {
  ProgramGraph none;
  none.add_op(Op::Jmp, none.add_block(BlockKind::StartBlock));
  EXPECT_TRUE(check_consts(none).empty());

  auto p = build_min_plus_one_parts(3, 5, Relation::lt);
  p.graph.move_to_block(p.const_one, p.merge);
  auto found = check_consts(p.graph);
  ASSERT_EQ(found.size(), 1u);
  EXPECT_EQ(found[0].witnesses, (std::vector<NodeId>{p.const_one, p.merge}));
}

TEST(VerifierTest, EmptyGraphLacksStartAndEnd) {
  auto found = verify(ProgramGraph{});
  EXPECT_EQ(checks_of(found), (std::vector<CheckName>{CheckName::SingleStart, CheckName::SingleEnd}));
  EXPECT_EQ(format_violation(found[0]), "single-start: graph has no StartBlock");
}

TEST(VerifierTest, FixedOrder) {
  auto p = build_min_plus_one_parts(3, 5, Relation::lt);
  p.graph.move_to_block(p.const_one, p.merge);
  p.graph.connect(p.const_b, p.add, EdgeKind::Dataflow, 2);
  EXPECT_EQ(checks_of(verify(p.graph)), (std::vector<CheckName>{CheckName::PosCheck, CheckName::Consts}));
}

TEST(VerifierTest, LineFormat) {
  Violation v{CheckName::Consts, {NodeId{3}, NodeId{7}}, "constant outside the StartBlock"};
  EXPECT_EQ(format_violation(v), "consts: constant outside the StartBlock [witnesses: n3, n7]");
}

TEST(VerifierTest, EachMutationTripsExactlyItsCheck) {
  auto mutations = testing::verifier_mutations();
  ASSERT_EQ(mutations.size(), 6u);
  for (const auto& m : mutations) {
    auto found = verify(m.graph);
    ASSERT_EQ(found.size(), 1u) << m.description;
    EXPECT_EQ(found[0].check, m.check) << m.description;
    for (NodeId w : found[0].witnesses) EXPECT_TRUE(m.graph.contains(w));
  }
}

TEST(VerifierTest, IsPure) {
  auto mutations = testing::verifier_mutations();
  for (const auto& m : mutations) EXPECT_EQ(verify(m.graph), verify(m.graph));
}

}  // namespace
}  // namespace firmfold
