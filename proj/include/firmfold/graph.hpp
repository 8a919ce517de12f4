#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "firmfold/error.hpp"

namespace firmfold {

/// Identity of a node within one ProgramGraph. Ids are handed out in
/// increasing order and never reused, even after deletion.
struct NodeId {
  std::uint32_t value = 0;

  friend constexpr auto operator<=>(NodeId, NodeId) = default;
};

inline std::string to_string(NodeId id) { return "n" + std::to_string(id.value); }

enum class Op : std::uint8_t { Const, Cmp, Cond, Phi, Add, Jmp, Return };
enum class Relation : std::uint8_t { lt, le, gt, ge, eq, ne };
enum class BlockKind : std::uint8_t { StartBlock, EndBlock, Block };
enum class EdgeKind : std::uint8_t { Dataflow, Controlflow };

inline std::string_view to_string(Op op) {
  switch (op) {
    case Op::Const: return "Const";
    case Op::Cmp: return "Cmp";
    case Op::Cond: return "Cond";
    case Op::Phi: return "Phi";
    case Op::Add: return "Add";
    case Op::Jmp: return "Jmp";
    case Op::Return: return "Return";
  }
  return "?";
}

inline std::string_view to_string(Relation rel) {
  switch (rel) {
    case Relation::lt: return "lt";
    case Relation::le: return "le";
    case Relation::gt: return "gt";
    case Relation::ge: return "ge";
    case Relation::eq: return "eq";
    case Relation::ne: return "ne";
  }
  return "?";
}

inline std::string_view to_string(BlockKind kind) {
  switch (kind) {
    case BlockKind::StartBlock: return "StartBlock";
    case BlockKind::EndBlock: return "EndBlock";
    case BlockKind::Block: return "Block";
  }
  return "?";
}

inline std::string_view to_string(EdgeKind kind) {
  return kind == EdgeKind::Dataflow ? "Dataflow" : "Controlflow";
}

inline std::optional<Relation> parse_relation(std::string_view text) {
  for (auto rel : {Relation::lt, Relation::le, Relation::gt, Relation::ge, Relation::eq,
                   Relation::ne}) {
    if (to_string(rel) == text) return rel;
  }
  return std::nullopt;
}

/// Signed comparison under the given relation.
inline bool holds(Relation rel, std::int32_t lhs, std::int32_t rhs) {
  switch (rel) {
    case Relation::lt: return lhs < rhs;
    case Relation::le: return lhs <= rhs;
    case Relation::gt: return lhs > rhs;
    case Relation::ge: return lhs >= rhs;
    case Relation::eq: return lhs == rhs;
    case Relation::ne: return lhs != rhs;
  }
  return false;
}

/// Two's-complement 32-bit addition.
inline std::int32_t wrap_add(std::int32_t lhs, std::int32_t rhs) {
  return static_cast<std::int32_t>(static_cast<std::uint32_t>(lhs) +
                                   static_cast<std::uint32_t>(rhs));
}

/// Number of dataflow inputs an operation must have; Phi has none fixed.
inline std::optional<std::size_t> fixed_arity(Op op) {
  switch (op) {
    case Op::Const:
    case Op::Jmp: return 0;
    case Op::Cond:
    case Op::Return: return 1;
    case Op::Cmp:
    case Op::Add: return 2;
    case Op::Phi: return std::nullopt;
  }
  return std::nullopt;
}

inline bool is_control_source(Op op) {
  return op == Op::Jmp || op == Op::Cond || op == Op::Return;
}

/// Operation kind with its attributes. Only Const carries a value and only
/// Cmp carries a relation.
class OpKind {
 public:
  // Implicit on purpose: OpKind k = Op::Add;
  OpKind(Op op) : op_(op) {}  // NOLINT

  static OpKind constant(std::int32_t value) {
    OpKind kind(Op::Const);
    kind.value_ = value;
    return kind;
  }

  static OpKind compare(Relation rel) {
    OpKind kind(Op::Cmp);
    kind.relation_ = rel;
    return kind;
  }

  Op op() const { return op_; }
  std::int32_t value() const { return value_; }
  Relation relation() const { return relation_; }

  friend bool operator==(const OpKind&, const OpKind&) = default;

 private:
  Op op_;
  std::int32_t value_ = 0;
  Relation relation_ = Relation::lt;
};

inline std::string to_string(const OpKind& kind) {
  std::string text(to_string(kind.op()));
  if (kind.op() == Op::Const) text += " " + std::to_string(kind.value());
  if (kind.op() == Op::Cmp) text += " " + std::string(to_string(kind.relation()));
  return text;
}

/// A FIRM edge turned into a node: it is linked to its producer by an
/// "out" adjacency and to its consumer by an "in" adjacency. Controlflow
/// Edge nodes leaving a Cond also record which branch they implement
/// (1 = true, 0 = false).
struct EdgeNode {
  NodeId id;
  EdgeKind kind = EdgeKind::Dataflow;
  std::uint32_t position = 0;
  NodeId source;
  NodeId target;
  std::optional<int> branch;

  friend bool operator==(const EdgeNode&, const EdgeNode&) = default;
};

/// One input or output port seen from a node: the Edge node and the node at
/// its other end.
struct Port {
  NodeId edge;
  NodeId node;
  std::uint32_t position = 0;

  friend bool operator==(const Port&, const Port&) = default;
};

class ProgramGraph {
 public:
  NodeId add_block(BlockKind kind) {
    NodeId id = fresh_id();
    blocks_.emplace(id, kind);
    return id;
  }

  NodeId add_op(OpKind kind, NodeId block) {
    if (!is_block(block)) throw Error(Errc::UnknownBlock, to_string(block) + " is not a block");
    NodeId id = fresh_id();
    ops_.emplace(id, kind);
    containment_.emplace(id, block);
    return id;
  }

  /// Operation without a containing block. Only importers and tests build
  /// these; the containment check reports them.
  NodeId add_detached_op(OpKind kind) {
    NodeId id = fresh_id();
    ops_.emplace(id, kind);
    return id;
  }

  NodeId connect(NodeId source, NodeId target, EdgeKind kind, std::uint32_t position,
                 std::optional<int> branch = std::nullopt) {
    check_endpoints(kind, source, target, branch, std::nullopt);
    for (NodeId e : incoming(target)) {
      const EdgeNode& other = edges_.at(e);
      if (other.kind == kind && other.position == position) {
        throw Error(Errc::DuplicatePosition, std::string(to_string(kind)) + " input " +
                                                 std::to_string(position) + " of " +
                                                 to_string(target) + " already connected");
      }
    }
    NodeId id = fresh_id();
    edges_.emplace(id, EdgeNode{id, kind, position, source, target, branch});
    out_index_[source].insert(id);
    in_index_[target].insert(id);
    return id;
  }

  /// Removes the node and every Edge node incident to it. Deleting a block
  /// leaves its members in place but without a containing block. Returns
  /// the number of removed graph elements.
  std::size_t delete_node(NodeId id) {
    if (is_edge(id)) {
      erase_edge(id);
      return 1;
    }
    if (!contains(id)) throw Error(Errc::UnknownNode, to_string(id));
    std::size_t count = 1;
    std::vector<NodeId> incident;
    for (NodeId e : incoming(id)) incident.push_back(e);
    for (NodeId e : outgoing(id)) incident.push_back(e);
    for (NodeId e : incident) {
      if (edges_.contains(e)) {
        erase_edge(e);
        ++count;
      }
    }
    in_index_.erase(id);
    out_index_.erase(id);
    if (ops_.erase(id) > 0) {
      containment_.erase(id);
    } else {
      blocks_.erase(id);
      std::erase_if(containment_, [id](const auto& entry) { return entry.second == id; });
    }
    return count;
  }

  void move_to_block(NodeId op, NodeId block) {
    require_op(op);
    if (!is_block(block)) throw Error(Errc::UnknownBlock, to_string(block) + " is not a block");
    containment_[op] = block;
  }

  void detach_from_block(NodeId op) {
    require_op(op);
    containment_.erase(op);
  }

  /// Moves the producing end of an Edge node to another node. The branch tag
  /// has to be supplied again because it depends on the new source.
  void set_source(NodeId edge, NodeId new_source, std::optional<int> branch = std::nullopt) {
    EdgeNode& e = edge_ref(edge);
    check_endpoints(e.kind, new_source, e.target, branch, edge);
    out_index_[e.source].erase(edge);
    e.source = new_source;
    e.branch = branch;
    out_index_[new_source].insert(edge);
  }

  /// Overwrites a position without the duplicate check; callers renumber a
  /// whole port set at once.
  void set_position(NodeId edge, std::uint32_t position) { edge_ref(edge).position = position; }

  bool contains(NodeId id) const { return is_op(id) || is_block(id) || is_edge(id); }
  bool is_op(NodeId id) const { return ops_.contains(id); }
  bool is_block(NodeId id) const { return blocks_.contains(id); }
  bool is_edge(NodeId id) const { return edges_.contains(id); }

  const OpKind& op_kind(NodeId id) const {
    auto it = ops_.find(id);
    if (it == ops_.end()) throw Error(Errc::UnknownNode, to_string(id) + " is not an operation");
    return it->second;
  }

  BlockKind block_kind(NodeId id) const {
    auto it = blocks_.find(id);
    if (it == blocks_.end()) throw Error(Errc::UnknownNode, to_string(id) + " is not a block");
    return it->second;
  }

  const EdgeNode& edge(NodeId id) const {
    auto it = edges_.find(id);
    if (it == edges_.end()) throw Error(Errc::UnknownNode, to_string(id) + " is not an edge node");
    return it->second;
  }

  std::optional<NodeId> block_of(NodeId op) const {
    require_op(op);
    auto it = containment_.find(op);
    if (it == containment_.end()) return std::nullopt;
    return it->second;
  }

  /// Dataflow inputs of an operation, ascending by position.
  std::vector<Port> data_inputs(NodeId n) const {
    require_op(n);
    return ports(incoming(n), EdgeKind::Dataflow, /*use_source=*/true);
  }

  /// Dataflow consumers of an operation, ascending by consumer id.
  std::vector<Port> data_users(NodeId n) const {
    require_op(n);
    auto result = ports(outgoing(n), EdgeKind::Dataflow, /*use_source=*/false);
    std::ranges::sort(result, [](const Port& a, const Port& b) {
      return std::tie(a.node, a.position, a.edge) < std::tie(b.node, b.position, b.edge);
    });
    return result;
  }

  /// Controlflow predecessors of a block, ascending by position.
  std::vector<Port> control_preds(NodeId b) const {
    if (!is_block(b)) throw Error(Errc::UnknownNode, to_string(b) + " is not a block");
    return ports(incoming(b), EdgeKind::Controlflow, /*use_source=*/true);
  }

  /// Controlflow Edge nodes leaving an operation, ascending by target block.
  std::vector<Port> control_succs(NodeId op) const {
    require_op(op);
    auto result = ports(outgoing(op), EdgeKind::Controlflow, /*use_source=*/false);
    std::ranges::sort(result, [](const Port& a, const Port& b) {
      return std::tie(a.node, a.position, a.edge) < std::tie(b.node, b.position, b.edge);
    });
    return result;
  }

  std::vector<NodeId> members(NodeId b) const {
    if (!is_block(b)) throw Error(Errc::UnknownNode, to_string(b) + " is not a block");
    std::vector<NodeId> result;
    for (const auto& [op, block] : containment_) {
      if (block == b) result.push_back(op);
    }
    return result;
  }

  std::vector<NodeId> blocks_of_kind(BlockKind kind) const {
    std::vector<NodeId> result;
    for (const auto& [id, k] : blocks_) {
      if (k == kind) result.push_back(id);
    }
    return result;
  }

  std::vector<NodeId> ops_of(Op op) const {
    std::vector<NodeId> result;
    for (const auto& [id, kind] : ops_) {
      if (kind.op() == op) result.push_back(id);
    }
    return result;
  }

  const std::map<NodeId, OpKind>& ops() const { return ops_; }
  const std::map<NodeId, BlockKind>& blocks() const { return blocks_; }
  const std::map<NodeId, EdgeNode>& edges() const { return edges_; }
  const std::map<NodeId, NodeId>& containment() const { return containment_; }

  std::size_t element_count() const { return ops_.size() + blocks_.size() + edges_.size(); }

  /// Edge node ids whose target / source is the given node.
  const std::set<NodeId>& incoming(NodeId id) const { return lookup(in_index_, id); }
  const std::set<NodeId>& outgoing(NodeId id) const { return lookup(out_index_, id); }

 private:
  NodeId fresh_id() { return NodeId{next_id_++}; }

  static const std::set<NodeId>& lookup(const std::map<NodeId, std::set<NodeId>>& index,
                                        NodeId id) {
    static const std::set<NodeId> kEmpty;
    auto it = index.find(id);
    return it == index.end() ? kEmpty : it->second;
  }

  void require_op(NodeId id) const {
    if (!is_op(id)) throw Error(Errc::UnknownNode, to_string(id) + " is not an operation");
  }

  EdgeNode& edge_ref(NodeId id) {
    auto it = edges_.find(id);
    if (it == edges_.end()) throw Error(Errc::UnknownNode, to_string(id) + " is not an edge node");
    return it->second;
  }

  void erase_edge(NodeId id) {
    const EdgeNode& e = edges_.at(id);
    out_index_[e.source].erase(id);
    in_index_[e.target].erase(id);
    edges_.erase(id);
  }

  std::vector<Port> ports(const std::set<NodeId>& edge_ids, EdgeKind kind, bool use_source) const {
    std::vector<Port> result;
    for (NodeId e : edge_ids) {
      const EdgeNode& edge = edges_.at(e);
      if (edge.kind != kind) continue;
      result.push_back(Port{e, use_source ? edge.source : edge.target, edge.position});
    }
    std::ranges::sort(result, [](const Port& a, const Port& b) {
      return std::tie(a.position, a.edge) < std::tie(b.position, b.edge);
    });
    return result;
  }

  // `self` is the Edge node being rewired, if any; it is exempt from the
  // one-edge-per-branch rule.
  void check_endpoints(EdgeKind kind, NodeId source, NodeId target, std::optional<int> branch,
                       std::optional<NodeId> self) const {
    if (!contains(source)) throw Error(Errc::UnknownNode, to_string(source));
    if (!contains(target)) throw Error(Errc::UnknownNode, to_string(target));
    auto fail = [&](const std::string& why) {
      throw Error(Errc::IncompatibleEndpoints, std::string(to_string(kind)) + " " +
                                                   to_string(source) + " -> " +
                                                   to_string(target) + ": " + why);
    };
    if (!is_op(source)) fail("source is not an operation");
    if (kind == EdgeKind::Dataflow) {
      if (!is_op(target)) fail("target is not an operation");
      if (branch) fail("dataflow edges carry no branch");
      return;
    }
    if (!is_block(target)) fail("target is not a block");
    Op op = ops_.at(source).op();
    if (!is_control_source(op)) fail("source cannot transfer control");
    if (op != Op::Cond) {
      if (branch) fail("only Cond successors carry a branch");
      return;
    }
    if (!branch || (*branch != 0 && *branch != 1)) fail("Cond successor needs branch 0 or 1");
    for (NodeId e : outgoing(source)) {
      if (self && e == *self) continue;
      const EdgeNode& other = edges_.at(e);
      if (other.kind == EdgeKind::Controlflow && other.branch == branch) fail("branch taken twice");
    }
  }

  std::uint32_t next_id_ = 0;
  std::map<NodeId, OpKind> ops_;
  std::map<NodeId, BlockKind> blocks_;
  std::map<NodeId, EdgeNode> edges_;
  std::map<NodeId, NodeId> containment_;
  std::map<NodeId, std::set<NodeId>> in_index_;
  std::map<NodeId, std::set<NodeId>> out_index_;
};

inline ProgramGraph new_graph() { return ProgramGraph{}; }

inline std::string format_ids(const std::vector<NodeId>& ids) {
  std::string text = "[";
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i > 0) text += ", ";
    text += to_string(ids[i]);
  }
  return text + "]";
}

}  // namespace firmfold
