#pragma once

#include <charconv>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "firmfold/graph.hpp"

namespace firmfold {

/// Native graphs are already nodified; FirmAttributed graphs carry typed,
/// attributed edges that still have to be turned into Edge nodes.
enum class DialectTag { Native, FirmAttributed };

namespace gxl_detail {

namespace pt = boost::property_tree;

struct Attr {
  std::string type;  // "int" or "string"
  std::string text;
};

struct RawNode {
  std::string id;
  std::string type;  // href without the leading '#'
  std::map<std::string, Attr> attrs;
};

struct RawEdge {
  std::string from;
  std::string to;
  std::optional<std::string> type;
  std::map<std::string, Attr> attrs;
};

struct RawGraph {
  std::vector<RawNode> nodes;
  std::vector<RawEdge> edges;
};

[[noreturn]] inline void schema(const std::string& why) { throw Error(Errc::SchemaError, why); }

inline std::map<std::string, Attr> read_attrs(const pt::ptree& element) {
  std::map<std::string, Attr> attrs;
  for (const auto& [tag, child] : element) {
    if (tag != "attr") continue;
    auto name = child.get_optional<std::string>("<xmlattr>.name");
    if (!name) schema("attr without name");
    std::optional<Attr> value;
    for (const auto& [vtag, v] : child) {
      if (vtag == "<xmlattr>") continue;
      if (vtag != "int" && vtag != "string") schema("attr " + *name + ": unsupported value <" + vtag + ">");
      value = Attr{vtag, v.data()};
    }
    if (!value) schema("attr " + *name + " has no value");
    attrs[*name] = *value;
  }
  return attrs;
}

inline std::optional<std::string> read_type(const pt::ptree& element) {
  auto type = element.get_child_optional("type");
  if (!type) return std::nullopt;
  auto href = type->get_optional<std::string>("<xmlattr>.xlink:href");
  if (!href || href->empty() || href->front() != '#') schema("type without #href");
  return href->substr(1);
}

inline RawGraph parse(std::string_view bytes) {
  pt::ptree tree;
  std::istringstream in{std::string(bytes)};
  try {
    pt::read_xml(in, tree);
  } catch (const pt::xml_parser_error& e) {
    throw Error(Errc::ParseError, e.message() + " at line " + std::to_string(e.line()));
  }
  if (tree.count("gxl") != 1) schema("expected one <gxl> root element");
  const pt::ptree& gxl = tree.get_child("gxl");
  if (gxl.count("graph") != 1) schema("expected exactly one <graph>");
  RawGraph raw;
  for (const auto& [tag, child] : gxl.get_child("graph")) {
    if (tag == "node") {
      auto id = child.get_optional<std::string>("<xmlattr>.id");
      if (!id) schema("node without id");
      auto type = read_type(child);
      if (!type) schema("node " + *id + " has no type");
      raw.nodes.push_back(RawNode{*id, *type, read_attrs(child)});
    } else if (tag == "edge") {
      auto from = child.get_optional<std::string>("<xmlattr>.from");
      auto to = child.get_optional<std::string>("<xmlattr>.to");
      if (!from || !to) schema("edge without from/to");
      raw.edges.push_back(RawEdge{*from, *to, read_type(child), read_attrs(child)});
    }
  }
  return raw;
}

template <typename Int>
Int parse_int(const std::string& owner, const std::string& name, const Attr& attr) {
  if (attr.type != "int") schema(owner + ": attr " + name + " must be <int>");
  const std::string& text = attr.text;
  Int value{};
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || end != text.data() + text.size() || text.empty()) {
    schema(owner + ": attr " + name + " is not a decimal integer: '" + text + "'");
  }
  return value;
}

inline const Attr& require_attr(const std::string& owner,
                                const std::map<std::string, Attr>& attrs,
                                const std::string& name) {
  auto it = attrs.find(name);
  if (it == attrs.end()) schema(owner + ": missing attr " + name);
  return it->second;
}

inline std::optional<BlockKind> block_kind_named(std::string_view type) {
  if (type == "StartBlock") return BlockKind::StartBlock;
  if (type == "EndBlock") return BlockKind::EndBlock;
  if (type == "Block") return BlockKind::Block;
  return std::nullopt;
}

inline std::optional<Op> op_named(std::string_view type) {
  for (Op op : {Op::Const, Op::Cmp, Op::Cond, Op::Phi, Op::Add, Op::Jmp, Op::Return}) {
    if (to_string(op) == type) return op;
  }
  return std::nullopt;
}

inline OpKind op_kind_of(const RawNode& node, Op op) {
  if (op == Op::Const) {
    return OpKind::constant(
        parse_int<std::int32_t>(node.id, "value", require_attr(node.id, node.attrs, "value")));
  }
  if (op == Op::Cmp) {
    const Attr& attr = require_attr(node.id, node.attrs, "relation");
    auto rel = parse_relation(attr.text);
    if (attr.type != "string" || !rel) schema(node.id + ": bad relation '" + attr.text + "'");
    return OpKind::compare(*rel);
  }
  return op;
}

struct EdgeAttrs {
  std::uint32_t position;
  std::optional<int> branch;
};

inline EdgeAttrs edge_attrs(const std::string& owner, const std::map<std::string, Attr>& attrs) {
  EdgeAttrs result{parse_int<std::uint32_t>(owner, "position",
                                            require_attr(owner, attrs, "position")),
                   std::nullopt};
  if (auto it = attrs.find("branch"); it != attrs.end()) {
    result.branch = parse_int<int>(owner, "branch", it->second);
  }
  return result;
}

// Graph-level errors from connect() mean the file describes an impossible
// graph, which is a schema problem from the loader's point of view.
template <typename F>
auto as_schema_error(const std::string& what, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    if (e.code() == Errc::IncompatibleEndpoints || e.code() == Errc::DuplicatePosition ||
        e.code() == Errc::UnknownBlock) {
      schema(what + ": " + e.what());
    }
    throw;
  }
}

inline std::string int_attr(std::string_view name, long long value) {
  return "      <attr name=\"" + std::string(name) + "\"><int>" + std::to_string(value) +
         "</int></attr>\n";
}

inline std::string string_attr(std::string_view name, std::string_view value) {
  return "      <attr name=\"" + std::string(name) + "\"><string>" + std::string(value) +
         "</string></attr>\n";
}

}  // namespace gxl_detail

/// FirmAttributed if any <edge> carries a <type>, Native otherwise.
inline DialectTag detect_dialect(std::string_view bytes) {
  auto raw = gxl_detail::parse(bytes);
  for (const auto& e : raw.edges) {
    if (e.type) return DialectTag::FirmAttributed;
  }
  return DialectTag::Native;
}

inline ProgramGraph load_native(std::string_view bytes) {
  using namespace gxl_detail;
  RawGraph raw = parse(bytes);
  std::map<std::string, const RawNode*> declared;
  for (const RawNode& n : raw.nodes) {
    if (!declared.emplace(n.id, &n).second) schema("duplicate node id " + n.id);
  }

  std::map<std::string, std::string> container;  // op -> block
  std::map<std::string, std::string> producer;   // edge node -> source
  std::map<std::string, std::string> consumer;   // edge node -> target
  for (const RawEdge& e : raw.edges) {
    if (!declared.contains(e.from)) throw Error(Errc::ReferenceError, "undeclared node " + e.from);
    if (!declared.contains(e.to)) throw Error(Errc::ReferenceError, "undeclared node " + e.to);
    auto label = e.attrs.find("label");
    if (label == e.attrs.end()) schema("edge " + e.from + "->" + e.to + " has no label");
    const std::string& name = label->second.text;
    std::map<std::string, std::string>* slot = nullptr;
    std::string key;
    if (name == "contains") {
      slot = &container, key = e.to;
    } else if (name == "out") {
      slot = &producer, key = e.to;
    } else if (name == "in") {
      slot = &consumer, key = e.from;
    } else {
      schema("unknown edge label '" + name + "'");
    }
    if (!slot->emplace(key, name == "in" ? e.to : e.from).second) {
      schema(key + " has more than one '" + name + "' edge");
    }
  }

  ProgramGraph g;
  std::map<std::string, NodeId> ids;
  std::vector<const RawNode*> ops;
  std::vector<const RawNode*> edge_nodes;
  for (const RawNode& n : raw.nodes) {
    if (auto kind = block_kind_named(n.type)) {
      ids[n.id] = g.add_block(*kind);
    } else if (op_named(n.type)) {
      ops.push_back(&n);
    } else if (n.type == "DataflowEdge" || n.type == "ControlflowEdge") {
      edge_nodes.push_back(&n);
    } else {
      schema(n.id + ": unknown type #" + n.type);
    }
  }
  for (const RawNode* n : ops) {
    OpKind kind = op_kind_of(*n, *op_named(n->type));
    auto it = container.find(n->id);
    if (it == container.end()) {
      ids[n->id] = g.add_detached_op(kind);
    } else {
      auto block = ids.find(it->second);
      if (block == ids.end() || !g.is_block(block->second)) {
        schema("contains edge from non-block " + it->second);
      }
      ids[n->id] = g.add_op(kind, block->second);
    }
  }
  for (const auto& [op, block] : container) {
    if (!ids.contains(op) || !g.is_op(ids.at(op))) schema("contains edge into non-operation " + op);
  }
  for (const RawNode* n : edge_nodes) {
    auto src = producer.find(n->id);
    auto dst = consumer.find(n->id);
    if (src == producer.end() || dst == consumer.end()) schema(n->id + ": edge node needs one out and one in");
    if (!ids.contains(src->second) || !ids.contains(dst->second)) {
      schema(n->id + ": edge node connected to another edge node");
    }
    EdgeAttrs attrs = edge_attrs(n->id, n->attrs);
    EdgeKind kind = n->type == "DataflowEdge" ? EdgeKind::Dataflow : EdgeKind::Controlflow;
    ids[n->id] = as_schema_error(n->id, [&] {
      return g.connect(ids.at(src->second), ids.at(dst->second), kind, attrs.position, attrs.branch);
    });
  }
  for (const auto& [edge, source] : producer) {
    if (!ids.contains(edge) || !g.is_edge(ids.at(edge))) schema("out edge into non-edge node " + edge);
  }
  for (const auto& [edge, target] : consumer) {
    if (!ids.contains(edge) || !g.is_edge(ids.at(edge))) schema("in edge from non-edge node " + edge);
  }
  return g;
}

/// Native GXL: nodes in ascending id order, then the containment edges,
/// then the out/in pair of each Edge node.
inline std::string save_native(const ProgramGraph& g) {
  using namespace gxl_detail;
  std::string out =
      "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      "<gxl xmlns:xlink=\"http://www.w3.org/1999/xlink\">\n"
      "  <graph id=\"program\" edgeids=\"false\" edgemode=\"directed\">\n";
  auto open = [&](NodeId id, std::string_view type) {
    out += "    <node id=\"" + to_string(id) + "\">\n      <type xlink:href=\"#" +
           std::string(type) + "\"/>\n";
  };
  std::map<NodeId, int> order;
  for (const auto& entry : g.ops()) order[entry.first] = 0;
  for (const auto& entry : g.blocks()) order[entry.first] = 1;
  for (const auto& entry : g.edges()) order[entry.first] = 2;
  for (const auto& [id, cls] : order) {
    if (cls == 0) {
      const OpKind& kind = g.op_kind(id);
      open(id, to_string(kind.op()));
      if (kind.op() == Op::Const) out += int_attr("value", kind.value());
      if (kind.op() == Op::Cmp) out += string_attr("relation", to_string(kind.relation()));
    } else if (cls == 1) {
      open(id, to_string(g.block_kind(id)));
    } else {
      const EdgeNode& e = g.edge(id);
      open(id, e.kind == EdgeKind::Dataflow ? "DataflowEdge" : "ControlflowEdge");
      out += int_attr("position", e.position);
      if (e.branch) out += int_attr("branch", *e.branch);
    }
    out += "    </node>\n";
  }
  auto edge = [&](NodeId from, NodeId to, std::string_view label) {
    out += "    <edge from=\"" + to_string(from) + "\" to=\"" + to_string(to) + "\">\n" +
           string_attr("label", label) + "    </edge>\n";
  };
  for (const auto& [op, block] : g.containment()) edge(block, op, "contains");
  for (const auto& [id, e] : g.edges()) {
    edge(e.source, id, "out");
    edge(id, e.target, "in");
  }
  out += "  </graph>\n</gxl>\n";
  return out;
}

/// Imports a FIRM-style graph whose edges are typed (#Dataflow or
/// #Controlflow) and carry a `position` (and, leaving a Cond, a `branch`)
/// attribute. Each such edge becomes one Edge node. Operations name their
/// block through a `block` string attribute.
inline ProgramGraph import_firm_gxl(std::string_view bytes) {
  using namespace gxl_detail;
  RawGraph raw = parse(bytes);
  ProgramGraph g;
  std::map<std::string, NodeId> ids;
  std::map<std::string, NodeId> blocks;
  std::vector<const RawNode*> ops;
  for (const RawNode& n : raw.nodes) {
    if (ids.contains(n.id)) schema("duplicate node id " + n.id);
    if (auto kind = block_kind_named(n.type)) {
      ids[n.id] = blocks[n.id] = g.add_block(*kind);
    } else if (op_named(n.type)) {
      ids[n.id] = NodeId{};  // placeholder until the op is created below
      ops.push_back(&n);
    } else {
      throw Error(Errc::UnsupportedNodeType, n.id + " has unsupported type #" + n.type);
    }
  }
  for (const RawNode* n : ops) {
    OpKind kind = op_kind_of(*n, *op_named(n->type));
    auto block = n->attrs.find("block");
    if (block == n->attrs.end()) {
      ids[n->id] = g.add_detached_op(kind);
      continue;
    }
    const std::string& ref = block->second.text;
    if (!ids.contains(ref)) throw Error(Errc::ReferenceError, n->id + ": undeclared block " + ref);
    if (!blocks.contains(ref)) schema(n->id + ": " + ref + " is not a block");
    ids[n->id] = g.add_op(kind, blocks.at(ref));
  }
  for (const RawEdge& e : raw.edges) {
    std::string owner = e.from + "->" + e.to;
    if (!ids.contains(e.from)) throw Error(Errc::ReferenceError, owner + ": undeclared " + e.from);
    if (!ids.contains(e.to)) throw Error(Errc::ReferenceError, owner + ": undeclared " + e.to);
    if (!e.type) schema(owner + ": untyped edge");
    EdgeKind kind;
    if (*e.type == "Dataflow") {
      kind = EdgeKind::Dataflow;
    } else if (*e.type == "Controlflow") {
      kind = EdgeKind::Controlflow;
    } else {
      schema(owner + ": unsupported edge type #" + *e.type);
    }
    EdgeAttrs attrs = edge_attrs(owner, e.attrs);
    as_schema_error(owner, [&] {
      return g.connect(ids.at(e.from), ids.at(e.to), kind, attrs.position, attrs.branch);
    });
  }
  return g;
}

/// Loads either dialect; `dialect` overrides auto-detection.
inline ProgramGraph load_gxl(std::string_view bytes, std::optional<DialectTag> dialect = std::nullopt) {
  DialectTag tag = dialect ? *dialect : detect_dialect(bytes);
  return tag == DialectTag::Native ? load_native(bytes) : import_firm_gxl(bytes);
}

}  // namespace firmfold
