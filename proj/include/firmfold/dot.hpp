#pragma once

#include <map>
#include <string>
#include <vector>

#include "firmfold/graph.hpp"

namespace firmfold {

/// Graphviz rendering: one cluster per block holding its members, Edge
/// nodes drawn as arrows labelled `kind@position`.
inline std::string export_dot(const ProgramGraph& g) {
  std::map<NodeId, std::vector<NodeId>> by_block;
  for (const auto& [op, block] : g.containment()) by_block[block].push_back(op);
  auto op_line = [&](NodeId op, const char* indent) {
    return std::string(indent) + to_string(op) + " [label=\"" + to_string(g.op_kind(op)) + "\"];\n";
  };

  std::string out = "digraph {\n";
  for (const auto& [block, kind] : g.blocks()) {
    out += "  subgraph cluster_" + to_string(block) + " {\n";
    out += "    label=\"" + std::string(to_string(kind)) + " " + to_string(block) + "\";\n";
    out += "    " + to_string(block) + " [shape=box, label=\"" + std::string(to_string(kind)) + "\"];\n";
    for (NodeId op : by_block[block]) out += op_line(op, "    ");
    out += "  }\n";
  }
  for (const auto& [op, kind] : g.ops()) {
    if (!g.containment().contains(op)) out += op_line(op, "  ");
  }
  for (const auto& [id, e] : g.edges()) {
    std::string label = std::string(to_string(e.kind)) + "@" + std::to_string(e.position);
    if (e.branch) label += *e.branch ? " true" : " false";
    out += "  " + to_string(e.source) + " -> " + to_string(e.target) + " [label=\"" + label + "\"];\n";
  }
  out += "}\n";
  return out;
}

}  // namespace firmfold
