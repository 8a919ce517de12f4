#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "firmfold/graph.hpp"

namespace firmfold {

/// 64-bit digest of a graph's canonical certificate.
struct Digest {
  std::uint64_t value = 0;

  friend constexpr auto operator<=>(Digest, Digest) = default;
};

inline std::string to_hex(Digest d) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(d.value));
  return buf;
}

namespace detail {

enum ArcLabel : int { kOut = 0, kIn = 1, kContains = 2 };

struct Arc {
  int label;
  int neighbor;

  friend auto operator<=>(const Arc&, const Arc&) = default;
};

/// The graph as plain labelled digraph over dense indices: every op, block
/// and Edge node becomes a vertex; "out", "in" and "contains" become arcs.
struct Flat {
  std::vector<NodeId> ids;
  std::vector<std::string> labels;
  std::vector<std::vector<Arc>> succ;
  std::vector<std::vector<Arc>> pred;
};

inline std::string node_label(const ProgramGraph& g, NodeId id) {
  if (g.is_op(id)) return "op:" + to_string(g.op_kind(id));
  if (g.is_block(id)) return "block:" + std::string(to_string(g.block_kind(id)));
  const EdgeNode& e = g.edge(id);
  std::string label = "edge:" + std::string(to_string(e.kind)) + "@" + std::to_string(e.position);
  if (e.branch) label += "/b" + std::to_string(*e.branch);
  return label;
}

inline Flat flatten(const ProgramGraph& g) {
  Flat flat;
  std::map<NodeId, int> index;
  auto add = [&](NodeId id) {
    index.emplace(id, static_cast<int>(flat.ids.size()));
    flat.ids.push_back(id);
    flat.labels.push_back(node_label(g, id));
  };
  for (const auto& [id, kind] : g.ops()) add(id);
  for (const auto& [id, kind] : g.blocks()) add(id);
  for (const auto& [id, e] : g.edges()) add(id);
  flat.succ.resize(flat.ids.size());
  flat.pred.resize(flat.ids.size());
  auto arc = [&](NodeId from, int label, NodeId to) {
    int a = index.at(from);
    int b = index.at(to);
    flat.succ[a].push_back(Arc{label, b});
    flat.pred[b].push_back(Arc{label, a});
  };
  for (const auto& [id, e] : g.edges()) {
    arc(e.source, kOut, id);
    arc(id, kIn, e.target);
  }
  for (const auto& [op, block] : g.containment()) arc(block, kContains, op);
  return flat;
}

// Colors are ranks, so the coloring stays canonical: ranks depend only on
// labels and structure, never on NodeId values.
inline std::vector<int> rank_labels(const Flat& g) {
  std::vector<std::string> sorted = g.labels;
  std::ranges::sort(sorted);
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::vector<int> colors(g.labels.size());
  for (std::size_t i = 0; i < colors.size(); ++i) {
    colors[i] = static_cast<int>(std::ranges::lower_bound(sorted, g.labels[i]) - sorted.begin());
  }
  return colors;
}

inline int count_colors(const std::vector<int>& colors) {
  return static_cast<int>(std::set<int>(colors.begin(), colors.end()).size());
}

/// Color refinement until the partition is stable. The old color leads each
/// signature, so refinement only ever splits cells and keeps their order.
inline std::vector<int> refine(const Flat& g, std::vector<int> colors) {
  using Signature = std::pair<int, std::vector<std::tuple<int, int, int>>>;
  int classes = count_colors(colors);
  while (true) {
    std::vector<Signature> sigs(colors.size());
    for (std::size_t v = 0; v < colors.size(); ++v) {
      sigs[v].first = colors[v];
      for (const Arc& a : g.succ[v]) sigs[v].second.emplace_back(0, a.label, colors[a.neighbor]);
      for (const Arc& a : g.pred[v]) sigs[v].second.emplace_back(1, a.label, colors[a.neighbor]);
      std::ranges::sort(sigs[v].second);
    }
    std::vector<Signature> sorted = sigs;
    std::ranges::sort(sorted);
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    for (std::size_t v = 0; v < colors.size(); ++v) {
      colors[v] = static_cast<int>(std::ranges::lower_bound(sorted, sigs[v]) - sorted.begin());
    }
    int next = static_cast<int>(sorted.size());
    if (next == classes) return colors;
    classes = next;
  }
}

inline std::string certificate(const Flat& g, const std::vector<int>& colors) {
  std::vector<int> order(colors.size());
  for (std::size_t v = 0; v < colors.size(); ++v) order[colors[v]] = static_cast<int>(v);
  std::string cert;
  for (int v : order) {
    cert += g.labels[v];
    cert += '\n';
  }
  std::vector<std::tuple<int, int, int>> arcs;
  for (std::size_t v = 0; v < colors.size(); ++v) {
    for (const Arc& a : g.succ[v]) arcs.emplace_back(colors[v], a.label, colors[a.neighbor]);
  }
  std::ranges::sort(arcs);
  for (const auto& [from, label, to] : arcs) {
    cert += std::to_string(from) + ' ' + std::to_string(label) + ' ' + std::to_string(to) + ';';
  }
  return cert;
}

// Vertices with the same label and identical arcs can be swapped by an
// automorphism, so only one of them needs to be individualized.
inline std::vector<int> prune_twins(const Flat& g, const std::vector<int>& cell) {
  std::set<std::pair<std::vector<Arc>, std::vector<Arc>>> seen;
  std::vector<int> result;
  for (int v : cell) {
    auto succ = g.succ[v];
    auto pred = g.pred[v];
    std::ranges::sort(succ);
    std::ranges::sort(pred);
    if (seen.emplace(std::move(succ), std::move(pred)).second) result.push_back(v);
  }
  return result;
}

/// Individualization-refinement search for the smallest certificate.
inline void search_canonical(const Flat& g, std::vector<int> colors,
                             std::optional<std::string>& best) {
  colors = refine(g, std::move(colors));
  std::map<int, std::vector<int>> cells;
  for (std::size_t v = 0; v < colors.size(); ++v) cells[colors[v]].push_back(static_cast<int>(v));
  const std::vector<int>* target = nullptr;
  for (const auto& [color, members] : cells) {
    if (members.size() > 1) {
      target = &members;
      break;
    }
  }
  if (target == nullptr) {
    std::string cert = certificate(g, colors);
    if (!best || cert < *best) best = std::move(cert);
    return;
  }
  for (int v : prune_twins(g, *target)) {
    std::vector<int> next(colors.size());
    for (std::size_t u = 0; u < colors.size(); ++u) next[u] = 2 * colors[u] + 1;
    next[v] = 2 * colors[v];
    search_canonical(g, std::move(next), best);
  }
}

inline std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

}  // namespace detail

/// Canonical certificate of a graph: equal for exactly the isomorphic graphs.
inline std::string canonical_form(const ProgramGraph& g) {
  detail::Flat flat = detail::flatten(g);
  if (flat.ids.empty()) return {};
  std::optional<std::string> best;
  detail::search_canonical(flat, detail::rank_labels(flat), best);
  return *best;
}

inline Digest canonical_hash(const ProgramGraph& g) {
  return Digest{detail::fnv1a(canonical_form(g))};
}

namespace detail {

// Backtracking matcher: maps vertices of `a` onto `b` one at a time, in an
// order where each vertex tends to touch an already mapped one.
class IsoMatcher {
 public:
  IsoMatcher(const Flat& a, const Flat& b) : a_(a), b_(b) {}

  bool run() {
    const std::size_t n = a_.ids.size();
    if (n != b_.ids.size()) return false;
    key_a_ = keys(a_);
    key_b_ = keys(b_);
    auto ka = key_a_;
    auto kb = key_b_;
    std::ranges::sort(ka);
    std::ranges::sort(kb);
    if (ka != kb) return false;
    for (std::size_t v = 0; v < n; ++v) {
      for (const Arc& arc : b_.succ[v]) arcs_b_.emplace(static_cast<int>(v), arc.label, arc.neighbor);
    }
    order_ = visit_order();
    map_.assign(n, -1);
    used_.assign(n, false);
    return extend(0);
  }

 private:
  static std::vector<std::string> keys(const Flat& g) {
    std::vector<std::string> result(g.ids.size());
    for (std::size_t v = 0; v < g.ids.size(); ++v) {
      std::vector<std::string> parts;
      for (const Arc& a : g.succ[v]) parts.push_back("s" + std::to_string(a.label) + g.labels[a.neighbor]);
      for (const Arc& a : g.pred[v]) parts.push_back("p" + std::to_string(a.label) + g.labels[a.neighbor]);
      std::ranges::sort(parts);
      result[v] = g.labels[v];
      for (const auto& p : parts) result[v] += "|" + p;
    }
    return result;
  }

  std::vector<int> visit_order() const {
    const std::size_t n = a_.ids.size();
    std::vector<bool> seen(n, false);
    std::vector<int> order;
    for (std::size_t root = 0; root < n; ++root) {
      if (seen[root]) continue;
      std::vector<int> queue{static_cast<int>(root)};
      seen[root] = true;
      for (std::size_t head = 0; head < queue.size(); ++head) {
        int v = queue[head];
        order.push_back(v);
        auto visit = [&](const Arc& arc) {
          if (!seen[arc.neighbor]) {
            seen[arc.neighbor] = true;
            queue.push_back(arc.neighbor);
          }
        };
        std::ranges::for_each(a_.succ[v], visit);
        std::ranges::for_each(a_.pred[v], visit);
      }
    }
    return order;
  }

  bool consistent(int u, int v) const {
    std::size_t mapped_a = 0;
    for (const Arc& arc : a_.succ[u]) {
      int w = map_[arc.neighbor];
      if (arc.neighbor == u) w = v;
      if (w < 0) continue;
      ++mapped_a;
      if (!arcs_b_.contains({v, arc.label, w})) return false;
    }
    for (const Arc& arc : a_.pred[u]) {
      int w = map_[arc.neighbor];
      if (w < 0) continue;
      ++mapped_a;
      if (!arcs_b_.contains({w, arc.label, v})) return false;
    }
    std::size_t mapped_b = 0;
    for (const Arc& arc : b_.succ[v]) {
      if (used_[arc.neighbor] || arc.neighbor == v) ++mapped_b;
    }
    for (const Arc& arc : b_.pred[v]) {
      if (used_[arc.neighbor]) ++mapped_b;
    }
    return mapped_a == mapped_b;
  }

  bool extend(std::size_t depth) {
    if (depth == order_.size()) return true;
    int u = order_[depth];
    for (std::size_t v = 0; v < b_.ids.size(); ++v) {
      if (used_[v] || key_b_[v] != key_a_[u]) continue;
      if (!consistent(u, static_cast<int>(v))) continue;
      map_[u] = static_cast<int>(v);
      used_[v] = true;
      if (extend(depth + 1)) return true;
      map_[u] = -1;
      used_[v] = false;
    }
    return false;
  }

  const Flat& a_;
  const Flat& b_;
  std::vector<std::string> key_a_;
  std::vector<std::string> key_b_;
  std::set<std::tuple<int, int, int>> arcs_b_;
  std::vector<int> order_;
  std::vector<int> map_;
  std::vector<bool> used_;
};

}  // namespace detail

/// Exact isomorphism test by backtracking search; does not use the
/// canonical hash.
inline bool is_isomorphic(const ProgramGraph& lhs, const ProgramGraph& rhs) {
  if (lhs.element_count() != rhs.element_count()) return false;
  detail::Flat a = detail::flatten(lhs);
  detail::Flat b = detail::flatten(rhs);
  return detail::IsoMatcher(a, b).run();
}

}  // namespace firmfold
