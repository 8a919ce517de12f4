#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <deque>
#include <functional>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "firmfold/graph.hpp"
#include "firmfold/isomorphism.hpp"

namespace firmfold {

/// One embedding of a rule's pattern: the anchors bind the pattern nodes in
/// the order the rule documents.
struct Match {
  std::string rule_name;
  std::vector<NodeId> anchors;

  friend auto operator<=>(const Match&, const Match&) = default;
};

/// A rewrite rule. The matcher enumerates every embedding that satisfies the
/// readers and erasers and violates no embargo; the applier deletes the
/// erasers, adds the creators and returns a new graph.
struct Rule {
  std::string name;
  int priority = 0;
  std::function<std::vector<Match>(const ProgramGraph&)> matcher;
  std::function<ProgramGraph(const ProgramGraph&, const Match&)> applier;
};

struct TraceStep {
  std::string rule;
  std::vector<NodeId> anchors;

  friend bool operator==(const TraceStep&, const TraceStep&) = default;
};

struct FoldResult {
  ProgramGraph graph;
  std::vector<TraceStep> trace;
  std::size_t steps = 0;
};

/// `step <k>: <rule-name> @ [n4, n9]`, numbered from 1.
inline std::string format_trace(const std::vector<TraceStep>& trace) {
  std::string text;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    text += "step " + std::to_string(i + 1) + ": " + trace[i].rule + " @ " +
            format_ids(trace[i].anchors) + "\n";
  }
  return text;
}

/// All matches of `rule` in `g`, sorted by anchors.
inline std::vector<Match> matches(const ProgramGraph& g, const Rule& rule) {
  std::vector<Match> found = rule.matcher(g);
  for (Match& m : found) m.rule_name = rule.name;
  std::ranges::sort(found);
  found.erase(std::unique(found.begin(), found.end()), found.end());
  return found;
}

inline ProgramGraph apply(const ProgramGraph& g, const Rule& rule, const Match& match) {
  auto current = matches(g, rule);
  if (match.rule_name != rule.name || !std::ranges::binary_search(current, match)) {
    throw Error(Errc::StaleMatch, rule.name + " @ " + format_ids(match.anchors));
  }
  return rule.applier(g, match);
}

/// Renumbers the inputs of an operation (dataflow) or of a block
/// (controlflow) to 0..n-1, keeping their order. For a block the same
/// renumbering is applied to the inputs of every Phi it contains; Phi inputs
/// with no matching predecessor are moved behind the renumbered ones.
inline ProgramGraph normalize_positions(const ProgramGraph& g, NodeId node_or_block) {
  if (!g.contains(node_or_block) || g.is_edge(node_or_block)) {
    throw Error(Errc::UnknownNode, to_string(node_or_block));
  }
  ProgramGraph out = g;
  if (g.is_op(node_or_block)) {
    std::uint32_t next = 0;
    for (const Port& p : g.data_inputs(node_or_block)) out.set_position(p.edge, next++);
    return out;
  }
  std::map<std::uint32_t, std::uint32_t> remap;
  for (const Port& p : g.control_preds(node_or_block)) {
    auto next = static_cast<std::uint32_t>(remap.size());
    remap.emplace(p.position, next);
    out.set_position(p.edge, next);
  }
  for (NodeId member : g.members(node_or_block)) {
    if (g.op_kind(member).op() != Op::Phi) continue;
    auto spill = static_cast<std::uint32_t>(remap.size());
    for (const Port& p : g.data_inputs(member)) {
      auto it = remap.find(p.position);
      out.set_position(p.edge, it != remap.end() ? it->second : spill++);
    }
  }
  return out;
}

namespace detail {

inline std::set<std::uint32_t> position_set(const std::vector<Port>& ports) {
  std::set<std::uint32_t> result;
  for (const Port& p : ports) result.insert(p.position);
  return result;
}

// A block is renumbered only once every Phi in it has dropped the inputs
// whose predecessor is gone; earlier renumbering would collide them.
inline bool phis_settled(const ProgramGraph& g, NodeId block) {
  auto control = position_set(g.control_preds(block));
  for (NodeId member : g.members(block)) {
    if (g.op_kind(member).op() != Op::Phi) continue;
    for (std::uint32_t p : position_set(g.data_inputs(member))) {
      if (!control.contains(p)) return false;
    }
  }
  return true;
}

}  // namespace detail

/// Applies a match and then renumbers the inputs of every surviving node or
/// block that lost an input. This is the transition used by both the fold
/// driver and the explorer.
inline ProgramGraph rewrite_step(const ProgramGraph& g, const Rule& rule, const Match& match) {
  ProgramGraph next = apply(g, rule, match);
  std::set<NodeId> shrunk;
  for (const auto& [id, e] : g.edges()) {
    if (!next.is_edge(id) && next.contains(e.target)) shrunk.insert(e.target);
  }
  std::set<NodeId> blocks;
  for (NodeId id : shrunk) {
    if (next.is_block(id)) {
      blocks.insert(id);
    } else if (next.op_kind(id).op() == Op::Phi) {
      if (auto b = next.block_of(id)) blocks.insert(*b);
    } else {
      next = normalize_positions(next, id);
    }
  }
  for (NodeId b : blocks) {
    if (detail::phis_settled(next, b)) next = normalize_positions(next, b);
  }
  return next;
}

inline std::vector<Rule> by_priority(std::span<const Rule> rules) {
  std::vector<Rule> sorted(rules.begin(), rules.end());
  std::ranges::stable_sort(sorted, {}, &Rule::priority);
  return sorted;
}

/// Deterministic rewriting to a fixpoint: the enabled rule with the lowest
/// priority fires on its smallest match, until nothing matches.
inline FoldResult fold(const ProgramGraph& g, std::span<const Rule> rules, std::size_t max_steps) {
  if (max_steps == 0) throw Error(Errc::StepLimitExceeded, "max_steps must be positive");
  std::vector<Rule> ordered = by_priority(rules);
  FoldResult result{g, {}, 0};
  while (true) {
    const Rule* chosen = nullptr;
    std::vector<Match> found;
    for (const Rule& rule : ordered) {
      found = matches(result.graph, rule);
      if (!found.empty()) {
        chosen = &rule;
        break;
      }
    }
    if (chosen == nullptr) return result;
    if (result.steps == max_steps) {
      throw Error(Errc::StepLimitExceeded,
                  std::to_string(max_steps) + " steps taken and " + chosen->name + " still enabled");
    }
    result.graph = rewrite_step(result.graph, *chosen, found.front());
    result.trace.push_back(TraceStep{chosen->name, found.front().anchors});
    ++result.steps;
  }
}

/// Re-executes a trace from `start`; throws StaleMatch if a step no longer
/// applies.
inline ProgramGraph replay(const ProgramGraph& start, std::span<const Rule> rules,
                           const std::vector<TraceStep>& trace) {
  ProgramGraph g = start;
  for (const TraceStep& step : trace) {
    auto rule = std::ranges::find(rules, step.rule, &Rule::name);
    if (rule == rules.end()) throw Error(Errc::StaleMatch, "unknown rule " + step.rule);
    g = rewrite_step(g, *rule, Match{step.rule, step.anchors});
  }
  return g;
}

using StateId = std::size_t;

struct Transition {
  StateId source = 0;
  std::string rule;
  StateId target = 0;

  friend auto operator<=>(const Transition&, const Transition&) = default;
};

/// Labelled transition system over graphs up to isomorphism.
struct Lts {
  std::vector<ProgramGraph> states;
  std::vector<Digest> digests;
  std::vector<Transition> transitions;
  StateId initial = 0;
  std::vector<StateId> finals;

  /// True when every final state is isomorphic to the first one.
  bool finals_isomorphic() const {
    for (StateId s : finals) {
      if (!is_isomorphic(states[finals.front()], states[s])) return false;
    }
    return true;
  }

  /// State isomorphic to `g`, if present.
  std::optional<StateId> find(const ProgramGraph& g) const {
    Digest d = canonical_hash(g);
    for (StateId s = 0; s < states.size(); ++s) {
      if (digests[s] == d && is_isomorphic(states[s], g)) return s;
    }
    return std::nullopt;
  }

  bool has_transition(StateId from, const std::string& rule, StateId to) const {
    return std::ranges::binary_search(transitions, Transition{from, rule, to});
  }
};

/// Breadth-first closure under every enabled (rule, match). States are
/// deduplicated by canonical hash, confirmed by an exact isomorphism test.
inline Lts explore(const ProgramGraph& g, std::span<const Rule> rules, std::size_t max_states) {
  if (max_states == 0) throw Error(Errc::StateLimitExceeded, "max_states must be positive");
  std::vector<Rule> ordered = by_priority(rules);
  Lts lts;
  std::multimap<Digest, StateId> index;
  auto intern = [&](ProgramGraph state) -> StateId {
    Digest d = canonical_hash(state);
    auto [lo, hi] = index.equal_range(d);
    for (auto it = lo; it != hi; ++it) {
      if (is_isomorphic(lts.states[it->second], state)) return it->second;
    }
    if (lts.states.size() == max_states) {
      throw Error(Errc::StateLimitExceeded, "more than " + std::to_string(max_states) + " states");
    }
    StateId id = lts.states.size();
    lts.states.push_back(std::move(state));
    lts.digests.push_back(d);
    index.emplace(d, id);
    return id;
  };
  lts.initial = intern(g);
  std::set<Transition> transitions;
  for (StateId s = 0; s < lts.states.size(); ++s) {
    bool enabled = false;
    for (const Rule& rule : ordered) {
      for (const Match& m : matches(lts.states[s], rule)) {
        enabled = true;
        ProgramGraph next = rewrite_step(lts.states[s], rule, m);
        StateId t = intern(std::move(next));
        transitions.insert(Transition{s, rule.name, t});
      }
    }
    if (!enabled) lts.finals.push_back(s);
  }
  lts.transitions.assign(transitions.begin(), transitions.end());
  return lts;
}

}  // namespace firmfold
