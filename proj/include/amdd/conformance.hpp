#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "amdd/model.hpp"
#include "amdd/sim.hpp"
#include "amdd/types.hpp"

namespace amdd {

// Conformance of an observed message trace against the interaction protocol
// implied by an activity flow. An Action node stands for sending the message
// named by its label; the receiver is the partition of the nearest downstream
// Action in another lane.

enum class Multiplicity { Once, PerTaskedUV };

struct ExpectedEvent {
  std::string label;  // action label == concept name
  std::string senderRole;
  std::string receiverRole;
  Multiplicity multiplicity = Multiplicity::Once;
  std::string nodeId;
};

struct ExpectedProtocol {
  std::vector<ExpectedEvent> events;
  // (earlier label, later label): every occurrence of the first precedes the
  // occurrences of the second (index-wise when both are per-UV events).
  std::vector<std::pair<std::string, std::string>> orderEdges;
  std::vector<std::string> warnings;

  bool empty() const { return events.empty(); }
};

namespace conf_detail {

// First Action nodes reachable downstream of `from`, skipping control nodes.
inline std::vector<const ActivityNode*> next_actions(const ActivityFlow& flow,
                                                     const std::string& from) {
  std::vector<const ActivityNode*> out;
  std::set<std::string> seen;
  std::vector<std::string> queue;
  for (const auto& e : flow.edges)
    if (e.from == from) queue.push_back(e.to);
  while (!queue.empty()) {
    std::string cur = queue.back();
    queue.pop_back();
    if (!seen.insert(cur).second) continue;
    const ActivityNode* node = flow.find_node(cur);
    if (!node) continue;
    if (node->kind == ActivityNodeKind::Action) {
      out.push_back(node);
      continue;  // stop at the first action on this path
    }
    for (const auto& e : flow.edges)
      if (e.from == cur) queue.push_back(e.to);
  }
  return out;
}

inline bool reaches(const ActivityFlow& flow, const std::string& from,
                    const std::string& to) {
  std::set<std::string> seen;
  std::vector<std::string> queue;
  for (const auto& e : flow.edges)
    if (e.from == from) queue.push_back(e.to);
  while (!queue.empty()) {
    std::string cur = queue.back();
    queue.pop_back();
    if (cur == to) return true;
    if (!seen.insert(cur).second) continue;
    for (const auto& e : flow.edges)
      if (e.from == cur) queue.push_back(e.to);
  }
  return false;
}

// Nodes reachable from any Fork without passing through a Join.
inline std::set<std::string> fork_region(const ActivityFlow& flow) {
  std::set<std::string> region;
  for (const auto& n : flow.nodes) {
    if (n.kind != ActivityNodeKind::Fork) continue;
    std::vector<std::string> queue;
    for (const auto& e : flow.edges)
      if (e.from == n.id) queue.push_back(e.to);
    while (!queue.empty()) {
      std::string cur = queue.back();
      queue.pop_back();
      const ActivityNode* node = flow.find_node(cur);
      if (!node || node->kind == ActivityNodeKind::Join) continue;
      if (!region.insert(cur).second) continue;
      for (const auto& e : flow.edges)
        if (e.from == cur) queue.push_back(e.to);
    }
  }
  return region;
}

inline std::map<std::string, int> bfs_depths(const ActivityFlow& flow) {
  std::map<std::string, int> depth;
  const ActivityNode* init = nullptr;
  for (const auto& n : flow.nodes)
    if (n.kind == ActivityNodeKind::Initial) { init = &n; break; }
  if (!init) return depth;
  depth[init->id] = 0;
  std::vector<std::string> frontier{init->id};
  while (!frontier.empty()) {
    std::vector<std::string> next;
    for (const auto& cur : frontier)
      for (const auto& e : flow.edges)
        if (e.from == cur && !depth.count(e.to)) {
          depth[e.to] = depth[cur] + 1;
          next.push_back(e.to);
        }
    frontier = std::move(next);
  }
  return depth;
}

}  // namespace conf_detail

inline ExpectedProtocol derive_expected(const ActivityFlow& flow) {
  ExpectedProtocol protocol;
  std::set<std::string> region = conf_detail::fork_region(flow);
  for (const auto& n : flow.nodes) {
    if (n.kind != ActivityNodeKind::Action || n.partition.empty()) continue;
    std::set<std::string> receivers;
    for (const ActivityNode* next : conf_detail::next_actions(flow, n.id))
      if (!next->partition.empty() && next->partition != n.partition)
        receivers.insert(next->partition);
    for (const auto& r : receivers)
      protocol.events.push_back(
          {n.label, n.partition, r,
           region.count(n.id) ? Multiplicity::PerTaskedUV : Multiplicity::Once, n.id});
  }
  auto depth = conf_detail::bfs_depths(flow);
  std::stable_sort(protocol.events.begin(), protocol.events.end(),
                   [&](const ExpectedEvent& a, const ExpectedEvent& b) {
                     int da = depth.count(a.nodeId) ? depth[a.nodeId] : 1 << 20;
                     int db = depth.count(b.nodeId) ? depth[b.nodeId] : 1 << 20;
                     if (da != db) return da < db;
                     return a.nodeId < b.nodeId;
                   });
  for (const auto& a : protocol.events)
    for (const auto& b : protocol.events) {
      if (a.nodeId == b.nodeId) continue;
      if (conf_detail::reaches(flow, a.nodeId, b.nodeId) &&
          !conf_detail::reaches(flow, b.nodeId, a.nodeId))
        protocol.orderEdges.emplace_back(a.label, b.label);
    }
  if (protocol.events.empty())
    protocol.warnings.push_back("activity flow has no cross-partition message events");
  return protocol;
}

// ---------------------------------------------------------------------------
// Trace checking
// ---------------------------------------------------------------------------

enum class Verdict { Conformant, ConformantWithNovelEvents, Violating };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Conformant: return "Conformant";
    case Verdict::ConformantWithNovelEvents: return "ConformantWithNovelEvents";
    case Verdict::Violating: return "Violating";
  }
  return "?";
}

struct ConformanceReport {
  Verdict verdict = Verdict::Conformant;
  std::vector<std::string> matched;          // "label sender->receiver xN"
  std::vector<std::string> novel;            // per novel message
  std::set<std::string> novelConcepts;       // distinct concept names
  std::vector<std::string> missing;
  std::vector<std::string> orderViolations;  // order and multiplicity problems
  bool strict = false;
};

inline ConformanceReport check_trace(const MessageTrace& trace,
                                     const ExpectedProtocol& protocol,
                                     bool strict = false) {
  ConformanceReport report;
  report.strict = strict;

  auto role = [&](const std::string& instance) {
    auto it = trace.roles.find(instance);
    return it == trace.roles.end() ? instance : it->second;
  };
  auto describe = [](const ExpectedEvent& e) {
    return e.label + " " + e.senderRole + "->" + e.receiverRole;
  };

  std::vector<std::vector<long long>> matches(protocol.events.size());
  for (const auto& m : trace.messages) {
    std::string sr = role(m.sender), rr = role(m.receiver);
    bool matched = false;
    for (size_t i = 0; i < protocol.events.size(); ++i) {
      const ExpectedEvent& e = protocol.events[i];
      if (e.label == m.content.conceptName && e.senderRole == sr &&
          e.receiverRole == rr) {
        matches[i].push_back(m.logicalTime);
        matched = true;
        break;
      }
    }
    if (!matched) {
      report.novel.push_back("t=" + std::to_string(m.logicalTime) + " " +
                             m.content.conceptName + " " + sr + "->" + rr);
      report.novelConcepts.insert(m.content.conceptName);
    }
  }

  // Presence and multiplicity: singleton events occur once; per-UV events
  // share one occurrence count k >= 1.
  long long forkCount = -1;
  for (size_t i = 0; i < protocol.events.size(); ++i) {
    const ExpectedEvent& e = protocol.events[i];
    if (matches[i].empty()) {
      report.missing.push_back(describe(e));
      continue;
    }
    long long count = static_cast<long long>(matches[i].size());
    report.matched.push_back(describe(e) + " x" + std::to_string(count));
    if (e.multiplicity == Multiplicity::Once) {
      if (count != 1)
        report.orderViolations.push_back(describe(e) + " observed " +
                                         std::to_string(count) + " times, expected 1");
    } else if (forkCount < 0) {
      forkCount = count;
    } else if (count != forkCount) {
      report.orderViolations.push_back(
          describe(e) + " observed " + std::to_string(count) +
          " times, other per-UV events " + std::to_string(forkCount) + " times");
    }
    std::sort(matches[i].begin(), matches[i].end());
  }

  auto index_of = [&](const std::string& label) -> int {
    for (size_t i = 0; i < protocol.events.size(); ++i)
      if (protocol.events[i].label == label) return static_cast<int>(i);
    return -1;
  };

  for (const auto& [earlier, later] : protocol.orderEdges) {
    int a = index_of(earlier), b = index_of(later);
    if (a < 0 || b < 0 || matches[a].empty() || matches[b].empty()) continue;
    const ExpectedEvent& ea = protocol.events[a];
    const ExpectedEvent& eb = protocol.events[b];
    bool violated = false;
    if (ea.multiplicity == Multiplicity::PerTaskedUV &&
        eb.multiplicity == Multiplicity::PerTaskedUV) {
      // concurrent per-UV branches: compare occurrence-wise after sorting
      size_t n = std::min(matches[a].size(), matches[b].size());
      for (size_t i = 0; i < n; ++i)
        if (matches[a][i] > matches[b][i]) violated = true;
    } else {
      violated = matches[a].back() > matches[b].front();
    }
    if (violated)
      report.orderViolations.push_back(describe(ea) + " observed after " + describe(eb));
  }

  bool hardViolation = !report.missing.empty() || !report.orderViolations.empty();
  if (hardViolation || (strict && !report.novel.empty()))
    report.verdict = Verdict::Violating;
  else if (!report.novel.empty())
    report.verdict = Verdict::ConformantWithNovelEvents;
  else
    report.verdict = Verdict::Conformant;
  return report;
}

// ---------------------------------------------------------------------------
// Report output
// ---------------------------------------------------------------------------

inline nlohmann::ordered_json conformance_to_json(const ConformanceReport& r) {
  nlohmann::ordered_json j;
  j["verdict"] = to_string(r.verdict);
  j["strict"] = r.strict;
  j["matched"] = r.matched;
  j["novel"] = r.novel;
  j["novelConcepts"] = r.novelConcepts;
  j["missing"] = r.missing;
  j["orderViolations"] = r.orderViolations;
  return j;
}

inline std::string conformance_text(const ConformanceReport& r) {
  std::ostringstream out;
  out << "verdict: " << to_string(r.verdict) << (r.strict ? " (strict)" : "") << "\n";
  auto section = [&](const char* title, const std::vector<std::string>& items) {
    if (items.empty()) return;
    out << title << ":\n";
    for (const auto& i : items) out << "  - " << i << "\n";
  };
  section("matched events", r.matched);
  section("missing events", r.missing);
  section("novel messages", r.novel);
  section("order violations", r.orderViolations);
  return out.str();
}

}  // namespace amdd
