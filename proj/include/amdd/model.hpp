#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "amdd/types.hpp"

namespace amdd {

// ---------------------------------------------------------------------------
// Structural layer
// ---------------------------------------------------------------------------

struct Attribute {
  std::string name;
  SemanticType type = SemanticType::String;
  std::vector<std::string> enumValues;  // non-empty only for Enum

  friend bool operator==(const Attribute&, const Attribute&) = default;
};

struct Parameter {
  std::string name;
  SemanticType type = SemanticType::String;

  friend bool operator==(const Parameter&, const Parameter&) = default;
};

struct Method {
  std::string name;
  std::vector<Parameter> parameters;
  std::optional<SemanticType> returnType;  // nullopt = void

  friend bool operator==(const Method&, const Method&) = default;
};

struct AgentClass {
  std::string name;
  std::string displayLabel;  // original spelling before identifier normalization
  std::vector<Attribute> attributes;
  std::vector<Method> methods;
  bool isAbstract = false;

  const Attribute* find_attribute(const std::string& n) const {
    for (const auto& a : attributes)
      if (a.name == n) return &a;
    return nullptr;
  }
  const Method* find_method(const std::string& n) const {
    for (const auto& m : methods)
      if (m.name == n) return &m;
    return nullptr;
  }

  friend bool operator==(const AgentClass&, const AgentClass&) = default;
};

enum class RelationshipKind { Inheritance, Composition, Aggregation, Association };

inline const char* to_string(RelationshipKind k) {
  switch (k) {
    case RelationshipKind::Inheritance: return "Inheritance";
    case RelationshipKind::Composition: return "Composition";
    case RelationshipKind::Aggregation: return "Aggregation";
    case RelationshipKind::Association: return "Association";
  }
  return "?";
}

// Cardinality grammar: `n`, `a..b`, `*`, `a..*`.
struct Cardinality {
  int lower = 1;
  bool unbounded = false;  // upper ignored when set
  int upper = 1;

  static Cardinality many() { return {0, true, 0}; }
  static Cardinality exactly(int n) { return {n, false, n}; }
  static Cardinality range(int a, int b) { return {a, false, b}; }
  static Cardinality at_least(int a) { return {a, true, 0}; }

  std::string text() const {
    if (lower == 0 && unbounded) return "*";
    if (unbounded) return std::to_string(lower) + "..*";
    if (lower == upper) return std::to_string(lower);
    return std::to_string(lower) + ".." + std::to_string(upper);
  }

  static std::optional<Cardinality> parse(const std::string& s) {
    if (s == "*") return many();
    auto dots = s.find("..");
    auto all_digits = [](const std::string& t) {
      return !t.empty() && std::all_of(t.begin(), t.end(),
                                       [](char c) { return c >= '0' && c <= '9'; });
    };
    if (dots == std::string::npos) {
      if (!all_digits(s)) return std::nullopt;
      return exactly(std::stoi(s));
    }
    std::string lo = s.substr(0, dots), hi = s.substr(dots + 2);
    if (!all_digits(lo)) return std::nullopt;
    if (hi == "*") return at_least(std::stoi(lo));
    if (!all_digits(hi)) return std::nullopt;
    return range(std::stoi(lo), std::stoi(hi));
  }

  bool contains(int n) const {
    if (n < lower) return false;
    return unbounded || n <= upper;
  }

  friend bool operator==(const Cardinality&, const Cardinality&) = default;
};

struct Relationship {
  RelationshipKind kind = RelationshipKind::Association;
  std::string source;
  std::string target;
  std::optional<Cardinality> sourceCardinality;
  std::optional<Cardinality> targetCardinality;
  std::string label;  // association-end name, navigable from constraints

  friend bool operator==(const Relationship&, const Relationship&) = default;
};

// ---------------------------------------------------------------------------
// Behavioral layer
// ---------------------------------------------------------------------------

struct State {
  std::string name;
  std::optional<std::string> parent;  // composite owner; one level deep max

  friend bool operator==(const State&, const State&) = default;
};

struct Transition {
  std::string from;
  std::string to;
  std::string event;
  std::optional<std::string> guard;   // constraint-expression reference
  std::optional<std::string> action;

  friend bool operator==(const Transition&, const Transition&) = default;
};

struct StateMachine {
  std::string ownerClass;
  std::vector<State> states;
  std::string initial;
  // Composite name -> initial substate.
  std::map<std::string, std::string> compositeInitial;
  std::vector<Transition> transitions;

  const State* find_state(const std::string& n) const {
    for (const auto& s : states)
      if (s.name == n) return &s;
    return nullptr;
  }
  bool is_composite(const std::string& n) const {
    for (const auto& s : states)
      if (s.parent && *s.parent == n) return true;
    return false;
  }

  friend bool operator==(const StateMachine&, const StateMachine&) = default;
};

enum class ActivityNodeKind { Initial, Final, Action, Decision, Merge, Fork, Join };

inline const char* to_string(ActivityNodeKind k) {
  switch (k) {
    case ActivityNodeKind::Initial: return "Initial";
    case ActivityNodeKind::Final: return "Final";
    case ActivityNodeKind::Action: return "Action";
    case ActivityNodeKind::Decision: return "Decision";
    case ActivityNodeKind::Merge: return "Merge";
    case ActivityNodeKind::Fork: return "Fork";
    case ActivityNodeKind::Join: return "Join";
  }
  return "?";
}

struct ActivityNode {
  std::string id;
  ActivityNodeKind kind = ActivityNodeKind::Action;
  std::string label;
  std::string partition;  // agent class name; empty for control nodes

  friend bool operator==(const ActivityNode&, const ActivityNode&) = default;
};

struct ActivityEdge {
  std::string from;
  std::string to;
  std::optional<std::string> guard;

  friend bool operator==(const ActivityEdge&, const ActivityEdge&) = default;
};

struct ActivityFlow {
  std::string name;
  std::vector<std::string> partitions;
  std::vector<ActivityNode> nodes;
  std::vector<ActivityEdge> edges;

  const ActivityNode* find_node(const std::string& id) const {
    for (const auto& n : nodes)
      if (n.id == id) return &n;
    return nullptr;
  }

  friend bool operator==(const ActivityFlow&, const ActivityFlow&) = default;
};

// ---------------------------------------------------------------------------
// The whole model
// ---------------------------------------------------------------------------

struct SystemModel {
  std::string modelName;
  std::string version;
  std::vector<AgentClass> classes;
  std::vector<Relationship> relationships;
  std::vector<StateMachine> stateMachines;
  std::vector<ActivityFlow> activities;

  const AgentClass* find_class(const std::string& n) const {
    for (const auto& c : classes)
      if (c.name == n) return &c;
    return nullptr;
  }
  const StateMachine* machine_for(const std::string& cls) const {
    for (const auto& m : stateMachines)
      if (m.ownerClass == cls) return &m;
    return nullptr;
  }
};

// Structural equality: class/relationship ordering is irrelevant, state and
// transition ordering is preserved (transition priority matters downstream).
bool structurally_equal(const SystemModel& a, const SystemModel& b);

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

enum class Severity { Error, Warning };

struct ValidationIssue {
  Severity severity = Severity::Error;
  std::string location;  // e.g. "class UV", "stateMachine UV/transition 2"
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  bool ok() const {
    return std::none_of(issues.begin(), issues.end(), [](const ValidationIssue& i) {
      return i.severity == Severity::Error;
    });
  }
  bool empty() const { return issues.empty(); }
};

ValidationReport validate_model(const SystemModel& model);

// ---------------------------------------------------------------------------
// Implementation
// ---------------------------------------------------------------------------

namespace detail {

inline void issue(ValidationReport& r, const std::string& loc, const std::string& msg) {
  r.issues.push_back({Severity::Error, loc, msg});
}

}  // namespace detail

inline ValidationReport validate_model(const SystemModel& model) {
  ValidationReport report;

  std::set<std::string> classNames;
  for (const auto& c : model.classes) {
    std::string loc = "class " + c.name;
    if (!classNames.insert(c.name).second)
      detail::issue(report, loc, "duplicate class name");
    std::set<std::string> attrNames;
    for (const auto& a : c.attributes) {
      if (!attrNames.insert(a.name).second)
        detail::issue(report, loc, "duplicate attribute '" + a.name + "'");
      if (a.type == SemanticType::Enum && a.enumValues.empty())
        detail::issue(report, loc, "enum attribute '" + a.name + "' has no values");
    }
  }

  for (size_t i = 0; i < model.relationships.size(); ++i) {
    const auto& r = model.relationships[i];
    std::string loc = "relationship " + std::to_string(i) + " (" + r.source + "->" + r.target + ")";
    if (!model.find_class(r.source))
      detail::issue(report, loc, "unknown source class '" + r.source + "'");
    if (!model.find_class(r.target))
      detail::issue(report, loc, "unknown target class '" + r.target + "'");
    if (r.kind == RelationshipKind::Inheritance &&
        (r.sourceCardinality || r.targetCardinality))
      detail::issue(report, loc, "inheritance carries no cardinalities");
  }

  std::set<std::string> machineOwners;
  for (const auto& m : model.stateMachines) {
    std::string loc = "stateMachine " + m.ownerClass;
    if (!model.find_class(m.ownerClass))
      detail::issue(report, loc, "unknown owner class '" + m.ownerClass + "'");
    if (!machineOwners.insert(m.ownerClass).second)
      detail::issue(report, loc, "more than one state machine for class");

    std::set<std::string> stateNames;
    for (const auto& s : m.states) {
      if (!stateNames.insert(s.name).second)
        detail::issue(report, loc, "duplicate state '" + s.name + "'");
    }
    for (const auto& s : m.states) {
      if (!s.parent) continue;
      const State* p = m.find_state(*s.parent);
      if (!p) {
        detail::issue(report, loc, "state '" + s.name + "' has unknown parent '" + *s.parent + "'");
      } else if (p->parent) {
        detail::issue(report, loc,
                      "composite nesting beyond one level at '" + s.name + "'");
      }
    }
    if (m.initial.empty()) {
      detail::issue(report, loc, "missing initial state");
    } else if (!m.find_state(m.initial)) {
      detail::issue(report, loc, "initial state '" + m.initial + "' not declared");
    }
    // Exactly one initial per composite.
    for (const auto& s : m.states) {
      if (!m.is_composite(s.name)) continue;
      auto it = m.compositeInitial.find(s.name);
      if (it == m.compositeInitial.end()) {
        detail::issue(report, loc, "composite '" + s.name + "' has no initial substate");
        continue;
      }
      const State* sub = m.find_state(it->second);
      if (!sub || !sub->parent || *sub->parent != s.name)
        detail::issue(report, loc,
                      "composite '" + s.name + "' initial '" + it->second +
                          "' is not one of its substates");
    }
    for (size_t i = 0; i < m.transitions.size(); ++i) {
      const auto& t = m.transitions[i];
      std::string tloc = loc + "/transition " + std::to_string(i);
      if (!m.find_state(t.from))
        detail::issue(report, tloc, "unknown source state '" + t.from + "'");
      if (!m.find_state(t.to))
        detail::issue(report, tloc, "unknown target state '" + t.to + "'");
    }
  }

  for (const auto& flow : model.activities) {
    std::string loc = "activity " + flow.name;
    for (const auto& p : flow.partitions)
      if (!model.find_class(p))
        detail::issue(report, loc, "partition '" + p + "' names no declared class");

    std::set<std::string> ids;
    int initials = 0;
    for (const auto& n : flow.nodes) {
      if (!ids.insert(n.id).second)
        detail::issue(report, loc, "duplicate node id '" + n.id + "'");
      if (n.kind == ActivityNodeKind::Initial) ++initials;
      if (n.kind == ActivityNodeKind::Action && n.partition.empty())
        detail::issue(report, loc, "action '" + n.label + "' belongs to no partition");
    }
    if (initials != 1)
      detail::issue(report, loc, "expected exactly one Initial node, found " +
                                     std::to_string(initials));
    for (const auto& e : flow.edges) {
      if (!flow.find_node(e.from))
        detail::issue(report, loc, "edge from unknown node '" + e.from + "'");
      if (!flow.find_node(e.to))
        detail::issue(report, loc, "edge to unknown node '" + e.to + "'");
    }
    // Reachability from the Initial node.
    const ActivityNode* init = nullptr;
    for (const auto& n : flow.nodes)
      if (n.kind == ActivityNodeKind::Initial) { init = &n; break; }
    if (init && initials == 1) {
      std::set<std::string> seen{init->id};
      std::vector<std::string> queue{init->id};
      while (!queue.empty()) {
        std::string cur = queue.back();
        queue.pop_back();
        for (const auto& e : flow.edges)
          if (e.from == cur && seen.insert(e.to).second) queue.push_back(e.to);
      }
      for (const auto& n : flow.nodes)
        if (!seen.count(n.id))
          detail::issue(report, loc, "node '" + n.id + "' unreachable from Initial");

      // Every Fork must reach a Join on all outgoing paths.
      for (const auto& n : flow.nodes) {
        if (n.kind != ActivityNodeKind::Fork) continue;
        for (const auto& e : flow.edges) {
          if (e.from != n.id) continue;
          std::set<std::string> visited;
          std::vector<std::string> stack{e.to};
          bool joined = false;
          while (!stack.empty()) {
            std::string cur = stack.back();
            stack.pop_back();
            if (!visited.insert(cur).second) continue;
            const ActivityNode* node = flow.find_node(cur);
            if (!node) continue;
            if (node->kind == ActivityNodeKind::Join) { joined = true; break; }
            for (const auto& e2 : flow.edges)
              if (e2.from == cur) stack.push_back(e2.to);
          }
          if (!joined)
            detail::issue(report, loc, "fork '" + n.id + "' branch misses a Join");
        }
      }
    }
  }

  std::stable_sort(report.issues.begin(), report.issues.end(),
                   [](const ValidationIssue& a, const ValidationIssue& b) {
                     return a.location < b.location;
                   });
  return report;
}

inline bool structurally_equal(const SystemModel& a, const SystemModel& b) {
  if (a.modelName != b.modelName || a.version != b.version) return false;

  auto classes_sorted = [](const SystemModel& m) {
    auto v = m.classes;
    std::sort(v.begin(), v.end(),
              [](const AgentClass& x, const AgentClass& y) { return x.name < y.name; });
    return v;
  };
  if (classes_sorted(a) != classes_sorted(b)) return false;

  auto rel_key = [](const Relationship& r) {
    return std::tuple(static_cast<int>(r.kind), r.source, r.target, r.label,
                      r.sourceCardinality ? r.sourceCardinality->text() : "",
                      r.targetCardinality ? r.targetCardinality->text() : "");
  };
  auto rels_sorted = [&](const SystemModel& m) {
    auto v = m.relationships;
    std::sort(v.begin(), v.end(),
              [&](const Relationship& x, const Relationship& y) {
                return rel_key(x) < rel_key(y);
              });
    return v;
  };
  if (rels_sorted(a) != rels_sorted(b)) return false;

  auto machines_sorted = [](const SystemModel& m) {
    auto v = m.stateMachines;
    std::sort(v.begin(), v.end(), [](const StateMachine& x, const StateMachine& y) {
      return x.ownerClass < y.ownerClass;
    });
    return v;
  };
  if (machines_sorted(a) != machines_sorted(b)) return false;

  auto flows_sorted = [](const SystemModel& m) {
    auto v = m.activities;
    std::sort(v.begin(), v.end(), [](const ActivityFlow& x, const ActivityFlow& y) {
      return x.name < y.name;
    });
    return v;
  };
  return flows_sorted(a) == flows_sorted(b);
}

}  // namespace amdd
