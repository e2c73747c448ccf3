#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "amdd/model.hpp"
#include "amdd/types.hpp"

namespace amdd {

// FIPA-style communication metamodel: concept, predicate and action schemas.

struct ConceptSlot {
  std::string name;
  SemanticType type = SemanticType::String;
  bool mandatory = false;

  friend bool operator==(const ConceptSlot&, const ConceptSlot&) = default;
};

struct ConceptSchema {
  std::string name;
  std::vector<ConceptSlot> slots;

  const ConceptSlot* find_slot(const std::string& n) const {
    for (const auto& s : slots)
      if (s.name == n) return &s;
    return nullptr;
  }

  friend bool operator==(const ConceptSchema&, const ConceptSchema&) = default;
};

enum class PredicateKind { Inheritance, Composition, Aggregation, Collaboration };

inline const char* to_string(PredicateKind k) {
  switch (k) {
    case PredicateKind::Inheritance: return "Inheritance";
    case PredicateKind::Composition: return "Composition";
    case PredicateKind::Aggregation: return "Aggregation";
    case PredicateKind::Collaboration: return "Collaboration";
  }
  return "?";
}

inline std::optional<PredicateKind> predicate_kind_from(const std::string& s) {
  if (s == "Inheritance") return PredicateKind::Inheritance;
  if (s == "Composition") return PredicateKind::Composition;
  if (s == "Aggregation") return PredicateKind::Aggregation;
  if (s == "Collaboration") return PredicateKind::Collaboration;
  return std::nullopt;
}

struct PredicateSchema {
  std::string name;
  PredicateKind kind = PredicateKind::Collaboration;
  std::pair<std::string, std::string> roles;

  friend bool operator==(const PredicateSchema&, const PredicateSchema&) = default;
};

enum class ActionDirection { Send, Receive };

struct ActionSchema {
  std::string name;
  std::string actor;
  ActionDirection direction = ActionDirection::Send;
  std::string payload;  // concept name
  std::string counterparty;

  friend bool operator==(const ActionSchema&, const ActionSchema&) = default;
};

struct OntologyRegistry {
  std::vector<ConceptSchema> concepts;
  std::vector<PredicateSchema> predicates;
  std::vector<ActionSchema> actions;

  const ConceptSchema* find_concept(const std::string& n) const {
    for (const auto& c : concepts)
      if (c.name == n) return &c;
    return nullptr;
  }
  bool empty() const { return concepts.empty() && predicates.empty() && actions.empty(); }
};

struct ContentInstance {
  std::string conceptName;
  std::map<std::string, Value> slots;
};

// ---------------------------------------------------------------------------
// Parsing `.onto` files
// ---------------------------------------------------------------------------

// Grammar:
//   concept Name { slot : type [mandatory] }
//   predicate Name : Kind(Source, Target)
//   action Actor send Concept to Counterparty
//   action Actor receive Concept from Counterparty
inline OntologyRegistry parse_ontology(const std::string& text) {
  OntologyRegistry reg;
  std::istringstream in(text);
  std::string raw;
  int number = 0;
  ConceptSchema* open = nullptr;

  auto trim = [](std::string s) {
    size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };

  while (std::getline(in, raw)) {
    ++number;
    std::string t = raw;
    size_t comment = t.find('#');
    if (comment != std::string::npos) t = t.substr(0, comment);
    t = trim(t);
    if (t.empty()) continue;

    if (open) {
      if (t == "}") { open = nullptr; continue; }
      auto colon = t.find(':');
      if (colon == std::string::npos)
        throw ParseError("slot needs 'name : type'", number, 1);
      ConceptSlot slot;
      slot.name = trim(t.substr(0, colon));
      std::string rest = trim(t.substr(colon + 1));
      std::string typeWord = rest;
      auto space = rest.find(' ');
      if (space != std::string::npos) {
        typeWord = rest.substr(0, space);
        std::string flag = trim(rest.substr(space + 1));
        if (flag == "mandatory")
          slot.mandatory = true;
        else
          throw ParseError("unexpected slot qualifier '" + flag + "'", number, 1);
      }
      auto tag = semantic_type_from(typeWord);
      if (!tag)
        throw ParseError("unknown slot type '" + typeWord + "' (nested concepts are not supported)",
                         number, 1);
      slot.type = *tag;
      if (open->find_slot(slot.name))
        throw ParseError("duplicate slot '" + slot.name + "'", number, 1);
      open->slots.push_back(slot);
      continue;
    }

    std::istringstream ls(t);
    std::string kw;
    ls >> kw;
    if (kw == "concept") {
      std::string name, brace;
      ls >> name >> brace;
      name = normalize_identifier(name);
      if (name.empty()) throw ParseError("concept needs a name", number, 1);
      if (reg.find_concept(name))
        throw ParseError("duplicate concept '" + name + "'", number, 1);
      reg.concepts.push_back({name, {}});
      if (brace == "{") open = &reg.concepts.back();
      else if (!brace.empty())
        throw ParseError("expected '{' after concept name", number, 1);
      continue;
    }
    if (kw == "predicate") {
      // predicate Name : Kind(Source, Target)
      std::string name, colon, rest;
      ls >> name >> colon;
      std::getline(ls, rest);
      rest = trim(rest);
      if (colon != ":")
        throw ParseError("predicate needs 'Name : Kind(Source, Target)'", number, 1);
      auto o = rest.find('(');
      auto c = rest.find(')');
      if (o == std::string::npos || c == std::string::npos || c < o)
        throw ParseError("predicate needs 'Kind(Source, Target)'", number, 1);
      auto kind = predicate_kind_from(trim(rest.substr(0, o)));
      if (!kind)
        throw ParseError("unknown predicate kind '" + trim(rest.substr(0, o)) + "'",
                         number, 1);
      std::string args = rest.substr(o + 1, c - o - 1);
      auto commaPos = args.find(',');
      if (commaPos == std::string::npos)
        throw ParseError("predicate needs two roles", number, 1);
      PredicateSchema p;
      p.name = normalize_identifier(name);
      p.kind = *kind;
      p.roles = {normalize_identifier(trim(args.substr(0, commaPos))),
                 normalize_identifier(trim(args.substr(commaPos + 1)))};
      for (const auto& existing : reg.predicates)
        if (existing.name == p.name)
          throw ParseError("duplicate predicate '" + p.name + "'", number, 1);
      reg.predicates.push_back(p);
      continue;
    }
    if (kw == "action") {
      // action Actor send Concept to Counterparty
      std::string actor, dir, payload, prep, counterparty;
      ls >> actor >> dir >> payload >> prep >> counterparty;
      ActionSchema a;
      a.actor = normalize_identifier(actor);
      a.payload = normalize_identifier(payload);
      a.counterparty = normalize_identifier(counterparty);
      if (dir == "send") {
        a.direction = ActionDirection::Send;
        if (prep != "to") throw ParseError("send action needs 'to'", number, 1);
      } else if (dir == "receive") {
        a.direction = ActionDirection::Receive;
        if (prep != "from") throw ParseError("receive action needs 'from'", number, 1);
      } else {
        throw ParseError("action direction must be 'send' or 'receive'", number, 1);
      }
      a.name = a.actor + (dir == "send" ? "Sends" : "Receives") + a.payload;
      for (const auto& existing : reg.actions)
        if (existing.name == a.name)
          throw ParseError("duplicate action '" + a.name + "'", number, 1);
      reg.actions.push_back(a);
      continue;
    }
    throw ParseError("unrecognized ontology construct '" + kw + "'", number, 1);
  }
  if (open)
    throw ParseError("unterminated concept block '" + open->name + "'", number, 1);

  for (const auto& c : reg.concepts) {
    bool anyMandatory = std::any_of(c.slots.begin(), c.slots.end(),
                                    [](const ConceptSlot& s) { return s.mandatory; });
    if (!anyMandatory)
      throw ParseError("concept '" + c.name + "' needs at least one mandatory slot", 1, 1);
  }
  for (const auto& a : reg.actions) {
    if (!reg.find_concept(a.payload))
      throw ParseError("action '" + a.name + "' references unknown concept '" +
                           a.payload + "'",
                       1, 1);
  }
  return reg;
}

inline std::string render_ontology(const OntologyRegistry& reg) {
  std::ostringstream out;
  for (const auto& c : reg.concepts) {
    out << "concept " << c.name << " {\n";
    for (const auto& s : c.slots) {
      out << "  " << s.name << " : " << to_string(s.type);
      if (s.mandatory) out << " mandatory";
      out << "\n";
    }
    out << "}\n";
  }
  for (const auto& p : reg.predicates)
    out << "predicate " << p.name << " : " << to_string(p.kind) << "(" << p.roles.first
        << ", " << p.roles.second << ")\n";
  for (const auto& a : reg.actions) {
    out << "action " << a.actor << " "
        << (a.direction == ActionDirection::Send ? "send " : "receive ") << a.payload
        << (a.direction == ActionDirection::Send ? " to " : " from ") << a.counterparty
        << "\n";
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Content validation
// ---------------------------------------------------------------------------

enum class ContentViolationKind { UnknownConcept, MissingMandatorySlot, UnknownSlot, TypeMismatch };

inline const char* to_string(ContentViolationKind k) {
  switch (k) {
    case ContentViolationKind::UnknownConcept: return "unknown-concept";
    case ContentViolationKind::MissingMandatorySlot: return "missing-mandatory-slot";
    case ContentViolationKind::UnknownSlot: return "unknown-slot";
    case ContentViolationKind::TypeMismatch: return "type-mismatch";
  }
  return "?";
}

struct ContentViolation {
  ContentViolationKind kind;
  std::string conceptName;
  std::string slot;
  std::string detail;
};

namespace detail {

inline bool value_matches(SemanticType type, const Value& v) {
  switch (type) {
    case SemanticType::Id:
    case SemanticType::String:
    case SemanticType::Enum:
      return std::holds_alternative<std::string>(v);
    case SemanticType::Integer:
      return std::holds_alternative<std::int64_t>(v);
    case SemanticType::Real:
      return std::holds_alternative<double>(v) || std::holds_alternative<std::int64_t>(v);
    case SemanticType::Boolean:
      return std::holds_alternative<bool>(v);
  }
  return false;
}

}  // namespace detail

inline std::vector<ContentViolation> validate_content(const OntologyRegistry& reg,
                                                      const ContentInstance& inst) {
  std::vector<ContentViolation> out;
  const ConceptSchema* schema = reg.find_concept(inst.conceptName);
  if (!schema) {
    out.push_back({ContentViolationKind::UnknownConcept, inst.conceptName, "",
                   "no schema registered"});
    return out;
  }
  for (const auto& slot : schema->slots) {
    if (!slot.mandatory) continue;
    auto it = inst.slots.find(slot.name);
    if (it == inst.slots.end() || is_unset(it->second))
      out.push_back({ContentViolationKind::MissingMandatorySlot, inst.conceptName, slot.name,
                     "mandatory slot absent"});
  }
  for (const auto& [name, value] : inst.slots) {
    const ConceptSlot* slot = schema->find_slot(name);
    if (!slot) {
      out.push_back({ContentViolationKind::UnknownSlot, inst.conceptName, name,
                     "schema declares no such slot"});
      continue;
    }
    if (!is_unset(value) && !detail::value_matches(slot->type, value))
      out.push_back({ContentViolationKind::TypeMismatch, inst.conceptName, name,
                     "expected " + std::string(to_string(slot->type)) + ", got " +
                         value_to_string(value)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Model-derived predicates and action conformance
// ---------------------------------------------------------------------------

inline std::vector<PredicateSchema> derive_predicates(const SystemModel& model) {
  std::vector<PredicateSchema> out;
  for (const auto& r : model.relationships) {
    PredicateSchema p;
    switch (r.kind) {
      case RelationshipKind::Inheritance: p.kind = PredicateKind::Inheritance; break;
      case RelationshipKind::Composition: p.kind = PredicateKind::Composition; break;
      case RelationshipKind::Aggregation: p.kind = PredicateKind::Aggregation; break;
      case RelationshipKind::Association: p.kind = PredicateKind::Collaboration; break;
    }
    p.roles = {r.source, r.target};
    p.name = std::string(to_string(p.kind)) + "_" + r.source + "_" + r.target;
    out.push_back(p);
  }
  std::sort(out.begin(), out.end(), [](const PredicateSchema& a, const PredicateSchema& b) {
    return std::tuple(static_cast<int>(a.kind), a.roles.first, a.roles.second) <
           std::tuple(static_cast<int>(b.kind), b.roles.first, b.roles.second);
  });
  return out;
}

// True iff the registry holds the Send action and its mirror Receive.
inline bool check_action_conformance(const OntologyRegistry& reg, const std::string& sender,
                                     const std::string& receiver,
                                     const std::string& conceptName) {
  bool sendOk = false, receiveOk = false;
  for (const auto& a : reg.actions) {
    if (a.direction == ActionDirection::Send && a.actor == sender &&
        a.counterparty == receiver && a.payload == conceptName)
      sendOk = true;
    if (a.direction == ActionDirection::Receive && a.actor == receiver &&
        a.counterparty == sender && a.payload == conceptName)
      receiveOk = true;
  }
  return sendOk && receiveOk;
}

}  // namespace amdd
