#pragma once

#include <cctype>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "amdd/model.hpp"
#include "amdd/types.hpp"

namespace amdd {

enum class DiagramKind { Class, State, Activity };

struct DiagramSource {
  DiagramKind kind = DiagramKind::Class;
  std::string text;
  std::string originLabel = "<inline>";
};

namespace puml {

struct Line {
  std::string text;   // trimmed, comments stripped
  int number = 0;     // 1-based in the original source
  int indent = 0;     // column of the first non-space character (1-based)
};

inline std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Strips ' comments, trims, keeps positions. Requires @startuml/@enduml.
inline std::vector<Line> body_lines(const DiagramSource& src) {
  std::vector<Line> lines;
  std::istringstream in(src.text);
  std::string raw;
  int number = 0;
  bool started = false, ended = false;
  while (std::getline(in, raw)) {
    ++number;
    std::string t = trim(raw);
    if (t.empty() || t[0] == '\'') continue;
    if (t == "@startuml") {
      if (started) throw ParseError("nested @startuml", number, 1);
      started = true;
      continue;
    }
    if (t == "@enduml") {
      if (!started) throw ParseError("@enduml before @startuml", number, 1);
      ended = true;
      continue;
    }
    if (ended) throw ParseError("content after @enduml", number, 1);
    if (!started) throw ParseError("content before @startuml", number, 1);
    int indent = static_cast<int>(raw.find_first_not_of(" \t")) + 1;
    lines.push_back({t, number, indent});
  }
  if (!started) throw ParseError("missing @startuml", number == 0 ? 1 : number, 1);
  if (!ended) throw ParseError("missing @enduml", number == 0 ? 1 : number, 1);
  return lines;
}

inline std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (c == '"') {
      size_t close = line.find('"', i + 1);
      if (close == std::string::npos) close = line.size() - 1;
      out.push_back(line.substr(i, close - i + 1));
      i = close;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) { out.push_back(cur); cur.clear(); }
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

inline int column_of(const Line& line, const std::string& token) {
  size_t pos = line.text.find(token);
  if (pos == std::string::npos) return line.indent;
  return line.indent + static_cast<int>(pos);
}

}  // namespace puml

// ---------------------------------------------------------------------------
// Class diagrams
// ---------------------------------------------------------------------------

inline std::pair<std::vector<AgentClass>, std::vector<Relationship>>
parse_class_diagram(const DiagramSource& src) {
  if (src.kind != DiagramKind::Class)
    throw std::invalid_argument("parse_class_diagram: source is not a class diagram");

  std::vector<AgentClass> classes;
  std::vector<Relationship> relationships;
  auto lines = puml::body_lines(src);

  auto find_class = [&](const std::string& name) -> AgentClass* {
    for (auto& c : classes)
      if (c.name == name) return &c;
    return nullptr;
  };

  auto parse_member = [&](AgentClass& cls, const puml::Line& line) {
    std::string t = line.text;
    auto paren = t.find('(');
    auto firstColon = t.find(':');
    // A '(' before any ':' marks a method; `attr : enum(A,B)` stays an attribute.
    if (paren != std::string::npos &&
        (firstColon == std::string::npos || paren < firstColon)) {
      Method m;
      m.name = puml::trim(t.substr(0, paren));
      auto close = t.find(')', paren);
      if (close == std::string::npos)
        throw ParseError("unterminated parameter list", line.number, puml::column_of(line, "("));
      std::string params = puml::trim(t.substr(paren + 1, close - paren - 1));
      if (!params.empty()) {
        std::istringstream ps(params);
        std::string piece;
        while (std::getline(ps, piece, ',')) {
          auto colon = piece.find(':');
          if (colon == std::string::npos)
            throw ParseError("parameter needs 'name : type'", line.number, line.indent);
          Parameter p;
          p.name = puml::trim(piece.substr(0, colon));
          std::string ty = puml::trim(piece.substr(colon + 1));
          auto tag = semantic_type_from(ty);
          if (!tag)
            throw ParseError("unknown parameter type '" + ty + "'", line.number,
                             puml::column_of(line, ty));
          p.type = *tag;
          m.parameters.push_back(p);
        }
      }
      std::string rest = puml::trim(t.substr(close + 1));
      if (!rest.empty()) {
        if (rest[0] != ':')
          throw ParseError("expected ': ReturnType' after parameter list", line.number,
                           puml::column_of(line, rest));
        std::string ret = puml::trim(rest.substr(1));
        if (ret != "void") {
          auto tag = semantic_type_from(ret);
          if (!tag)
            throw ParseError("unknown return type '" + ret + "'", line.number,
                             puml::column_of(line, ret));
          m.returnType = *tag;
        }
      }
      cls.methods.push_back(m);
      return;
    }
    auto colon = t.find(':');
    if (colon == std::string::npos)
      throw ParseError("expected attribute 'name : type' or method 'name(...)'",
                       line.number, line.indent);
    Attribute a;
    a.name = puml::trim(t.substr(0, colon));
    std::string ty = puml::trim(t.substr(colon + 1));
    // enum(A,B,C)
    if (ty.rfind("enum(", 0) == 0 && ty.back() == ')') {
      a.type = SemanticType::Enum;
      std::istringstream es(ty.substr(5, ty.size() - 6));
      std::string v;
      while (std::getline(es, v, ',')) a.enumValues.push_back(puml::trim(v));
    } else {
      auto tag = semantic_type_from(ty);
      if (!tag)
        throw ParseError("unknown attribute type '" + ty + "'", line.number,
                         puml::column_of(line, ty));
      a.type = *tag;
    }
    if (!is_identifier(a.name))
      throw ParseError("bad attribute name '" + a.name + "'", line.number, line.indent);
    cls.attributes.push_back(a);
  };

  auto declare_class = [&](const std::string& rawName, bool isAbstract,
                           const puml::Line& line) -> AgentClass& {
    std::string name = normalize_identifier(rawName);
    if (!is_identifier(rawName))
      throw ParseError("bad class name '" + rawName + "'", line.number,
                       puml::column_of(line, rawName));
    if (find_class(name))
      throw ParseError("duplicate class declaration '" + name + "'", line.number,
                       puml::column_of(line, rawName));
    AgentClass c;
    c.name = name;
    c.displayLabel = rawName;
    c.isAbstract = isAbstract;
    classes.push_back(c);
    return classes.back();
  };

  // Arrow lines: A --|> B | A *-- B | A o-- B | A -- B,
  // optionally with quoted cardinalities and a trailing `: label`.
  auto try_arrow = [&](const puml::Line& line) -> bool {
    auto tokens = puml::tokenize(line.text);
    // Peel off a trailing ": label".
    std::string label;
    for (size_t i = 0; i < tokens.size(); ++i) {
      if (tokens[i] == ":") {
        if (i + 1 < tokens.size()) label = tokens[i + 1];
        tokens.resize(i);
        break;
      }
    }
    int arrowIdx = -1;
    RelationshipKind kind{};
    for (size_t i = 0; i < tokens.size(); ++i) {
      const std::string& t = tokens[i];
      if (t == "--|>") { kind = RelationshipKind::Inheritance; arrowIdx = static_cast<int>(i); }
      else if (t == "*--") { kind = RelationshipKind::Composition; arrowIdx = static_cast<int>(i); }
      else if (t == "o--") { kind = RelationshipKind::Aggregation; arrowIdx = static_cast<int>(i); }
      else if (t == "--") { kind = RelationshipKind::Association; arrowIdx = static_cast<int>(i); }
      if (arrowIdx >= 0) break;
    }
    if (arrowIdx < 0) return false;

    auto unquote = [](const std::string& s) {
      if (s.size() >= 2 && s.front() == '"' && s.back() == '"')
        return s.substr(1, s.size() - 2);
      return s;
    };
    // Shapes: A ARROW B | A "c" ARROW B | A ARROW "c" B | A "c1" ARROW "c2" B
    std::vector<std::string> left(tokens.begin(), tokens.begin() + arrowIdx);
    std::vector<std::string> right(tokens.begin() + arrowIdx + 1, tokens.end());
    if (left.empty() || left.size() > 2 || right.empty() || right.size() > 2)
      throw ParseError("malformed relationship line", line.number, line.indent);

    Relationship r;
    r.kind = kind;
    r.source = normalize_identifier(left[0]);
    if (left.size() == 2) {
      auto c = Cardinality::parse(unquote(left[1]));
      if (!c) throw ParseError("bad cardinality '" + left[1] + "'", line.number,
                               puml::column_of(line, left[1]));
      r.sourceCardinality = c;
    }
    std::string targetTok = right.back();
    if (right.size() == 2) {
      auto c = Cardinality::parse(unquote(right[0]));
      if (!c) throw ParseError("bad cardinality '" + right[0] + "'", line.number,
                               puml::column_of(line, right[0]));
      r.targetCardinality = c;
    }
    r.target = normalize_identifier(targetTok);
    r.label = label;
    if (kind == RelationshipKind::Inheritance && (r.sourceCardinality || r.targetCardinality))
      throw ParseError("inheritance carries no cardinalities", line.number, line.indent);
    relationships.push_back(r);
    return true;
  };

  AgentClass* open = nullptr;  // class whose { } body we are inside
  for (const auto& line : lines) {
    const std::string& t = line.text;
    if (open) {
      if (t == "}") { open = nullptr; continue; }
      parse_member(*open, line);
      continue;
    }
    auto tokens = puml::tokenize(t);
    if (tokens.empty()) continue;
    bool isAbstract = false;
    size_t k = 0;
    if (tokens[k] == "abstract") { isAbstract = true; ++k; }
    if (k < tokens.size() && tokens[k] == "class") {
      if (k + 1 >= tokens.size())
        throw ParseError("class declaration needs a name", line.number, line.indent);
      AgentClass& c = declare_class(tokens[k + 1], isAbstract, line);
      if (tokens.size() > k + 2) {
        if (tokens[k + 2] != "{")
          throw ParseError("unexpected token '" + tokens[k + 2] + "' after class name",
                           line.number, puml::column_of(line, tokens[k + 2]));
        open = &c;
      }
      continue;
    }
    if (isAbstract)
      throw ParseError("'abstract' must precede 'class'", line.number, line.indent);
    if (try_arrow(line)) continue;
    throw ParseError("unrecognized class-diagram construct: '" + tokens[0] + "'",
                     line.number, puml::column_of(line, tokens[0]));
  }
  if (open)
    throw ParseError("unterminated class body for '" + open->name + "'",
                     lines.empty() ? 1 : lines.back().number, 1);

  // Arrow endpoints must name declared classes.
  for (const auto& r : relationships) {
    for (const std::string* end : {&r.source, &r.target}) {
      if (!find_class(*end))
        throw ParseError("relationship references undeclared class '" + *end + "'",
                         lines.empty() ? 1 : lines.back().number, 1);
    }
  }
  return {classes, relationships};
}

// ---------------------------------------------------------------------------
// State diagrams
// ---------------------------------------------------------------------------

namespace puml {

// `event [guard] / action`, every part optional.
inline void parse_transition_label(const std::string& label, Transition& t,
                                   int lineNo, int col) {
  std::string rest = trim(label);
  auto slash = rest.find('/');
  if (slash != std::string::npos) {
    t.action = trim(rest.substr(slash + 1));
    rest = trim(rest.substr(0, slash));
  }
  auto lb = rest.find('[');
  if (lb != std::string::npos) {
    auto rb = rest.find(']', lb);
    if (rb == std::string::npos) throw ParseError("unterminated guard", lineNo, col);
    t.guard = trim(rest.substr(lb + 1, rb - lb - 1));
    rest = trim(rest.substr(0, lb));
  }
  t.event = rest;
}

}  // namespace puml

inline StateMachine parse_state_diagram(const DiagramSource& src,
                                        const std::string& ownerClass = "") {
  if (src.kind != DiagramKind::State)
    throw std::invalid_argument("parse_state_diagram: source is not a state diagram");

  StateMachine machine;
  machine.ownerClass = ownerClass;
  auto lines = puml::body_lines(src);

  auto ensure_state = [&](const std::string& name,
                          const std::optional<std::string>& parent) {
    for (auto& s : machine.states) {
      if (s.name != name) continue;
      if (parent && !s.parent) s.parent = parent;
      return;
    }
    machine.states.push_back({name, parent});
  };

  std::optional<std::string> composite;  // open `state X {` block
  std::vector<std::string> referenced;
  std::vector<std::pair<std::string, int>> referencedAt;

  for (const auto& line : lines) {
    const std::string& t = line.text;
    if (t == "}") {
      if (!composite)
        throw ParseError("unmatched '}'", line.number, line.indent);
      composite.reset();
      continue;
    }
    auto tokens = puml::tokenize(t);
    if (tokens.empty()) continue;

    // owner directive lets a state file name its class: `' owner: UV` is a
    // comment, so we accept `title X` as machine owner instead.
    if (tokens[0] == "title") {
      if (tokens.size() >= 2 && machine.ownerClass.empty())
        machine.ownerClass = normalize_identifier(tokens[1]);
      continue;
    }

    if (tokens[0] == "state") {
      if (tokens.size() < 2)
        throw ParseError("state declaration needs a name", line.number, line.indent);
      std::string name = normalize_identifier(tokens[1]);
      bool opens = tokens.size() >= 3 && tokens[2] == "{";
      if (opens) {
        if (composite)
          throw ParseError("nested composite state beyond depth 1", line.number,
                           line.indent);
        ensure_state(name, std::nullopt);
        composite = name;
      } else {
        ensure_state(name, composite);
      }
      continue;
    }

    // Transitions: `[*] --> S` or `A --> B : label`.
    int arrowIdx = -1;
    for (size_t i = 0; i < tokens.size(); ++i)
      if (tokens[i] == "-->") { arrowIdx = static_cast<int>(i); break; }
    if (arrowIdx == 1 && tokens.size() >= 3) {
      std::string from = tokens[0];
      std::string to = normalize_identifier(tokens[2]);
      std::string label;
      for (size_t i = 3; i < tokens.size(); ++i) {
        if (tokens[i] == ":") continue;
        if (!label.empty()) label += " ";
        label += tokens[i];
      }
      if (from == "[*]") {
        if (composite) {
          ensure_state(to, composite);
          if (machine.compositeInitial.count(*composite))
            throw ParseError("composite '" + *composite + "' has two initial states",
                             line.number, line.indent);
          machine.compositeInitial[*composite] = to;
        } else {
          if (!machine.initial.empty())
            throw ParseError("duplicate initial state", line.number, line.indent);
          ensure_state(to, std::nullopt);
          machine.initial = to;
        }
        continue;
      }
      std::string fromName = normalize_identifier(from);
      if (composite) {
        ensure_state(fromName, composite);
        ensure_state(to, composite);
      } else {
        referenced.push_back(fromName);
        referencedAt.emplace_back(fromName, line.number);
        referenced.push_back(to);
        referencedAt.emplace_back(to, line.number);
      }
      Transition tr;
      tr.from = fromName;
      tr.to = to;
      puml::parse_transition_label(label, tr, line.number, line.indent);
      machine.transitions.push_back(tr);
      continue;
    }
    throw ParseError("unrecognized state-diagram construct: '" + tokens[0] + "'",
                     line.number, puml::column_of(line, tokens[0]));
  }
  if (composite)
    throw ParseError("unterminated composite state '" + *composite + "'",
                     lines.empty() ? 1 : lines.back().number, 1);
  if (machine.initial.empty())
    throw ParseError("state diagram has no initial state ([*] --> S)",
                     lines.empty() ? 1 : lines.back().number, 1);

  // Top-level transitions may only reference declared states.
  for (const auto& [name, lineNo] : referencedAt) {
    if (!machine.find_state(name))
      throw ParseError("transition references undeclared state '" + name + "'",
                       lineNo, 1);
  }
  return machine;
}

// ---------------------------------------------------------------------------
// Activity diagrams
// ---------------------------------------------------------------------------

inline ActivityFlow parse_activity_diagram(const DiagramSource& src,
                                           const std::string& name = "activity") {
  if (src.kind != DiagramKind::Activity)
    throw std::invalid_argument("parse_activity_diagram: source is not an activity diagram");

  ActivityFlow flow;
  flow.name = name;
  auto lines = puml::body_lines(src);

  int counter = 0;
  auto fresh = [&]() { return "n" + std::to_string(++counter); };
  std::string lane;

  auto add_node = [&](ActivityNodeKind kind, const std::string& label) -> std::string {
    ActivityNode n;
    n.id = fresh();
    n.kind = kind;
    n.label = label;
    n.partition = lane;
    flow.nodes.push_back(n);
    return n.id;
  };

  struct Pending {
    std::string from;
    std::optional<std::string> guard;
  };
  std::vector<Pending> pending;

  auto connect_to = [&](const std::string& target) {
    for (const auto& p : pending) flow.edges.push_back({p.from, target, p.guard});
    pending.clear();
  };

  struct IfFrame {
    std::string decision;
    std::vector<Pending> doneBranches;
    bool inElse = false;
  };
  struct ForkFrame {
    std::string fork;
    std::vector<Pending> branchEnds;
  };
  std::vector<IfFrame> ifStack;
  std::vector<ForkFrame> forkStack;
  bool sawInitial = false;

  for (const auto& line : lines) {
    const std::string& t = line.text;

    if (t.size() >= 2 && t.front() == '|' && t.back() == '|') {
      std::string raw = puml::trim(t.substr(1, t.size() - 2));
      lane = normalize_identifier(raw);
      if (lane.empty())
        throw ParseError("empty swimlane name", line.number, line.indent);
      if (std::find(flow.partitions.begin(), flow.partitions.end(), lane) ==
          flow.partitions.end())
        flow.partitions.push_back(lane);
      continue;
    }
    if (t == "start") {
      if (sawInitial) throw ParseError("duplicate start", line.number, line.indent);
      sawInitial = true;
      std::string id = add_node(ActivityNodeKind::Initial, "start");
      pending = {{id, std::nullopt}};
      continue;
    }
    if (t == "stop") {
      std::string id = add_node(ActivityNodeKind::Final, "stop");
      connect_to(id);
      continue;
    }
    if (t.front() == ':') {
      if (t.back() != ';')
        throw ParseError("action must end with ';'", line.number,
                         line.indent + static_cast<int>(t.size()) - 1);
      std::string label = puml::trim(t.substr(1, t.size() - 2));
      if (lane.empty())
        throw ParseError("action '" + label + "' outside any swimlane", line.number,
                         line.indent);
      std::string id = add_node(ActivityNodeKind::Action, label);
      connect_to(id);
      pending = {{id, std::nullopt}};
      continue;
    }
    if (t.rfind("if ", 0) == 0 || t.rfind("if(", 0) == 0) {
      auto o = t.find('(');
      auto c = t.find(')', o);
      if (o == std::string::npos || c == std::string::npos)
        throw ParseError("if needs a (condition)", line.number, line.indent);
      std::string cond = puml::trim(t.substr(o + 1, c - o - 1));
      std::string rest = puml::trim(t.substr(c + 1));
      std::optional<std::string> thenGuard;
      if (rest.rfind("then", 0) == 0) {
        auto o2 = rest.find('(');
        auto c2 = rest.find(')', o2);
        if (o2 != std::string::npos && c2 != std::string::npos)
          thenGuard = puml::trim(rest.substr(o2 + 1, c2 - o2 - 1));
      }
      std::string id = add_node(ActivityNodeKind::Decision, cond);
      connect_to(id);
      ifStack.push_back({id, {}, false});
      pending = {{id, thenGuard}};
      continue;
    }
    if (t == "else" || t.rfind("else ", 0) == 0 || t.rfind("else(", 0) == 0) {
      if (ifStack.empty() || ifStack.back().inElse)
        throw ParseError("'else' without open 'if'", line.number, line.indent);
      std::optional<std::string> elseGuard;
      auto o = t.find('(');
      auto c = t.find(')', o);
      if (o != std::string::npos && c != std::string::npos)
        elseGuard = puml::trim(t.substr(o + 1, c - o - 1));
      ifStack.back().doneBranches.insert(ifStack.back().doneBranches.end(),
                                         pending.begin(), pending.end());
      ifStack.back().inElse = true;
      pending = {{ifStack.back().decision, elseGuard}};
      continue;
    }
    if (t == "endif") {
      if (ifStack.empty())
        throw ParseError("'endif' without open 'if'", line.number, line.indent);
      IfFrame frame = ifStack.back();
      ifStack.pop_back();
      std::vector<Pending> merged = frame.doneBranches;
      merged.insert(merged.end(), pending.begin(), pending.end());
      if (!frame.inElse)  // implicit empty else branch
        merged.push_back({frame.decision, std::nullopt});
      pending = merged;
      std::string id = add_node(ActivityNodeKind::Merge, "");
      connect_to(id);
      pending = {{id, std::nullopt}};
      continue;
    }
    if (t == "fork") {
      std::string id = add_node(ActivityNodeKind::Fork, "");
      connect_to(id);
      forkStack.push_back({id, {}});
      pending = {{id, std::nullopt}};
      continue;
    }
    if (t == "fork again") {
      if (forkStack.empty())
        throw ParseError("'fork again' without open 'fork'", line.number, line.indent);
      auto& frame = forkStack.back();
      frame.branchEnds.insert(frame.branchEnds.end(), pending.begin(), pending.end());
      pending = {{frame.fork, std::nullopt}};
      continue;
    }
    if (t == "end fork") {
      if (forkStack.empty())
        throw ParseError("'end fork' without open 'fork'", line.number, line.indent);
      ForkFrame frame = forkStack.back();
      forkStack.pop_back();
      frame.branchEnds.insert(frame.branchEnds.end(), pending.begin(), pending.end());
      pending = frame.branchEnds;
      std::string id = add_node(ActivityNodeKind::Join, "");
      connect_to(id);
      pending = {{id, std::nullopt}};
      continue;
    }
    throw ParseError("unrecognized activity construct: '" + t + "'", line.number,
                     line.indent);
  }

  if (!ifStack.empty())
    throw ParseError("unbalanced 'if' block", lines.empty() ? 1 : lines.back().number, 1);
  if (!forkStack.empty())
    throw ParseError("unbalanced 'fork' block", lines.empty() ? 1 : lines.back().number, 1);
  if (!sawInitial)
    throw ParseError("activity diagram has no 'start'",
                     lines.empty() ? 1 : lines.back().number, 1);
  return flow;
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

inline std::string render_class_diagram(const SystemModel& model) {
  std::ostringstream out;
  out << "@startuml\n";
  for (const auto& c : model.classes) {
    out << (c.isAbstract ? "abstract class " : "class ")
        << (c.displayLabel.empty() ? c.name : c.displayLabel);
    if (c.attributes.empty() && c.methods.empty()) {
      out << "\n";
      continue;
    }
    out << " {\n";
    for (const auto& a : c.attributes) {
      out << "  " << a.name << " : ";
      if (a.type == SemanticType::Enum) {
        out << "enum(";
        for (size_t i = 0; i < a.enumValues.size(); ++i)
          out << (i ? "," : "") << a.enumValues[i];
        out << ")";
      } else {
        out << to_string(a.type);
      }
      out << "\n";
    }
    for (const auto& m : c.methods) {
      out << "  " << m.name << "(";
      for (size_t i = 0; i < m.parameters.size(); ++i)
        out << (i ? ", " : "") << m.parameters[i].name << " : "
            << to_string(m.parameters[i].type);
      out << ") : " << (m.returnType ? to_string(*m.returnType) : "void") << "\n";
    }
    out << "}\n";
  }
  for (const auto& r : model.relationships) {
    const char* arrow = "--";
    switch (r.kind) {
      case RelationshipKind::Inheritance: arrow = "--|>"; break;
      case RelationshipKind::Composition: arrow = "*--"; break;
      case RelationshipKind::Aggregation: arrow = "o--"; break;
      case RelationshipKind::Association: arrow = "--"; break;
    }
    out << r.source;
    if (r.sourceCardinality) out << " \"" << r.sourceCardinality->text() << "\"";
    out << " " << arrow << " ";
    if (r.targetCardinality) out << "\"" << r.targetCardinality->text() << "\" ";
    out << r.target;
    if (!r.label.empty()) out << " : " << r.label;
    out << "\n";
  }
  out << "@enduml\n";
  return out.str();
}

inline std::string render_state_diagram(const StateMachine& m) {
  std::ostringstream out;
  out << "@startuml\n";
  if (!m.ownerClass.empty()) out << "title " << m.ownerClass << "\n";
  out << "[*] --> " << m.initial << "\n";
  for (const auto& s : m.states) {
    if (s.parent) continue;
    if (m.is_composite(s.name)) {
      out << "state " << s.name << " {\n";
      auto it = m.compositeInitial.find(s.name);
      if (it != m.compositeInitial.end()) out << "  [*] --> " << it->second << "\n";
      for (const auto& sub : m.states)
        if (sub.parent && *sub.parent == s.name) out << "  state " << sub.name << "\n";
      out << "}\n";
    } else if (s.name != m.initial) {
      out << "state " << s.name << "\n";
    } else {
      // initial already introduced by [*] -->; declare anyway for clarity
      out << "state " << s.name << "\n";
    }
  }
  for (const auto& t : m.transitions) {
    out << t.from << " --> " << t.to;
    if (!t.event.empty() || t.guard || t.action) {
      out << " : " << t.event;
      if (t.guard) out << " [" << *t.guard << "]";
      if (t.action) out << " / " << *t.action;
    }
    out << "\n";
  }
  out << "@enduml\n";
  return out.str();
}

namespace puml {

// Structured re-emission of an ActivityFlow. Works on flows built from the
// structured constructs the parser accepts (seq / if / fork), which is the
// full range this toolchain produces.
class ActivityRenderer {
 public:
  explicit ActivityRenderer(const ActivityFlow& flow) : flow_(flow) {}

  std::string render() {
    out_ << "@startuml\n";
    const ActivityNode* init = nullptr;
    for (const auto& n : flow_.nodes)
      if (n.kind == ActivityNodeKind::Initial) init = &n;
    if (!init) throw std::runtime_error("activity flow has no Initial node");
    switch_lane(init->partition);
    out_ << "start\n";
    emit_seq(next_of(init->id), "");
    out_ << "@enduml\n";
    return out_.str();
  }

 private:
  std::vector<ActivityEdge> edges_of(const std::string& id) const {
    std::vector<ActivityEdge> out;
    for (const auto& e : flow_.edges)
      if (e.from == id) out.push_back(e);
    return out;
  }

  std::string next_of(const std::string& id) const {
    auto es = edges_of(id);
    if (es.size() != 1)
      throw std::runtime_error("expected single successor of node " + id);
    return es[0].to;
  }

  void switch_lane(const std::string& lane) {
    if (lane.empty() || lane == lane_) return;
    lane_ = lane;
    out_ << "|" << lane << "|\n";
  }

  // Emits the chain starting at `id` until `stop` (exclusive); returns the
  // node that terminated the walk ("" when a Final node ended it).
  std::string emit_seq(std::string id, const std::string& stop) {
    while (!id.empty() && id != stop) {
      const ActivityNode* n = flow_.find_node(id);
      if (!n) throw std::runtime_error("dangling node id " + id);
      switch (n->kind) {
        case ActivityNodeKind::Action:
          switch_lane(n->partition);
          out_ << ":" << n->label << ";\n";
          id = next_of(id);
          break;
        case ActivityNodeKind::Final:
          switch_lane(n->partition);
          out_ << "stop\n";
          return "";
        case ActivityNodeKind::Decision: {
          auto branches = edges_of(id);
          if (branches.size() != 2)
            throw std::runtime_error("decision " + id + " must have 2 branches");
          std::string merge = find_closer(id, ActivityNodeKind::Merge);
          switch_lane(n->partition);
          out_ << "if (" << n->label << ") then";
          if (branches[0].guard) out_ << " (" << *branches[0].guard << ")";
          out_ << "\n";
          emit_seq(branches[0].to, merge);
          out_ << "else";
          if (branches[1].guard) out_ << " (" << *branches[1].guard << ")";
          out_ << "\n";
          emit_seq(branches[1].to, merge);
          out_ << "endif\n";
          id = next_of(merge);
          break;
        }
        case ActivityNodeKind::Fork: {
          auto branches = edges_of(id);
          std::string join = find_closer(id, ActivityNodeKind::Join);
          switch_lane(n->partition);
          out_ << "fork\n";
          for (size_t i = 0; i < branches.size(); ++i) {
            if (i) out_ << "fork again\n";
            emit_seq(branches[i].to, join);
          }
          const ActivityNode* j = flow_.find_node(join);
          if (j) switch_lane(j->partition);
          out_ << "end fork\n";
          id = next_of(join);
          break;
        }
        case ActivityNodeKind::Merge:
        case ActivityNodeKind::Join:
          // handled by the enclosing construct
          return id;
        case ActivityNodeKind::Initial:
          throw std::runtime_error("unexpected second Initial node");
      }
    }
    return id;
  }

  // The matching Merge/Join for a Decision/Fork: the nearest node of that
  // kind reachable from every branch. The walk continues past intermediate
  // closers so that nested constructs inside a branch do not hide the
  // reconvergence point.
  std::string find_closer(const std::string& id, ActivityNodeKind kind) const {
    auto branches = edges_of(id);
    std::map<std::string, size_t> hits;
    for (const auto& b : branches) {
      std::set<std::string> seen;
      std::vector<std::string> stack{b.to};
      while (!stack.empty()) {
        std::string cur = stack.back();
        stack.pop_back();
        if (!seen.insert(cur).second) continue;
        const ActivityNode* n = flow_.find_node(cur);
        if (!n) continue;
        if (n->kind == kind) hits[cur]++;
        for (const auto& e : flow_.edges)
          if (e.from == cur) stack.push_back(e.to);
      }
    }
    // Breadth-first distances from the opener pick the nearest candidate;
    // any later closer lies strictly downstream of the matching one.
    std::map<std::string, int> dist;
    std::vector<std::string> frontier{id};
    dist[id] = 0;
    for (size_t head = 0; head < frontier.size(); ++head) {
      std::string cur = frontier[head];
      for (const auto& e : flow_.edges) {
        if (e.from != cur || dist.count(e.to)) continue;
        dist[e.to] = dist[cur] + 1;
        frontier.push_back(e.to);
      }
    }
    std::string best;
    int bestDist = std::numeric_limits<int>::max();
    for (const auto& [node, count] : hits) {
      if (count != branches.size()) continue;
      auto it = dist.find(node);
      if (it != dist.end() && it->second < bestDist) {
        bestDist = it->second;
        best = node;
      }
    }
    if (best.empty()) throw std::runtime_error("no reconvergence node for " + id);
    return best;
  }

  const ActivityFlow& flow_;
  std::ostringstream out_;
  std::string lane_;
};

}  // namespace puml

inline std::string render_activity_diagram(const ActivityFlow& flow) {
  return puml::ActivityRenderer(flow).render();
}

inline std::vector<DiagramSource> render_model(const SystemModel& model) {
  std::vector<DiagramSource> out;
  out.push_back({DiagramKind::Class, render_class_diagram(model), "<rendered>"});
  for (const auto& m : model.stateMachines)
    out.push_back({DiagramKind::State, render_state_diagram(m), "<rendered>"});
  for (const auto& f : model.activities)
    out.push_back({DiagramKind::Activity, render_activity_diagram(f), "<rendered>"});
  return out;
}

}  // namespace amdd
