#pragma once

#include <string>

#include <json.hpp>

#include "amdd/model.hpp"

namespace amdd {

// JSON model format. Top-level keys: classes, relationships, stateMachines,
// activities, modelName, version. Key order is fixed for diff-ability.

using ordered_json = nlohmann::ordered_json;

namespace detail {

inline ordered_json attr_to_json(const Attribute& a) {
  ordered_json j;
  j["name"] = a.name;
  j["type"] = to_string(a.type);
  if (a.type == SemanticType::Enum) j["enumValues"] = a.enumValues;
  return j;
}

inline ordered_json method_to_json(const Method& m) {
  ordered_json j;
  j["name"] = m.name;
  ordered_json params = ordered_json::array();
  for (const auto& p : m.parameters)
    params.push_back({{"name", p.name}, {"type", to_string(p.type)}});
  j["parameters"] = params;
  j["returnType"] = m.returnType ? to_string(*m.returnType) : "void";
  return j;
}

inline SemanticType type_from_json(const ordered_json& j, const std::string& where) {
  auto t = semantic_type_from(j.get<std::string>());
  if (!t) throw std::runtime_error("unknown semantic type '" + j.get<std::string>() +
                                   "' at " + where);
  return *t;
}

inline void position_from_offset(const std::string& text, size_t byte, int& line, int& col) {
  line = 1;
  col = 1;
  for (size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') { ++line; col = 1; } else { ++col; }
  }
}

}  // namespace detail

inline std::string serialize_model(const SystemModel& model) {
  ValidationReport report = validate_model(model);
  if (!report.ok()) {
    std::string msg = "refusing to serialize invalid model:";
    for (const auto& i : report.issues) msg += " [" + i.location + "] " + i.message + ";";
    throw std::runtime_error(msg);
  }

  ordered_json j;
  j["modelName"] = model.modelName;
  j["version"] = model.version;

  ordered_json classes = ordered_json::array();
  for (const auto& c : model.classes) {
    ordered_json jc;
    jc["name"] = c.name;
    jc["displayLabel"] = c.displayLabel.empty() ? c.name : c.displayLabel;
    ordered_json attrs = ordered_json::array();
    for (const auto& a : c.attributes) attrs.push_back(detail::attr_to_json(a));
    jc["attributes"] = attrs;
    ordered_json methods = ordered_json::array();
    for (const auto& m : c.methods) methods.push_back(detail::method_to_json(m));
    jc["methods"] = methods;
    jc["isAbstract"] = c.isAbstract;
    classes.push_back(jc);
  }
  j["classes"] = classes;

  ordered_json rels = ordered_json::array();
  for (const auto& r : model.relationships) {
    ordered_json jr;
    jr["kind"] = to_string(r.kind);
    jr["source"] = r.source;
    jr["target"] = r.target;
    if (r.sourceCardinality) jr["sourceCardinality"] = r.sourceCardinality->text();
    if (r.targetCardinality) jr["targetCardinality"] = r.targetCardinality->text();
    if (!r.label.empty()) jr["label"] = r.label;
    rels.push_back(jr);
  }
  j["relationships"] = rels;

  ordered_json machines = ordered_json::array();
  for (const auto& m : model.stateMachines) {
    ordered_json jm;
    jm["ownerClass"] = m.ownerClass;
    ordered_json states = ordered_json::array();
    for (const auto& s : m.states) {
      ordered_json js;
      js["name"] = s.name;
      if (s.parent) js["parent"] = *s.parent;
      states.push_back(js);
    }
    jm["states"] = states;
    jm["initial"] = m.initial;
    ordered_json ci = ordered_json::object();
    for (const auto& [comp, init] : m.compositeInitial) ci[comp] = init;
    jm["compositeInitial"] = ci;
    ordered_json trans = ordered_json::array();
    for (const auto& t : m.transitions) {
      ordered_json jt;
      jt["from"] = t.from;
      jt["to"] = t.to;
      jt["event"] = t.event;
      if (t.guard) jt["guard"] = *t.guard;
      if (t.action) jt["action"] = *t.action;
      trans.push_back(jt);
    }
    jm["transitions"] = trans;
    machines.push_back(jm);
  }
  j["stateMachines"] = machines;

  ordered_json flows = ordered_json::array();
  for (const auto& f : model.activities) {
    ordered_json jf;
    jf["name"] = f.name;
    jf["partitions"] = f.partitions;
    ordered_json nodes = ordered_json::array();
    for (const auto& n : f.nodes) {
      ordered_json jn;
      jn["id"] = n.id;
      jn["kind"] = to_string(n.kind);
      jn["label"] = n.label;
      jn["partition"] = n.partition;
      nodes.push_back(jn);
    }
    jf["nodes"] = nodes;
    ordered_json edges = ordered_json::array();
    for (const auto& e : f.edges) {
      ordered_json je;
      je["from"] = e.from;
      je["to"] = e.to;
      if (e.guard) je["guard"] = *e.guard;
      edges.push_back(je);
    }
    jf["edges"] = edges;
    flows.push_back(jf);
  }
  j["activities"] = flows;

  return j.dump(2) + "\n";
}

inline SystemModel deserialize_model(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    int line = 1, col = 1;
    detail::position_from_offset(text, e.byte > 0 ? e.byte - 1 : 0, line, col);
    throw ParseError(std::string("model JSON: ") + e.what(), line, col);
  }

  SystemModel model;
  model.modelName = j.value("modelName", "");
  model.version = j.value("version", "");

  for (const auto& jc : j.value("classes", ordered_json::array())) {
    AgentClass c;
    c.name = jc.at("name").get<std::string>();
    c.displayLabel = jc.value("displayLabel", c.name);
    for (const auto& ja : jc.value("attributes", ordered_json::array())) {
      Attribute a;
      a.name = ja.at("name").get<std::string>();
      a.type = detail::type_from_json(ja.at("type"), "class " + c.name);
      if (a.type == SemanticType::Enum)
        a.enumValues = ja.value("enumValues", std::vector<std::string>{});
      c.attributes.push_back(a);
    }
    for (const auto& jm : jc.value("methods", ordered_json::array())) {
      Method m;
      m.name = jm.at("name").get<std::string>();
      for (const auto& jp : jm.value("parameters", ordered_json::array())) {
        Parameter p;
        p.name = jp.at("name").get<std::string>();
        p.type = detail::type_from_json(jp.at("type"), "method " + m.name);
        m.parameters.push_back(p);
      }
      std::string ret = jm.value("returnType", "void");
      if (ret != "void")
        m.returnType = detail::type_from_json(ordered_json(ret), "method " + m.name);
      c.methods.push_back(m);
    }
    c.isAbstract = jc.value("isAbstract", false);
    model.classes.push_back(c);
  }

  auto kind_from = [](const std::string& s) {
    if (s == "Inheritance") return RelationshipKind::Inheritance;
    if (s == "Composition") return RelationshipKind::Composition;
    if (s == "Aggregation") return RelationshipKind::Aggregation;
    if (s == "Association") return RelationshipKind::Association;
    throw std::runtime_error("unknown relationship kind '" + s + "'");
  };
  for (const auto& jr : j.value("relationships", ordered_json::array())) {
    Relationship r;
    r.kind = kind_from(jr.at("kind").get<std::string>());
    r.source = jr.at("source").get<std::string>();
    r.target = jr.at("target").get<std::string>();
    if (jr.contains("sourceCardinality")) {
      auto c = Cardinality::parse(jr["sourceCardinality"].get<std::string>());
      if (!c) throw std::runtime_error("bad sourceCardinality in relationship " + r.source);
      r.sourceCardinality = c;
    }
    if (jr.contains("targetCardinality")) {
      auto c = Cardinality::parse(jr["targetCardinality"].get<std::string>());
      if (!c) throw std::runtime_error("bad targetCardinality in relationship " + r.source);
      r.targetCardinality = c;
    }
    r.label = jr.value("label", "");
    model.relationships.push_back(r);
  }

  for (const auto& jm : j.value("stateMachines", ordered_json::array())) {
    StateMachine m;
    m.ownerClass = jm.at("ownerClass").get<std::string>();
    for (const auto& js : jm.value("states", ordered_json::array())) {
      State s;
      s.name = js.at("name").get<std::string>();
      if (js.contains("parent")) s.parent = js["parent"].get<std::string>();
      m.states.push_back(s);
    }
    m.initial = jm.value("initial", "");
    ordered_json ci = jm.value("compositeInitial", ordered_json::object());
    for (const auto& [comp, init] : ci.items())
      m.compositeInitial[comp] = init.get<std::string>();
    for (const auto& jt : jm.value("transitions", ordered_json::array())) {
      Transition t;
      t.from = jt.at("from").get<std::string>();
      t.to = jt.at("to").get<std::string>();
      t.event = jt.value("event", "");
      if (jt.contains("guard")) t.guard = jt["guard"].get<std::string>();
      if (jt.contains("action")) t.action = jt["action"].get<std::string>();
      m.transitions.push_back(t);
    }
    model.stateMachines.push_back(m);
  }

  auto node_kind_from = [](const std::string& s) {
    if (s == "Initial") return ActivityNodeKind::Initial;
    if (s == "Final") return ActivityNodeKind::Final;
    if (s == "Action") return ActivityNodeKind::Action;
    if (s == "Decision") return ActivityNodeKind::Decision;
    if (s == "Merge") return ActivityNodeKind::Merge;
    if (s == "Fork") return ActivityNodeKind::Fork;
    if (s == "Join") return ActivityNodeKind::Join;
    throw std::runtime_error("unknown activity node kind '" + s + "'");
  };
  for (const auto& jf : j.value("activities", ordered_json::array())) {
    ActivityFlow f;
    f.name = jf.value("name", "");
    f.partitions = jf.value("partitions", std::vector<std::string>{});
    for (const auto& jn : jf.value("nodes", ordered_json::array())) {
      ActivityNode n;
      n.id = jn.at("id").get<std::string>();
      n.kind = node_kind_from(jn.at("kind").get<std::string>());
      n.label = jn.value("label", "");
      n.partition = jn.value("partition", "");
      f.nodes.push_back(n);
    }
    for (const auto& je : jf.value("edges", ordered_json::array())) {
      ActivityEdge e;
      e.from = je.at("from").get<std::string>();
      e.to = je.at("to").get<std::string>();
      if (je.contains("guard")) e.guard = je["guard"].get<std::string>();
      f.edges.push_back(e);
    }
    model.activities.push_back(f);
  }

  ValidationReport report = validate_model(model);
  if (!report.ok()) {
    std::string msg = "deserialized model is invalid:";
    for (const auto& i : report.issues) msg += " [" + i.location + "] " + i.message + ";";
    throw std::runtime_error(msg);
  }
  return model;
}

}  // namespace amdd
