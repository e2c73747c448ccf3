#pragma once

#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "amdd/constraints.hpp"
#include "amdd/model.hpp"
#include "amdd/ontology.hpp"
#include "amdd/plantuml.hpp"
#include "amdd/types.hpp"

namespace testutil {

inline std::string read_fixture(const std::string& name) {
  std::string path = std::string(FIXTURES_DIR) + "/" + name;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("missing fixture: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline amdd::SystemModel load_uvf_model() {
  amdd::SystemModel model;
  model.modelName = "uvf";
  model.version = "1.0";
  {
    amdd::DiagramSource src{amdd::DiagramKind::Class, read_fixture("uvf_classes.puml"),
                            "uvf_classes.puml"};
    auto [classes, relationships] = amdd::parse_class_diagram(src);
    model.classes = classes;
    model.relationships = relationships;
  }
  {
    amdd::DiagramSource src{amdd::DiagramKind::State, read_fixture("uv_state.puml"),
                            "uv_state.puml"};
    model.stateMachines.push_back(amdd::parse_state_diagram(src));
  }
  {
    amdd::DiagramSource src{amdd::DiagramKind::Activity,
                            read_fixture("uvf_activity.puml"), "uvf_activity.puml"};
    model.activities.push_back(amdd::parse_activity_diagram(src, "mission"));
  }
  return model;
}

inline amdd::BoundConstraints load_uvf_bound(const amdd::SystemModel& model) {
  return amdd::bind(amdd::parse_constraints(read_fixture("uvf.ocl")), model);
}

inline amdd::OntologyRegistry load_uvf_registry() {
  return amdd::parse_ontology(read_fixture("uvf.onto"));
}

// Random small-but-valid model for round-trip property tests.
inline amdd::SystemModel random_model(std::mt19937& rng) {
  using namespace amdd;
  std::uniform_int_distribution<int> d09(0, 9);
  auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };

  SystemModel m;
  m.modelName = "gen" + std::to_string(d09(rng));
  m.version = "1." + std::to_string(d09(rng));

  int classCount = 1 + pick(5);
  static const SemanticType kTypes[] = {SemanticType::Id, SemanticType::String,
                                        SemanticType::Integer, SemanticType::Real,
                                        SemanticType::Boolean};
  for (int c = 0; c < classCount; ++c) {
    AgentClass cls;
    cls.name = "C" + std::to_string(c);
    cls.displayLabel = cls.name;
    cls.isAbstract = pick(4) == 0;
    int attrs = pick(4);
    for (int a = 0; a < attrs; ++a) {
      Attribute attr;
      attr.name = "a" + std::to_string(a);
      attr.type = kTypes[pick(5)];
      cls.attributes.push_back(attr);
    }
    int methods = pick(3);
    for (int i = 0; i < methods; ++i) {
      Method method;
      method.name = "op" + std::to_string(i);
      int params = pick(3);
      for (int p = 0; p < params; ++p)
        method.parameters.push_back({"p" + std::to_string(p), kTypes[pick(5)]});
      if (pick(2)) method.returnType = kTypes[pick(5)];
      cls.methods.push_back(method);
    }
    m.classes.push_back(cls);
  }

  int rels = pick(4);
  for (int r = 0; r < rels; ++r) {
    Relationship rel;
    int kind = pick(4);
    rel.kind = static_cast<RelationshipKind>(kind);
    rel.source = "C" + std::to_string(pick(classCount));
    rel.target = "C" + std::to_string(pick(classCount));
    if (rel.kind != RelationshipKind::Inheritance) {
      if (pick(2)) rel.targetCardinality = Cardinality::at_least(1);
      if (pick(3) == 0) rel.sourceCardinality = Cardinality::exactly(1);
      if (pick(2)) rel.label = "link" + std::to_string(r);
    }
    m.relationships.push_back(rel);
  }

  // One flat state machine on class C0.
  if (pick(2)) {
    StateMachine sm;
    sm.ownerClass = "C0";
    int states = 2 + pick(3);
    for (int s = 0; s < states; ++s) sm.states.push_back({"S" + std::to_string(s), {}});
    sm.initial = "S0";
    for (int s = 0; s + 1 < states; ++s) {
      Transition t;
      t.from = "S" + std::to_string(s);
      t.to = "S" + std::to_string(s + 1);
      t.event = "e" + std::to_string(s);
      if (pick(2)) t.guard = "g" + std::to_string(s);
      if (pick(2)) t.action = "act" + std::to_string(s);
      sm.transitions.push_back(t);
    }
    m.stateMachines.push_back(sm);
  }
  return m;
}

// Random structured activity-diagram text whose constructs match the parser's
// accepted grammar (seq / if / fork), for parse-render round trips.
inline std::string random_activity_text(std::mt19937& rng, int classCount) {
  std::uniform_int_distribution<int> coin(0, 1);
  auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
  std::ostringstream out;
  int actions = 0;
  auto lane = [&]() { return "C" + std::to_string(pick(classCount)); };

  std::function<void(int)> emit_block = [&](int depth) {
    int items = 1 + pick(2);
    for (int i = 0; i < items; ++i) {
      int choice = depth >= 2 ? 0 : pick(4);
      if (choice <= 1) {
        out << "|" << lane() << "|\n";
        out << ":act" << actions++ << ";\n";
      } else if (choice == 2) {
        out << "if (cond" << actions << ") then (yes)\n";
        emit_block(depth + 1);
        out << "else (no)\n";
        emit_block(depth + 1);
        out << "endif\n";
      } else {
        out << "fork\n";
        emit_block(depth + 1);
        out << "fork again\n";
        emit_block(depth + 1);
        out << "end fork\n";
      }
    }
  };

  out << "@startuml\n|" << lane() << "|\nstart\n";
  emit_block(0);
  out << "|" << lane() << "|\n:final;\nstop\n@enduml\n";
  return out.str();
}

}  // namespace testutil
