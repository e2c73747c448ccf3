#pragma once

#include <algorithm>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "amdd/constraints.hpp"
#include "amdd/ir.hpp"
#include "amdd/model.hpp"
#include "amdd/ontology.hpp"
#include "amdd/types.hpp"

namespace amdd {

enum class Backend { Template, Llm };

struct GenerationConfig {
  std::string dialect = "jade-like";  // opaque target-framework tag
  bool includeOntology = true;
  Backend backend = Backend::Template;
  long long seed = 0;
};

struct PromptBundle {
  std::string structuralSection;
  std::string behavioralSection;
  std::string constraintsSection;
  std::string directives;
  std::string checksum;

  std::string combined() const {
    return directives + "\n" + structuralSection + "\n" + behavioralSection + "\n" +
           constraintsSection;
  }
};

struct SourceUnit {
  std::string filename;
  std::string text;
};

struct GenerationResult {
  std::vector<AgentProgramIR> programs;
  std::vector<SourceUnit> sourceUnits;
  std::string backendLog;
};

// ---------------------------------------------------------------------------
// Prompt assembly
// ---------------------------------------------------------------------------

inline PromptBundle assemble_prompt(const SystemModel& model, const BoundConstraints& bound,
                                    const OntologyRegistry* reg,
                                    const GenerationConfig& cfg) {
  if (model.classes.empty())
    throw std::invalid_argument("assemble_prompt: model declares no agent classes");
  if (cfg.dialect.empty())
    throw std::invalid_argument("assemble_prompt: dialect must be non-empty");
  {
    std::string sig = model.modelName + "/" + model.version;
    for (const auto& c : model.classes) sig += "|" + c.name;
    if (bound.modelChecksum != fnv1a(sig))
      throw std::invalid_argument(
          "assemble_prompt: constraints were bound against a different model");
  }

  PromptBundle bundle;
  {
    std::ostringstream s;
    s << "## Structural layer\n";
    s << "Agent classes:\n";
    for (const auto& c : model.classes) {
      s << "- " << (c.isAbstract ? "abstract " : "") << c.name << "\n";
      for (const auto& a : c.attributes)
        s << "  attribute " << a.name << " : " << to_string(a.type) << "\n";
      for (const auto& m : c.methods) s << "  operation " << m.name << "()\n";
    }
    s << "Relationships:\n";
    for (const auto& r : model.relationships) {
      s << "- " << to_string(r.kind) << " " << r.source << " -> " << r.target;
      if (!r.label.empty()) s << " (" << r.label << ")";
      if (r.targetCardinality) s << " cardinality " << r.targetCardinality->text();
      s << "\n";
    }
    bundle.structuralSection = s.str();
  }
  {
    std::ostringstream s;
    s << "## Behavioral layer\n";
    for (const auto& m : model.stateMachines) {
      s << "State machine of " << m.ownerClass << " (initial " << m.initial << "):\n";
      for (const auto& st : m.states) {
        s << "- state " << st.name;
        if (st.parent) s << " (in " << *st.parent << ")";
        s << "\n";
      }
      for (const auto& t : m.transitions)
        s << "- transition " << t.from << " -> " << t.to << " on " << t.event << "\n";
    }
    for (const auto& f : model.activities) {
      s << "Activity " << f.name << ":\n";
      for (const auto& n : f.nodes) {
        if (n.kind != ActivityNodeKind::Action) continue;
        s << "- action " << n.label << " in " << n.partition << "\n";
      }
    }
    bundle.behavioralSection = s.str();
  }
  {
    std::ostringstream s;
    s << "## Constraints layer\n";
    s << "OCL constraints:\n";
    for (const auto& c : bound.constraints) {
      s << "- " << c.name << " (" << to_string(c.kind) << ") on " << c.context;
      if (c.operationContext) s << "::" << *c.operationContext << "()";
      s << ": " << ocl::render(c.expr) << "\n";
    }
    if (reg && cfg.includeOntology) {
      s << "Ontology schemas:\n";
      for (const auto& c : reg->concepts) {
        s << "- concept " << c.name << " {";
        for (size_t i = 0; i < c.slots.size(); ++i)
          s << (i ? ", " : " ") << c.slots[i].name;
        s << " }\n";
      }
      for (const auto& p : reg->predicates)
        s << "- predicate " << p.name << "\n";
      for (const auto& a : reg->actions)
        s << "- action " << a.name << "\n";
    }
    bundle.constraintsSection = s.str();
  }
  {
    std::ostringstream s;
    s << "You are a code generator for multi-agent systems. Produce one agent class "
         "per concrete class below, targeting a " << cfg.dialect
      << " agent framework. Respect every constraint; reply with one fenced code "
         "block per file, preceded by a '// file:' comment naming it.\n";
    bundle.directives = s.str();
  }
  bundle.checksum = hex64(fnv1a(bundle.combined()));
  return bundle;
}

// ---------------------------------------------------------------------------
// Deterministic template backend
// ---------------------------------------------------------------------------

namespace detail {

// One guarded handler per constrained operation: the guard Branch evaluates
// the operation's pre/postconditions before the body runs.
struct ConstrainedOp {
  std::string operation;
  std::vector<std::string> constraintNames;
};

inline std::vector<ConstrainedOp> constrained_operations(const BoundConstraints& bound,
                                                         const std::string& cls) {
  std::vector<ConstrainedOp> ops;
  for (const auto& c : bound.constraints) {
    if (c.context != cls || !c.operationContext) continue;
    if (c.kind != ConstraintKind::Precondition && c.kind != ConstraintKind::Postcondition)
      continue;
    auto it = std::find_if(ops.begin(), ops.end(), [&](const ConstrainedOp& o) {
      return o.operation == *c.operationContext;
    });
    if (it == ops.end())
      ops.push_back({*c.operationContext, {c.name}});
    else
      it->constraintNames.push_back(c.name);
  }
  return ops;
}

inline BasicBlockGraph straight_line_body(const std::vector<std::string>& statements) {
  BasicBlockGraph g;
  g.blocks.push_back({"entry", BlockKind::Entry, ""});
  std::string prev = "entry";
  int n = 0;
  for (const auto& s : statements) {
    std::string id = "s" + std::to_string(++n);
    g.blocks.push_back({id, BlockKind::Statement, s});
    g.edges.push_back({prev, id, ""});
    prev = id;
  }
  g.blocks.push_back({"exit", BlockKind::Exit, ""});
  g.edges.push_back({prev, "exit", ""});
  return g;
}

// entry -> guard(Branch) -> body -> exit, with an else edge guard -> exit.
inline BasicBlockGraph guarded_body(const std::string& guardLabel,
                                    const std::string& bodyLabel) {
  BasicBlockGraph g;
  g.blocks.push_back({"entry", BlockKind::Entry, ""});
  g.blocks.push_back({"guard", BlockKind::Branch, guardLabel});
  g.blocks.push_back({"body", BlockKind::Statement, bodyLabel});
  g.blocks.push_back({"exit", BlockKind::Exit, ""});
  g.edges.push_back({"entry", "guard", ""});
  g.edges.push_back({"guard", "body", "then"});
  g.edges.push_back({"body", "exit", ""});
  g.edges.push_back({"guard", "exit", "else"});
  return g;
}

}  // namespace detail

// Deterministic reference backend. Per concrete class:
//   - a setup handler initializing the declared attributes,
//   - one guarded handler per operation carrying pre/postconditions,
//   - with ontology: one guarded handler per Receive action of the class
//     (the guard is the incoming message's schema validation).
// Output is a pure function of (model, constraints, registry, config);
// cfg.seed does not influence it.
inline GenerationResult generate_template(const SystemModel& model,
                                          const BoundConstraints& bound,
                                          const OntologyRegistry* reg,
                                          const GenerationConfig& cfg) {
  GenerationResult result;
  std::ostringstream log;
  log << "backend=template dialect=" << cfg.dialect
      << " ontology=" << (reg && cfg.includeOntology ? "on" : "off") << "\n";

  std::vector<const AgentClass*> concrete;
  for (const auto& c : model.classes)
    if (!c.isAbstract) concrete.push_back(&c);
  std::sort(concrete.begin(), concrete.end(),
            [](const AgentClass* a, const AgentClass* b) { return a->name < b->name; });

  for (const AgentClass* cls : concrete) {
    AgentProgramIR program;
    program.agentName = cls->name;
    program.attributes = cls->attributes;

    {
      std::vector<std::string> inits;
      for (const auto& a : cls->attributes) inits.push_back("init " + a.name);
      if (inits.empty()) inits.push_back("register with platform");
      Handler setup;
      setup.triggerAction = "setup";
      setup.body = detail::straight_line_body(inits);
      program.handlers.push_back(setup);
    }

    for (const auto& op : detail::constrained_operations(bound, cls->name)) {
      Handler h;
      h.triggerAction = op.operation;
      std::string guardLabel;
      for (size_t i = 0; i < op.constraintNames.size(); ++i)
        guardLabel += (i ? " and " : "") + op.constraintNames[i];
      h.body = detail::guarded_body(guardLabel, "perform " + op.operation);
      program.handlers.push_back(h);
      for (const auto& name : op.constraintNames)
        program.guards.push_back({name, op.operation + "/guard"});
    }

    if (reg && cfg.includeOntology) {
      for (const auto& action : reg->actions) {
        if (action.direction != ActionDirection::Receive || action.actor != cls->name)
          continue;
        Handler h;
        h.triggerAction = action.name;
        h.body = detail::guarded_body("validate " + action.payload,
                                      "handle " + action.payload);
        program.handlers.push_back(h);
      }
    }

    log << "generated " << program.agentName << ": " << program.handlers.size()
        << " handlers\n";
    result.programs.push_back(std::move(program));
  }

  result.backendLog = log.str();
  return result;
}

}  // namespace amdd
