#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "amdd/model.hpp"
#include "amdd/types.hpp"

namespace amdd {

// Language-agnostic generated agent program: the analyzable stand-in for
// generated source.

enum class BlockKind { Entry, Exit, Statement, Branch };

inline const char* to_string(BlockKind k) {
  switch (k) {
    case BlockKind::Entry: return "Entry";
    case BlockKind::Exit: return "Exit";
    case BlockKind::Statement: return "Statement";
    case BlockKind::Branch: return "Branch";
  }
  return "?";
}

inline std::optional<BlockKind> block_kind_from(const std::string& s) {
  if (s == "Entry") return BlockKind::Entry;
  if (s == "Exit") return BlockKind::Exit;
  if (s == "Statement") return BlockKind::Statement;
  if (s == "Branch") return BlockKind::Branch;
  return std::nullopt;
}

struct BasicBlock {
  std::string id;
  BlockKind kind = BlockKind::Statement;
  std::string label;
};

struct BlockEdge {
  std::string from;
  std::string to;
  std::string branchLabel;  // "then"/"else" on Branch out-edges
};

struct BasicBlockGraph {
  std::vector<BasicBlock> blocks;
  std::vector<BlockEdge> edges;

  const BasicBlock* find(const std::string& id) const {
    for (const auto& b : blocks)
      if (b.id == id) return &b;
    return nullptr;
  }
  const BasicBlock* entry() const {
    for (const auto& b : blocks)
      if (b.kind == BlockKind::Entry) return &b;
    return nullptr;
  }
  const BasicBlock* exit() const {
    for (const auto& b : blocks)
      if (b.kind == BlockKind::Exit) return &b;
    return nullptr;
  }
  size_t branch_count() const {
    size_t n = 0;
    for (const auto& b : blocks)
      if (b.kind == BlockKind::Branch) ++n;
    return n;
  }
};

struct GuardAttachment {
  std::string constraintName;
  std::string attachmentPoint;  // handler trigger + block id
};

struct Handler {
  std::string triggerAction;  // ontology action name or lifecycle event
  BasicBlockGraph body;
};

struct AgentProgramIR {
  std::string agentName;
  std::vector<Attribute> attributes;
  std::vector<Handler> handlers;
  std::vector<GuardAttachment> guards;
};

// ---------------------------------------------------------------------------
// JSON persistence (artifact files written by the template backend)
// ---------------------------------------------------------------------------

inline nlohmann::ordered_json program_to_json(const AgentProgramIR& p) {
  nlohmann::ordered_json j;
  j["agentName"] = p.agentName;
  auto attrs = nlohmann::ordered_json::array();
  for (const auto& a : p.attributes)
    attrs.push_back({{"name", a.name}, {"type", to_string(a.type)}});
  j["attributes"] = attrs;
  auto handlers = nlohmann::ordered_json::array();
  for (const auto& h : p.handlers) {
    nlohmann::ordered_json jh;
    jh["triggerAction"] = h.triggerAction;
    auto blocks = nlohmann::ordered_json::array();
    for (const auto& b : h.body.blocks)
      blocks.push_back({{"id", b.id}, {"kind", to_string(b.kind)}, {"label", b.label}});
    jh["blocks"] = blocks;
    auto edges = nlohmann::ordered_json::array();
    for (const auto& e : h.body.edges) {
      nlohmann::ordered_json je = {{"from", e.from}, {"to", e.to}};
      if (!e.branchLabel.empty()) je["branch"] = e.branchLabel;
      edges.push_back(je);
    }
    jh["edges"] = edges;
    handlers.push_back(jh);
  }
  j["handlers"] = handlers;
  auto guards = nlohmann::ordered_json::array();
  for (const auto& g : p.guards)
    guards.push_back({{"constraint", g.constraintName}, {"at", g.attachmentPoint}});
  j["guards"] = guards;
  return j;
}

inline AgentProgramIR program_from_json(const nlohmann::ordered_json& j) {
  AgentProgramIR p;
  p.agentName = j.at("agentName").get<std::string>();
  for (const auto& ja : j.value("attributes", nlohmann::ordered_json::array())) {
    Attribute a;
    a.name = ja.at("name").get<std::string>();
    auto t = semantic_type_from(ja.at("type").get<std::string>());
    if (!t) throw std::runtime_error("bad attribute type in program IR");
    a.type = *t;
    p.attributes.push_back(a);
  }
  for (const auto& jh : j.value("handlers", nlohmann::ordered_json::array())) {
    Handler h;
    h.triggerAction = jh.at("triggerAction").get<std::string>();
    for (const auto& jb : jh.value("blocks", nlohmann::ordered_json::array())) {
      BasicBlock b;
      b.id = jb.at("id").get<std::string>();
      auto k = block_kind_from(jb.at("kind").get<std::string>());
      if (!k) throw std::runtime_error("bad block kind in program IR");
      b.kind = *k;
      b.label = jb.value("label", "");
      h.body.blocks.push_back(b);
    }
    for (const auto& je : jh.value("edges", nlohmann::ordered_json::array()))
      h.body.edges.push_back({je.at("from").get<std::string>(),
                              je.at("to").get<std::string>(), je.value("branch", "")});
    p.handlers.push_back(h);
  }
  for (const auto& jg : j.value("guards", nlohmann::ordered_json::array()))
    p.guards.push_back({jg.at("constraint").get<std::string>(),
                        jg.at("at").get<std::string>()});
  return p;
}

}  // namespace amdd
