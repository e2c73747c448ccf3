#pragma once

#include <algorithm>
#include <deque>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "amdd/constraints.hpp"
#include "amdd/model.hpp"
#include "amdd/ontology.hpp"
#include "amdd/types.hpp"

namespace amdd {

// Deterministic multi-agent runtime for the fleet mission protocol:
// MissionBrief -> DiscoverUVs -> UVList -> FleetPlan -> UVTask* ->
// UVPerformance* -> FleetPerformance -> MissionPerformance.

enum class Performative { Inform, Request };

inline const char* to_string(Performative p) {
  return p == Performative::Inform ? "Inform" : "Request";
}

struct AclMessage {
  Performative performative = Performative::Inform;
  std::string sender;    // instance id
  std::string receiver;  // instance id
  std::string conversationId;
  ContentInstance content;
  long long logicalTime = 0;
};

struct SimConfig {
  int uvCount = 0;
  std::vector<bool> availability;       // per UV
  std::vector<bool> registration;       // per UV
  std::vector<bool> initialControlled;  // fault injection: UV starts Controlled
  long long seed = 0;
  std::string scoreModel = "linear";
  double successThreshold = 50.0;
};

struct MessageTrace {
  std::vector<AclMessage> messages;
  std::map<std::string, std::string> finalStates;  // instanceId -> state
  std::vector<std::string> assertionLog;
  std::map<std::string, std::string> roles;  // instanceId -> class name
  bool aborted = false;
};

class SimConstraintViolation : public std::runtime_error {
 public:
  SimConstraintViolation(std::string msg, MessageTrace trace, std::vector<Violation> vs)
      : std::runtime_error(std::move(msg)),
        trace(std::move(trace)),
        violations(std::move(vs)) {}
  MessageTrace trace;
  std::vector<Violation> violations;
};

// ---------------------------------------------------------------------------
// World
// ---------------------------------------------------------------------------

struct SimWorld {
  SimConfig cfg;
  const SystemModel* model = nullptr;
  const BoundConstraints* bound = nullptr;
  const OntologyRegistry* reg = nullptr;

  ObjectSnapshot agents;
  std::deque<AclMessage> inbox;  // FIFO delivery queue
  MessageTrace trace;
  bool bootPending = true;
  bool done = false;

  // mission bookkeeping
  std::vector<int> selected;                 // UV indices in the fleet plan
  std::map<std::string, double> collected;   // uvId -> score

  ObjectInstance* find_agent(const std::string& id) {
    for (auto& a : agents.instances)
      if (a.instanceId == id) return &a;
    return nullptr;
  }
};

namespace sim_detail {

inline std::string uv_instance_id(int index) { return "UV" + std::to_string(index + 1); }

inline double score_of(const SimConfig& cfg, int uvIndex) {
  // Deterministic and always inside the 0..100 value bound.
  long long raw = (cfg.seed + 7ll * uvIndex) % 51;
  if (raw < 0) raw += 51;
  return 50.0 + static_cast<double>(raw);
}

inline std::string qualified_state(const BoundConstraints& bound, const std::string& cls,
                                   const std::string& leaf) {
  auto clsIt = bound.stateParents.find(cls);
  if (clsIt != bound.stateParents.end()) {
    auto it = clsIt->second.find(leaf);
    if (it != clsIt->second.end() && !it->second.empty()) return it->second + "." + leaf;
  }
  return leaf;
}

inline void finalize_states(SimWorld& w);

inline std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) out += (i ? "," : "") + parts[i];
  return out;
}

inline void send(SimWorld& w, Performative perf, const std::string& from,
                 const std::string& to, ContentInstance content) {
  if (w.reg) {
    auto violations = validate_content(*w.reg, content);
    if (!violations.empty()) {
      std::string detail;
      for (const auto& v : violations)
        detail += std::string(" ") + to_string(v.kind) + ":" + v.slot;
      w.trace.assertionLog.push_back("content " + content.conceptName + " " + from +
                                     "->" + to + ": INVALID" + detail);
      throw std::logic_error("simulator produced invalid content for " +
                             content.conceptName + ":" + detail);
    }
    w.trace.assertionLog.push_back("content " + content.conceptName + " " + from + "->" +
                                   to + ": ok");
  }
  AclMessage m;
  m.performative = perf;
  m.sender = from;
  m.receiver = to;
  m.conversationId = "m1";
  m.content = std::move(content);
  m.logicalTime = static_cast<long long>(w.trace.messages.size()) + 1;
  w.trace.messages.push_back(m);
  w.inbox.push_back(m);
}

// Runs the pre/post checks of `operation` around a UV state change.
inline void guarded_transition(SimWorld& w, const std::string& uvId,
                               const std::string& operation, const std::string& toLeaf) {
  ObjectInstance* uv = w.find_agent(uvId);
  TransitionRecord rec;
  rec.instanceId = uvId;
  rec.operation = operation;
  rec.preSnapshot.instances.push_back(*uv);
  ObjectInstance post = *uv;
  post.currentState = toLeaf;
  rec.postSnapshot.instances.push_back(post);

  auto violations = check_transition(*w.bound, rec);
  if (!violations.empty()) {
    for (const auto& v : violations)
      w.trace.assertionLog.push_back("transition " + operation + " on " + uvId +
                                     ": VIOLATION " + v.constraintName + " (" +
                                     v.renderedExpr + "; " + v.actualValues + ")");
    finalize_states(w);
    throw SimConstraintViolation("constraint violation during " + operation + " on " +
                                     uvId,
                                 w.trace, violations);
  }
  w.trace.assertionLog.push_back("transition " + operation + " on " + uvId + ": ok");
  uv->currentState = toLeaf;
}

inline void finalize_states(SimWorld& w) {
  for (const auto& a : w.agents.instances) {
    std::string state = a.currentState;
    if (!state.empty() && w.bound)
      state = qualified_state(*w.bound, a.className, state);
    w.trace.finalStates[a.instanceId] = state;
  }
}

}  // namespace sim_detail

// ---------------------------------------------------------------------------
// World construction and stepping
// ---------------------------------------------------------------------------

inline SimWorld init_world(const SimConfig& cfg, const SystemModel& model,
                           const BoundConstraints& bound, const OntologyRegistry& reg) {
  if (static_cast<int>(cfg.availability.size()) != cfg.uvCount ||
      static_cast<int>(cfg.registration.size()) != cfg.uvCount)
    throw std::invalid_argument("availability/registration masks must have uvCount entries");
  if (!cfg.initialControlled.empty() &&
      static_cast<int>(cfg.initialControlled.size()) != cfg.uvCount)
    throw std::invalid_argument("initialControlled mask must have uvCount entries");
  for (const char* role : {"Operator", "MCC", "UVFManager", "UV"})
    if (!model.find_class(role))
      throw std::invalid_argument(std::string("model lacks required class ") + role);
  if (!model.machine_for("UV"))
    throw std::invalid_argument("model lacks the UV state machine");
  for (const char* c : {"MissionBrief", "DiscoverUVs", "UVList", "FleetPlan", "UVTask",
                        "UVPerformance", "FleetPerformance", "MissionPerformance"})
    if (!reg.find_concept(c))
      throw std::invalid_argument(std::string("ontology lacks required concept ") + c);

  SimWorld w;
  w.cfg = cfg;
  w.model = &model;
  w.bound = &bound;
  w.reg = &reg;

  auto add = [&](const std::string& cls, const std::string& id,
                 std::map<std::string, Value> attrs, const std::string& state) {
    ObjectInstance inst;
    inst.className = cls;
    inst.instanceId = id;
    inst.attributes = std::move(attrs);
    inst.currentState = state;
    w.agents.instances.push_back(inst);
    w.trace.roles[id] = cls;
  };

  add("Operator", "Operator", {{"operatorId", std::string("op1")}, {"busy", false}}, "");
  add("MCC", "MCC", {{"mccId", std::string("mcc1")}, {"busy", false}}, "");
  add("UVFManager", "UVFManager",
      {{"managerId", std::string("mgr1")}, {"busy", false}}, "");

  for (int i = 0; i < cfg.uvCount; ++i) {
    bool available = cfg.availability[i];
    bool registered = cfg.registration[i];
    bool controlled = !cfg.initialControlled.empty() && cfg.initialControlled[i];
    std::string state = !available ? "Unavailable"
                        : registered ? (controlled ? "Controlled" : "Uncontrolled")
                                     : "Available";
    add("UV", sim_detail::uv_instance_id(i),
        {{"uvId", "uv" + std::to_string(i + 1)}, {"performanceScore", 0.0}}, state);
  }

  // Fleet links for the manages-cardinality constraint.
  ObjectInstance* manager = w.find_agent("UVFManager");
  for (int i = 0; i < cfg.uvCount; ++i)
    if (cfg.registration[i])
      manager->links.push_back({"manages", sim_detail::uv_instance_id(i)});
  return w;
}

// Delivers at most one message (or performs the initial operator action).
// Returns false at fixpoint.
inline bool step(SimWorld& w) {
  using namespace sim_detail;
  if (w.bootPending) {
    w.bootPending = false;
    ContentInstance brief;
    brief.conceptName = "MissionBrief";
    brief.slots = {{"missionId", std::string("m1")}, {"status", std::string("pending")}};
    send(w, Performative::Inform, "Operator", "MCC", brief);
    return true;
  }
  if (w.inbox.empty()) return false;
  AclMessage m = w.inbox.front();
  w.inbox.pop_front();
  const std::string& concept_ = m.content.conceptName;

  if (m.receiver == "MCC" && concept_ == "MissionBrief") {
    ContentInstance discover;
    discover.conceptName = "DiscoverUVs";
    discover.slots = {{"requestId", std::string("r1")}};
    send(w, Performative::Request, "MCC", "UVFManager", discover);
    return true;
  }
  if (m.receiver == "UVFManager" && concept_ == "DiscoverUVs") {
    std::vector<std::string> ids;
    for (int i = 0; i < w.cfg.uvCount; ++i)
      if (w.cfg.availability[i] && w.cfg.registration[i]) {
        w.selected.push_back(i);
        ids.push_back("uv" + std::to_string(i + 1));
      }
    ContentInstance list;
    list.conceptName = "UVList";
    list.slots = {{"requestId", std::string("r1")}, {"uvIds", join(ids)}};
    send(w, Performative::Inform, "UVFManager", "MCC", list);
    return true;
  }
  if (m.receiver == "MCC" && concept_ == "UVList") {
    std::string ids = value_to_string(m.content.slots.at("uvIds"));
    if (ids.empty()) {
      w.trace.aborted = true;
      ContentInstance report;
      report.conceptName = "MissionPerformance";
      report.slots = {{"missionId", std::string("m1")},
                      {"outcome", std::string("aborted:no-available-uv")},
                      {"meanScore", 0.0}};
      send(w, Performative::Inform, "MCC", "Operator", report);
      return true;
    }
    ContentInstance plan;
    plan.conceptName = "FleetPlan";
    plan.slots = {{"planId", std::string("p1")}, {"missionId", std::string("m1")},
                  {"uvIds", ids}};
    send(w, Performative::Inform, "MCC", "UVFManager", plan);
    return true;
  }
  if (m.receiver == "UVFManager" && concept_ == "FleetPlan") {
    for (int idx : w.selected) {
      ContentInstance task;
      task.conceptName = "UVTask";
      task.slots = {{"taskId", "t" + std::to_string(idx + 1)},
                    {"uvId", "uv" + std::to_string(idx + 1)},
                    {"description", std::string("execute mission segment")}};
      send(w, Performative::Inform, "UVFManager", uv_instance_id(idx), task);
    }
    return true;
  }
  if (m.receiver.rfind("UV", 0) == 0 && m.receiver != "UVFManager" &&
      concept_ == "UVTask") {
    int idx = std::stoi(m.receiver.substr(2)) - 1;
    guarded_transition(w, m.receiver, "assignTask", "Controlled");
    double score = score_of(w.cfg, idx);
    w.find_agent(m.receiver)->attributes["performanceScore"] = score;
    guarded_transition(w, m.receiver, "completeTask", "Uncontrolled");
    ContentInstance perf;
    perf.conceptName = "UVPerformance";
    perf.slots = {{"uvId", "uv" + std::to_string(idx + 1)}, {"score", score}};
    send(w, Performative::Inform, m.receiver, "UVFManager", perf);
    return true;
  }
  if (m.receiver == "UVFManager" && concept_ == "UVPerformance") {
    w.collected[value_to_string(m.content.slots.at("uvId"))] =
        ocl::as_double(m.content.slots.at("score"));
    if (w.collected.size() < w.selected.size()) return true;
    double sum = 0;
    for (const auto& [_, s] : w.collected) sum += s;
    double mean = sum / static_cast<double>(w.collected.size());
    ContentInstance fleet;
    fleet.conceptName = "FleetPerformance";
    fleet.slots = {{"missionId", std::string("m1")}, {"meanScore", mean}};
    send(w, Performative::Inform, "UVFManager", "MCC", fleet);
    return true;
  }
  if (m.receiver == "MCC" && concept_ == "FleetPerformance") {
    double mean = ocl::as_double(m.content.slots.at("meanScore"));
    ContentInstance report;
    report.conceptName = "MissionPerformance";
    report.slots = {{"missionId", std::string("m1")},
                    {"outcome", std::string(mean >= w.cfg.successThreshold ? "success"
                                                                           : "failure")},
                    {"meanScore", mean}};
    send(w, Performative::Inform, "MCC", "Operator", report);
    return true;
  }
  if (m.receiver == "Operator" && concept_ == "MissionPerformance") {
    w.done = true;
    return true;
  }
  throw std::logic_error("no handler for " + concept_ + " at " + m.receiver);
}

inline MessageTrace run_mission(const SimConfig& cfg, const SystemModel& model,
                                const BoundConstraints& bound,
                                const OntologyRegistry& reg) {
  SimWorld w = init_world(cfg, model, bound, reg);
  while (step(w)) {
  }
  sim_detail::finalize_states(w);
  return w.trace;
}

// ---------------------------------------------------------------------------
// Trace persistence (JSON lines + footer)
// ---------------------------------------------------------------------------

namespace sim_detail {

inline nlohmann::ordered_json value_to_json(const Value& v) {
  if (std::holds_alternative<bool>(v)) return std::get<bool>(v);
  if (std::holds_alternative<std::int64_t>(v)) return std::get<std::int64_t>(v);
  if (std::holds_alternative<double>(v)) return std::get<double>(v);
  if (std::holds_alternative<std::string>(v)) return std::get<std::string>(v);
  return nullptr;
}

inline Value value_from_json(const nlohmann::ordered_json& j) {
  if (j.is_boolean()) return j.get<bool>();
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_number_float()) return j.get<double>();
  if (j.is_string()) return j.get<std::string>();
  return {};
}

}  // namespace sim_detail

inline std::string write_trace(const MessageTrace& trace) {
  std::ostringstream out;
  for (const auto& m : trace.messages) {
    nlohmann::ordered_json j;
    j["t"] = m.logicalTime;
    j["performative"] = to_string(m.performative);
    j["from"] = m.sender;
    j["to"] = m.receiver;
    j["concept"] = m.content.conceptName;
    nlohmann::ordered_json slots;
    for (const auto& [k, v] : m.content.slots) slots[k] = sim_detail::value_to_json(v);
    j["slots"] = slots;
    out << j.dump() << "\n";
  }
  nlohmann::ordered_json footer;
  nlohmann::ordered_json finals;
  for (const auto& [k, v] : trace.finalStates) finals[k] = v;
  footer["finalStates"] = finals;
  footer["assertionLog"] = trace.assertionLog;
  nlohmann::ordered_json roles;
  for (const auto& [k, v] : trace.roles) roles[k] = v;
  footer["roles"] = roles;
  footer["aborted"] = trace.aborted;
  out << footer.dump() << "\n";
  return out.str();
}

inline MessageTrace read_trace(const std::string& text) {
  MessageTrace trace;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    nlohmann::ordered_json j;
    try {
      j = nlohmann::ordered_json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("trace line: ") + e.what(), number, 1);
    }
    if (j.contains("t")) {
      AclMessage m;
      m.logicalTime = j.at("t").get<long long>();
      m.performative = j.value("performative", "Inform") == "Request"
                           ? Performative::Request
                           : Performative::Inform;
      m.sender = j.at("from").get<std::string>();
      m.receiver = j.at("to").get<std::string>();
      m.content.conceptName = j.at("concept").get<std::string>();
      nlohmann::ordered_json slots = j.value("slots", nlohmann::ordered_json::object());
      for (const auto& [k, v] : slots.items())
        m.content.slots[k] = sim_detail::value_from_json(v);
      trace.messages.push_back(m);
    } else {
      nlohmann::ordered_json finals =
          j.value("finalStates", nlohmann::ordered_json::object());
      for (const auto& [k, v] : finals.items())
        trace.finalStates[k] = v.get<std::string>();
      trace.assertionLog = j.value("assertionLog", std::vector<std::string>{});
      nlohmann::ordered_json roles = j.value("roles", nlohmann::ordered_json::object());
      for (const auto& [k, v] : roles.items())
        trace.roles[k] = v.get<std::string>();
      trace.aborted = j.value("aborted", false);
    }
  }
  return trace;
}

// ---------------------------------------------------------------------------
// Sequence diagram rendering
// ---------------------------------------------------------------------------

inline std::string render_sequence_diagram(const MessageTrace& trace) {
  std::ostringstream out;
  out << "@startuml\n";
  std::vector<std::string> lifelines;
  auto touch = [&](const std::string& id) {
    if (std::find(lifelines.begin(), lifelines.end(), id) == lifelines.end())
      lifelines.push_back(id);
  };
  for (const auto& m : trace.messages) {
    touch(m.sender);
    touch(m.receiver);
  }
  for (const auto& l : lifelines) out << "participant " << l << "\n";
  for (const auto& m : trace.messages) {
    out << m.sender << " -> " << m.receiver << " : " << m.content.conceptName << "(";
    bool first = true;
    for (const auto& [k, v] : m.content.slots) {
      out << (first ? "" : ", ") << k << "=" << value_to_string(v);
      first = false;
    }
    out << ")\n";
  }
  out << "@enduml\n";
  return out.str();
}

}  // namespace amdd
