#include <catch2/catch_amalgamated.hpp>

#include "amdd/sim.hpp"
#include "helpers.hpp"

using namespace amdd;

namespace {

struct Fixture {
  SystemModel model = testutil::load_uvf_model();
  BoundConstraints bound = testutil::load_uvf_bound(model);
  OntologyRegistry reg = testutil::load_uvf_registry();
};

SimConfig make_cfg(int k, long long seed = 42) {
  SimConfig c;
  c.uvCount = k;
  c.availability.assign(k, true);
  c.registration.assign(k, true);
  c.seed = seed;
  return c;
}

const AclMessage* find_message(const MessageTrace& t, const std::string& conceptName) {
  for (const auto& m : t.messages)
    if (m.content.conceptName == conceptName) return &m;
  return nullptr;
}

}  // namespace

TEST_CASE("mission exchanges 6 + 2k messages") {
  Fixture f;
  for (int k : {1, 2, 5}) {
    MessageTrace t = run_mission(make_cfg(k), f.model, f.bound, f.reg);
    INFO("uvCount=" << k);
    CHECK(t.messages.size() == static_cast<size_t>(6 + 2 * k));
    CHECK_FALSE(t.aborted);

    // Opening and closing of the conversation.
    CHECK(t.messages.front().content.conceptName == "MissionBrief");
    CHECK(t.messages.front().sender == "Operator");
    CHECK(t.messages.front().receiver == "MCC");
    CHECK(t.messages.back().content.conceptName == "MissionPerformance");
    CHECK(t.messages.back().receiver == "Operator");

    // DiscoverUVs is the only Request.
    int requests = 0;
    for (const auto& m : t.messages)
      if (m.performative == Performative::Request) {
        ++requests;
        CHECK(m.content.conceptName == "DiscoverUVs");
      }
    CHECK(requests == 1);

    // Logical times are the contiguous sequence 1..n.
    for (size_t i = 0; i < t.messages.size(); ++i)
      CHECK(t.messages[i].logicalTime == static_cast<long long>(i + 1));
  }
}

TEST_CASE("tasks precede their performance reports per UV") {
  Fixture f;
  MessageTrace t = run_mission(make_cfg(3), f.model, f.bound, f.reg);
  std::map<std::string, long long> taskAt, perfAt;
  for (const auto& m : t.messages) {
    if (m.content.conceptName == "UVTask")
      taskAt[value_to_string(m.content.slots.at("uvId"))] = m.logicalTime;
    if (m.content.conceptName == "UVPerformance")
      perfAt[value_to_string(m.content.slots.at("uvId"))] = m.logicalTime;
  }
  REQUIRE(taskAt.size() == 3);
  REQUIRE(perfAt.size() == 3);
  for (const auto& [uv, at] : taskAt) CHECK(at < perfAt.at(uv));

  const AclMessage* fleet = find_message(t, "FleetPerformance");
  REQUIRE(fleet);
  for (const auto& [uv, at] : perfAt) CHECK(at < fleet->logicalTime);
}

TEST_CASE("zero eligible UVs aborts after four messages") {
  Fixture f;

  SECTION("no UVs at all") {
    MessageTrace t = run_mission(make_cfg(0), f.model, f.bound, f.reg);
    REQUIRE(t.messages.size() == 4);
    CHECK(t.aborted);
    CHECK(t.messages[3].content.conceptName == "MissionPerformance");
    CHECK(value_to_string(t.messages[3].content.slots.at("outcome")) ==
          "aborted:no-available-uv");
  }
  SECTION("UVs exist but none is eligible") {
    SimConfig cfg = make_cfg(2);
    cfg.availability = {false, true};
    cfg.registration = {true, false};
    MessageTrace t = run_mission(cfg, f.model, f.bound, f.reg);
    CHECK(t.messages.size() == 4);
    CHECK(t.aborted);
  }
}

TEST_CASE("availability and registration masks select the fleet") {
  Fixture f;
  SimConfig cfg = make_cfg(3);
  cfg.availability = {true, false, true};
  MessageTrace t = run_mission(cfg, f.model, f.bound, f.reg);
  CHECK(t.messages.size() == static_cast<size_t>(6 + 2 * 2));

  const AclMessage* list = find_message(t, "UVList");
  REQUIRE(list);
  CHECK(value_to_string(list->content.slots.at("uvIds")) == "uv1,uv3");

  CHECK(t.finalStates.at("UV1") == "Registered.Uncontrolled");
  CHECK(t.finalStates.at("UV2") == "Unavailable");
  CHECK(t.finalStates.at("UV3") == "Registered.Uncontrolled");
}

TEST_CASE("mean score and outcome follow the score model") {
  Fixture f;
  SimConfig cfg = make_cfg(2, 42);
  MessageTrace t = run_mission(cfg, f.model, f.bound, f.reg);

  // score(i) = 50 + ((seed + 7 i) mod 51): 92 and 99 for seed 42.
  const AclMessage* fleet = find_message(t, "FleetPerformance");
  REQUIRE(fleet);
  CHECK(ocl::as_double(fleet->content.slots.at("meanScore")) ==
        Catch::Approx(95.5));
  CHECK(value_to_string(t.messages.back().content.slots.at("outcome")) == "success");

  SECTION("unreachable threshold turns the outcome into failure") {
    cfg.successThreshold = 1000.0;
    MessageTrace hard = run_mission(cfg, f.model, f.bound, f.reg);
    CHECK(value_to_string(hard.messages.back().content.slots.at("outcome")) == "failure");
  }
}

TEST_CASE("every exchange is content-checked and every transition guarded") {
  Fixture f;
  int k = 2;
  MessageTrace t = run_mission(make_cfg(k), f.model, f.bound, f.reg);
  size_t contentOk = 0, transitionOk = 0;
  for (const auto& line : t.assertionLog) {
    if (line.rfind("content ", 0) == 0) {
      CHECK_THAT(line, Catch::Matchers::EndsWith(": ok"));
      ++contentOk;
    }
    if (line.rfind("transition ", 0) == 0) {
      CHECK_THAT(line, Catch::Matchers::EndsWith(": ok"));
      ++transitionOk;
    }
  }
  CHECK(contentOk == t.messages.size());
  CHECK(transitionOk == static_cast<size_t>(2 * k));  // assignTask + completeTask per UV
}

TEST_CASE("a UV that starts Controlled trips exactly the precondition") {
  Fixture f;
  SimConfig cfg = make_cfg(1);
  cfg.initialControlled = {true};
  try {
    run_mission(cfg, f.model, f.bound, f.reg);
    FAIL("expected SimConstraintViolation");
  } catch (const SimConstraintViolation& e) {
    REQUIRE(e.violations.size() == 1);
    CHECK(e.violations[0].constraintName == "uvIdle");
    CHECK(e.violations[0].instanceId == "UV1");
    // The partial trace is preserved with final states filled in.
    CHECK(e.trace.messages.size() == 5);  // ... FleetPlan, UVTask delivered
    CHECK(e.trace.finalStates.at("UV1") == "Registered.Controlled");
    bool logged = false;
    for (const auto& line : e.trace.assertionLog)
      if (line.find("VIOLATION uvIdle") != std::string::npos) logged = true;
    CHECK(logged);
  }
}

TEST_CASE("simulation is deterministic across 50 random configurations") {
  Fixture f;
  std::mt19937 rng(20250823);
  auto coin = [&]() { return std::uniform_int_distribution<int>(0, 1)(rng) == 1; };
  for (int i = 0; i < 50; ++i) {
    SimConfig cfg;
    cfg.uvCount = std::uniform_int_distribution<int>(0, 5)(rng);
    for (int u = 0; u < cfg.uvCount; ++u) {
      cfg.availability.push_back(coin());
      cfg.registration.push_back(coin());
    }
    cfg.seed = std::uniform_int_distribution<long long>(0, 1 << 20)(rng);
    cfg.successThreshold = std::uniform_int_distribution<int>(0, 100)(rng);

    std::string first = write_trace(run_mission(cfg, f.model, f.bound, f.reg));
    std::string second = write_trace(run_mission(cfg, f.model, f.bound, f.reg));
    INFO("config " << i);
    REQUIRE(first == second);
  }
}

TEST_CASE("manual stepping reaches the same fixpoint as run_mission") {
  Fixture f;
  SimConfig cfg = make_cfg(2);
  SimWorld w = init_world(cfg, f.model, f.bound, f.reg);
  int steps = 0;
  while (step(w)) ++steps;
  sim_detail::finalize_states(w);
  CHECK(w.done);
  CHECK(steps > 0);
  CHECK_FALSE(step(w));  // fixpoint is stable

  MessageTrace reference = run_mission(cfg, f.model, f.bound, f.reg);
  CHECK(write_trace(w.trace) == write_trace(reference));
}

TEST_CASE("trace serialization round trip") {
  Fixture f;
  MessageTrace t = run_mission(make_cfg(2), f.model, f.bound, f.reg);
  std::string text = write_trace(t);
  MessageTrace back = read_trace(text);
  CHECK(back.messages.size() == t.messages.size());
  CHECK(back.finalStates == t.finalStates);
  CHECK(back.assertionLog == t.assertionLog);
  CHECK(back.roles == t.roles);
  CHECK(back.aborted == t.aborted);
  CHECK(write_trace(back) == text);

  SECTION("malformed line is rejected with its number") {
    try {
      read_trace("{\"t\": 1, \"from\": \"a\", \"to\": \"b\", \"concept\": \"X\"}\nnot json\n");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
    }
  }
}

TEST_CASE("sequence diagram mirrors the trace") {
  Fixture f;
  MessageTrace t = run_mission(make_cfg(2), f.model, f.bound, f.reg);
  std::string puml = render_sequence_diagram(t);
  CHECK_THAT(puml, Catch::Matchers::StartsWith("@startuml"));
  CHECK_THAT(puml, Catch::Matchers::ContainsSubstring("Operator -> MCC : MissionBrief("));

  size_t participants = 0, arrows = 0, pos = 0;
  std::istringstream in(puml);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("participant ", 0) == 0) ++participants;
    if (line.find(" -> ") != std::string::npos) ++arrows;
  }
  (void)pos;
  CHECK(participants == 5);  // Operator, MCC, UVFManager, UV1, UV2
  CHECK(arrows == t.messages.size());
}

TEST_CASE("world construction validates its inputs") {
  Fixture f;
  SECTION("mask length mismatch") {
    SimConfig cfg = make_cfg(2);
    cfg.availability.pop_back();
    CHECK_THROWS_AS(init_world(cfg, f.model, f.bound, f.reg), std::invalid_argument);
  }
  SECTION("fault mask length mismatch") {
    SimConfig cfg = make_cfg(2);
    cfg.initialControlled = {true};
    CHECK_THROWS_AS(init_world(cfg, f.model, f.bound, f.reg), std::invalid_argument);
  }
  SECTION("missing protocol concept") {
    OntologyRegistry crippled = f.reg;
    crippled.concepts.erase(crippled.concepts.begin());
    CHECK_THROWS_AS(init_world(make_cfg(1), f.model, f.bound, crippled),
                    std::invalid_argument);
  }
}
