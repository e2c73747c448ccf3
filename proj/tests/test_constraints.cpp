#include <catch2/catch_amalgamated.hpp>

#include "amdd/constraints.hpp"
#include "helpers.hpp"

using namespace amdd;

namespace {

ObjectInstance uv(const std::string& id, double score, const std::string& state) {
  ObjectInstance i;
  i.className = "UV";
  i.instanceId = id;
  i.attributes["uvId"] = std::string(id);
  i.attributes["performanceScore"] = score;
  i.currentState = state;
  return i;
}

}  // namespace

TEST_CASE("fixture constraints parse with expected kinds") {
  ConstraintSet set = parse_constraints(testutil::read_fixture("uvf.ocl"));
  REQUIRE(set.size() == 12);

  std::map<std::string, ConstraintKind> kinds;
  for (const auto& c : set.constraints) kinds[c.name] = c.kind;
  CHECK(kinds.at("uniqueId") == ConstraintKind::Uniqueness);
  CHECK(kinds.at("scoreRange") == ConstraintKind::Value);
  CHECK(kinds.at("managesFleet") == ConstraintKind::Cardinality);
  CHECK(kinds.at("operatorReady") == ConstraintKind::Precondition);
  CHECK(kinds.at("uvIdle") == ConstraintKind::Precondition);
  CHECK(kinds.at("uvControlled") == ConstraintKind::Postcondition);
  CHECK(kinds.at("mgrReported") == ConstraintKind::Postcondition);

  for (const auto& c : set.constraints) {
    if (c.name == "managesFleet") CHECK(c.context == "UVFManager");  // normalized
    if (c.name == "uvIdle") {
      REQUIRE(c.operationContext);
      CHECK(*c.operationContext == "assignTask");
    }
  }
}

TEST_CASE("expression render-parse round trip") {
  ConstraintSet set = parse_constraints(testutil::read_fixture("uvf.ocl"));
  for (const auto& c : set.constraints) {
    std::string text = ocl::render(c.expr);
    INFO(c.name << ": " << text);
    ocl::ExprPtr back = ocl::ExprParser(ocl::lex(text, 1)).parse();
    CHECK(ocl::render(back) == text);
  }
}

TEST_CASE("constraint classification errors") {
  SECTION("@pre outside a post-condition") {
    CHECK_THROWS_WITH(
        parse_constraints("context UV::assignTask() pre p: self.performanceScore@pre >= 0"),
        Catch::Matchers::ContainsSubstring("@pre"));
  }
  SECTION("isUnique outside an invariant") {
    CHECK_THROWS_WITH(
        parse_constraints("context UV::assignTask() pre p: UV.allInstances()->isUnique(uvId)"),
        Catch::Matchers::ContainsSubstring("isUnique"));
  }
  SECTION("size bound outside an invariant") {
    CHECK_THROWS_WITH(
        parse_constraints("context UV::assignTask() pre p: self.manages->size() >= 1"),
        Catch::Matchers::ContainsSubstring("size()"));
  }
  SECTION("invariant with an operation context") {
    CHECK_THROWS_AS(parse_constraints("context UV::assignTask() inv x: self.performanceScore >= 0"),
                    ParseError);
  }
  SECTION("expression before any context") {
    CHECK_THROWS_AS(parse_constraints("self.x = 1\n"), ParseError);
  }
  SECTION("error carries the declaration line") {
    try {
      parse_constraints("-- comment\n\ncontext UV inv broken: self.x >\n");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
    }
  }
}

TEST_CASE("binding validates every referenced name") {
  SystemModel model = testutil::load_uvf_model();

  SECTION("fixture binds cleanly") {
    BoundConstraints bound = testutil::load_uvf_bound(model);
    CHECK(bound.constraints.size() == 12);
    CHECK(bound.stateParents.at("UV").at("Uncontrolled") == "Registered");
    CHECK(bound.stateParents.at("UV").at("Available").empty());
    CHECK(bound.modelChecksum != 0);
  }
  SECTION("unknown class") {
    auto set = parse_constraints("context Ghost inv g: self.x = 1");
    CHECK_THROWS_WITH(bind(set, model), Catch::Matchers::ContainsSubstring("Ghost"));
  }
  SECTION("unknown attribute") {
    auto set = parse_constraints("context UV inv g: self.nope = 1");
    CHECK_THROWS_WITH(bind(set, model), Catch::Matchers::ContainsSubstring("nope"));
  }
  SECTION("unknown operation") {
    auto set = parse_constraints("context UV::fly() pre g: self.performanceScore >= 0");
    CHECK_THROWS_WITH(bind(set, model), Catch::Matchers::ContainsSubstring("fly"));
  }
  SECTION("unknown state") {
    auto set = parse_constraints("context UV inv g: self.oclInState(Orbit)");
    CHECK_THROWS_WITH(bind(set, model), Catch::Matchers::ContainsSubstring("Orbit"));
  }
  SECTION("unknown relationship label") {
    auto set = parse_constraints("context UV inv g: self.pilots->size() >= 1");
    CHECK_THROWS_WITH(bind(set, model), Catch::Matchers::ContainsSubstring("pilots"));
  }
  SECTION("errors aggregate and name the constraint") {
    auto set = parse_constraints(
        "context UV inv first: self.nopeA = 1\ncontext UV inv second: self.nopeB = 1");
    try {
      bind(set, model);
      FAIL("expected BindError");
    } catch (const BindError& e) {
      std::string msg = e.what();
      CHECK(msg.find("first") != std::string::npos);
      CHECK(msg.find("second") != std::string::npos);
    }
  }
}

TEST_CASE("tri-valued evaluation") {
  SystemModel model = testutil::load_uvf_model();
  BoundConstraints bound = testutil::load_uvf_bound(model);
  auto eval_on = [&](const std::string& text, const ObjectInstance& inst) {
    auto set = parse_constraints(text);
    ocl::EvalContext ctx{&inst, nullptr, &bound, inst.className};
    return ocl::eval(set.constraints[0].expr, ctx);
  };

  SECTION("oclInState matches the leaf") {
    CHECK(eval_on("context UV inv x: self.oclInState(Uncontrolled)",
                  uv("uv1", 10, "Uncontrolled")) == ocl::Tri::True);
  }
  SECTION("oclInState matches the composite parent") {
    CHECK(eval_on("context UV inv x: self.oclInState(Registered)",
                  uv("uv1", 10, "Uncontrolled")) == ocl::Tri::True);
    CHECK(eval_on("context UV inv x: self.oclInState(Registered)",
                  uv("uv1", 10, "Available")) == ocl::Tri::False);
  }
  SECTION("unset attributes are undefined, and undefined propagates") {
    ObjectInstance i = uv("uv1", 0, "Available");
    i.attributes.erase("performanceScore");
    CHECK(eval_on("context UV inv x: self.performanceScore >= 0", i) ==
          ocl::Tri::Undefined);
    CHECK(eval_on("context UV inv x: self.performanceScore >= 0 or self.uvId = 'uv1'",
                  i) == ocl::Tri::True);  // Or short-circuits on True
    CHECK(eval_on("context UV inv x: self.performanceScore >= 0 and self.uvId = 'uv1'",
                  i) == ocl::Tri::Undefined);
  }
  SECTION("real comparison uses a tolerance") {
    ObjectInstance i = uv("uv1", 0.1 + 0.2, "Available");
    CHECK(eval_on("context UV inv x: self.performanceScore = 0.3", i) == ocl::Tri::True);
  }
  SECTION("integer comparison stays exact") {
    ObjectInstance i = uv("uv1", 0, "Available");
    i.attributes["performanceScore"] = static_cast<std::int64_t>(3);
    CHECK(eval_on("context UV inv x: self.performanceScore = 3", i) == ocl::Tri::True);
    CHECK(eval_on("context UV inv x: self.performanceScore = 4", i) == ocl::Tri::False);
  }
  SECTION("implies truth table") {
    ObjectInstance i = uv("uv1", 50, "Available");
    CHECK(eval_on("context UV inv x: self.performanceScore > 100 implies self.performanceScore > 200",
                  i) == ocl::Tri::True);
    CHECK(eval_on("context UV inv x: self.performanceScore > 0 implies self.performanceScore > 200",
                  i) == ocl::Tri::False);
  }
}

TEST_CASE("snapshot checking") {
  SystemModel model = testutil::load_uvf_model();
  BoundConstraints bound = testutil::load_uvf_bound(model);

  SECTION("clean snapshot has no violations") {
    ObjectSnapshot snap;
    snap.instances = {uv("uv1", 10, "Available"), uv("uv2", 20, "Available")};
    CHECK(check_snapshot(bound, snap).empty());
  }
  SECTION("out-of-range score yields exactly one Value violation") {
    ObjectSnapshot snap;
    snap.instances = {uv("uv1", 150, "Available")};
    auto violations = check_snapshot(bound, snap);
    REQUIRE(violations.size() == 1);
    CHECK(violations[0].constraintName == "scoreRange");
    CHECK(violations[0].instanceId == "uv1");
    CHECK(violations[0].reason == "violated");
    CHECK_THAT(violations[0].actualValues,
               Catch::Matchers::ContainsSubstring("performanceScore=150"));
  }
  SECTION("duplicate uvId yields exactly one Uniqueness violation") {
    ObjectSnapshot snap;
    snap.instances = {uv("a", 10, "Available"), uv("b", 20, "Available")};
    snap.instances[1].attributes["uvId"] = std::string("a");
    snap.instances[0].attributes["uvId"] = std::string("a");
    auto violations = check_snapshot(bound, snap);
    REQUIRE(violations.size() == 1);
    CHECK(violations[0].constraintName == "uniqueId");
    CHECK(violations[0].instanceId == "a,b");
  }
  SECTION("missing attribute is reported as undefined") {
    ObjectSnapshot snap;
    snap.instances = {uv("uv1", 10, "Available")};
    snap.instances[0].attributes.erase("performanceScore");
    auto violations = check_snapshot(bound, snap);
    REQUIRE(violations.size() == 1);
    CHECK(violations[0].reason == "undefined");
  }
  SECTION("cardinality over links") {
    ObjectInstance mgr;
    mgr.className = "UVFManager";
    mgr.instanceId = "mgr1";
    ObjectSnapshot snap;
    snap.instances = {mgr};
    auto violations = check_snapshot(bound, snap);
    REQUIRE(violations.size() == 1);
    CHECK(violations[0].constraintName == "managesFleet");

    snap.instances[0].links.push_back({"manages", "uv1"});
    CHECK(check_snapshot(bound, snap).empty());
  }
}

TEST_CASE("transition checking with pre/post and @pre") {
  SystemModel model = testutil::load_uvf_model();
  BoundConstraints bound = testutil::load_uvf_bound(model);

  auto record = [&](const std::string& op, const ObjectInstance& pre,
                    const ObjectInstance& post) {
    TransitionRecord r;
    r.instanceId = pre.instanceId;
    r.operation = op;
    r.preSnapshot.instances = {pre};
    r.postSnapshot.instances = {post};
    return r;
  };

  SECTION("legal assignTask passes") {
    auto r = record("assignTask", uv("uv1", 0, "Uncontrolled"), uv("uv1", 0, "Controlled"));
    CHECK(check_transition(bound, r).empty());
  }
  SECTION("assignTask on a Controlled UV fails exactly the precondition") {
    auto r = record("assignTask", uv("uv1", 0, "Controlled"), uv("uv1", 0, "Controlled"));
    auto violations = check_transition(bound, r);
    REQUIRE(violations.size() == 1);
    CHECK(violations[0].constraintName == "uvIdle");
    CHECK_THAT(violations[0].actualValues,
               Catch::Matchers::ContainsSubstring("state=Controlled"));
  }
  SECTION("postcondition failure is attributed to the post constraint") {
    auto r = record("assignTask", uv("uv1", 0, "Uncontrolled"), uv("uv1", 0, "Available"));
    auto violations = check_transition(bound, r);
    REQUIRE(violations.size() == 1);
    CHECK(violations[0].constraintName == "uvControlled");
  }
  SECTION("@pre navigation reads the pre-state snapshot") {
    auto extra = parse_constraints(
        "context UV::completeTask() post scoreKept: "
        "self.performanceScore >= self.performanceScore@pre");
    BoundConstraints withPost = bind(extra, model);
    withPost.stateParents = bound.stateParents;

    auto ok = record("completeTask", uv("uv1", 10, "Controlled"), uv("uv1", 20, "Uncontrolled"));
    CHECK(check_transition(withPost, ok).empty());

    auto bad = record("completeTask", uv("uv1", 10, "Controlled"), uv("uv1", 5, "Uncontrolled"));
    auto violations = check_transition(withPost, bad);
    REQUIRE(violations.size() == 1);
    CHECK_THAT(violations[0].actualValues,
               Catch::Matchers::ContainsSubstring("performanceScore@pre=10"));
  }
  SECTION("record without the instance is rejected") {
    TransitionRecord r;
    r.instanceId = "ghost";
    r.operation = "assignTask";
    CHECK_THROWS_AS(check_transition(bound, r), std::invalid_argument);
  }
}
