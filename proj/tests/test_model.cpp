#include <catch2/catch_amalgamated.hpp>

#include "amdd/model.hpp"
#include "amdd/model_json.hpp"
#include "helpers.hpp"

using namespace amdd;

TEST_CASE("cardinality grammar") {
  CHECK(Cardinality::parse("1")->text() == "1");
  CHECK(Cardinality::parse("0..3")->text() == "0..3");
  CHECK(Cardinality::parse("*")->text() == "*");
  CHECK(Cardinality::parse("1..*")->text() == "1..*");
  CHECK_FALSE(Cardinality::parse("x").has_value());
  CHECK_FALSE(Cardinality::parse("1..y").has_value());
  CHECK(Cardinality::parse("1..*")->contains(7));
  CHECK_FALSE(Cardinality::parse("1..*")->contains(0));
  CHECK(Cardinality::parse("2..4")->contains(4));
  CHECK_FALSE(Cardinality::parse("2..4")->contains(5));
}

TEST_CASE("uvf fixture model validates cleanly") {
  SystemModel model = testutil::load_uvf_model();
  ValidationReport report = validate_model(model);
  for (const auto& i : report.issues) INFO(i.location << ": " << i.message);
  CHECK(report.ok());
  CHECK(model.classes.size() == 7);
  CHECK(model.find_class("UVFManager") != nullptr);
  CHECK(model.find_class("UVFManager")->displayLabel == "UVF-Manager");
  CHECK(model.find_class("UAV")->isAbstract);
  CHECK_FALSE(model.find_class("UV")->isAbstract);
  CHECK(model.machine_for("UV") != nullptr);
}

TEST_CASE("validation catches structural mistakes") {
  SystemModel model = testutil::load_uvf_model();

  SECTION("duplicate class name") {
    model.classes.push_back(model.classes.front());
    CHECK_FALSE(validate_model(model).ok());
  }
  SECTION("inheritance with cardinality") {
    for (auto& r : model.relationships)
      if (r.kind == RelationshipKind::Inheritance)
        r.targetCardinality = Cardinality::exactly(1);
    CHECK_FALSE(validate_model(model).ok());
  }
  SECTION("two machines for one class") {
    model.stateMachines.push_back(model.stateMachines.front());
    CHECK_FALSE(validate_model(model).ok());
  }
  SECTION("composite nesting beyond one level") {
    auto& m = model.stateMachines.front();
    m.states.push_back({"Deep", std::string("Uncontrolled")});
    CHECK_FALSE(validate_model(model).ok());
  }
  SECTION("missing initial state") {
    model.stateMachines.front().initial.clear();
    CHECK_FALSE(validate_model(model).ok());
  }
  SECTION("unreachable activity node") {
    model.activities.front().nodes.push_back(
        {"orphan", ActivityNodeKind::Action, "X", "MCC"});
    CHECK_FALSE(validate_model(model).ok());
  }
  SECTION("two initial nodes") {
    auto& f = model.activities.front();
    f.nodes.push_back({"extraInit", ActivityNodeKind::Initial, "start", ""});
    f.edges.push_back({"extraInit", f.nodes.front().id, {}});
    CHECK_FALSE(validate_model(model).ok());
  }
  SECTION("issues are sorted by location") {
    model.classes.push_back(model.classes.front());
    model.stateMachines.push_back(model.stateMachines.front());
    auto issues = validate_model(model).issues;
    REQUIRE(issues.size() >= 2);
    CHECK(std::is_sorted(issues.begin(), issues.end(),
                         [](const ValidationIssue& a, const ValidationIssue& b) {
                           return a.location < b.location;
                         }));
  }
}

TEST_CASE("structural equality ignores declaration order") {
  SystemModel a = testutil::load_uvf_model();
  SystemModel b = a;
  std::reverse(b.classes.begin(), b.classes.end());
  std::reverse(b.relationships.begin(), b.relationships.end());
  CHECK(structurally_equal(a, b));

  SECTION("transition order matters") {
    std::reverse(b.stateMachines.front().transitions.begin(),
                 b.stateMachines.front().transitions.end());
    CHECK_FALSE(structurally_equal(a, b));
  }
  SECTION("attribute change breaks equality") {
    b.classes.front().attributes.push_back({"extra", SemanticType::Integer, {}});
    CHECK_FALSE(structurally_equal(a, b));
  }
}

TEST_CASE("model JSON round trip") {
  SystemModel model = testutil::load_uvf_model();
  std::string text = serialize_model(model);
  SystemModel back = deserialize_model(text);
  CHECK(structurally_equal(model, back));
  CHECK(serialize_model(back) == text);
}

TEST_CASE("serialize refuses an invalid model") {
  SystemModel model = testutil::load_uvf_model();
  model.classes.push_back(model.classes.front());  // duplicate
  CHECK_THROWS_AS(serialize_model(model), std::runtime_error);
}

TEST_CASE("deserialize reports positions for malformed JSON") {
  try {
    deserialize_model("{\n  \"modelName\": \"x\",\n  oops\n}");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
}

TEST_CASE("deserialize rejects semantically invalid models") {
  std::string text = R"({
    "modelName": "m", "version": "1",
    "classes": [{"name": "A", "attributes": [], "methods": []}],
    "relationships": [{"kind": "Association", "source": "A", "target": "Missing"}]
  })";
  CHECK_THROWS_WITH(deserialize_model(text),
                    Catch::Matchers::ContainsSubstring("Missing"));
}

TEST_CASE("serialize/deserialize round-trips 200 generated models") {
  std::mt19937 rng(20240817);
  for (int i = 0; i < 200; ++i) {
    SystemModel m = testutil::random_model(rng);
    if (!validate_model(m).ok()) continue;  // generator aims for valid models
    std::string text = serialize_model(m);
    SystemModel back = deserialize_model(text);
    CHECK(structurally_equal(m, back));
  }
}
