#include <catch2/catch_amalgamated.hpp>

#include "amdd/toml_lite.hpp"
#include "helpers.hpp"

using namespace amdd;

TEST_CASE("toml sections and value types") {
  std::string text =
      "top = \"level\"\n"
      "\n"
      "[model]\n"
      "name = \"uvf\"  # trailing comment\n"
      "count = 3\n"
      "ratio = 0.5\n"
      "flag = true\n"
      "other = false\n"
      "\n"
      "[a]\n"
      "x = 1\n"
      "[b]\n"
      "x = 2\n";
  TomlTable t = parse_toml(text);
  CHECK(t.get_string("top") == "level");
  CHECK(t.get_string("model.name") == "uvf");
  CHECK(t.get_int("model.count") == 3);
  CHECK(t.get_real("model.ratio") == 0.5);
  CHECK(t.get_bool("model.flag") == true);
  CHECK(t.get_bool("model.other") == false);
  CHECK(t.get_int("a.x") == 1);
  CHECK(t.get_int("b.x") == 2);

  SECTION("type-mismatched getters return nullopt") {
    CHECK_FALSE(t.get_int("model.name").has_value());
    CHECK_FALSE(t.get_string("model.count").has_value());
    CHECK_FALSE(t.get_bool("model.ratio").has_value());
    CHECK_FALSE(t.get_string("missing.key").has_value());
  }
  SECTION("get_real coerces integers") {
    CHECK(t.get_real("model.count") == 3.0);
  }
}

TEST_CASE("hash inside a quoted string is not a comment") {
  TomlTable t = parse_toml("key = \"value # not comment\"\n");
  CHECK(t.get_string("key") == "value # not comment");
}

TEST_CASE("toml parse errors carry positions") {
  SECTION("duplicate key") {
    try {
      parse_toml("[s]\na = 1\na = 2\n");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
      CHECK_THAT(e.what(), Catch::Matchers::ContainsSubstring("s.a"));
    }
  }
  SECTION("missing equals") {
    CHECK_THROWS_AS(parse_toml("just words\n"), ParseError);
  }
  SECTION("unterminated section header") {
    CHECK_THROWS_AS(parse_toml("[oops\n"), ParseError);
  }
  SECTION("empty section name") {
    CHECK_THROWS_AS(parse_toml("[]\n"), ParseError);
  }
  SECTION("unterminated string") {
    CHECK_THROWS_AS(parse_toml("a = \"open\n"), ParseError);
  }
  SECTION("garbage value") {
    try {
      parse_toml("a = 1\nb = wibble\n");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
      CHECK_THAT(e.what(), Catch::Matchers::ContainsSubstring("wibble"));
    }
  }
  SECTION("empty value") {
    CHECK_THROWS_AS(parse_toml("a =\n"), ParseError);
  }
  SECTION("trailing junk after a number") {
    CHECK_THROWS_AS(parse_toml("a = 12abc\n"), ParseError);
  }
}

TEST_CASE("project fixture configuration parses") {
  TomlTable t = parse_toml(testutil::read_fixture("uvf.toml"));
  CHECK(t.get_string("model.name") == "uvf");
  CHECK(t.get_string("generation.backend") == "template");
  CHECK(t.get_bool("generation.ontology") == true);
  CHECK(t.get_int("simulation.uv_count") == 2);
  CHECK(t.get_int("simulation.seed") == 42);
  CHECK(t.get_real("simulation.success_threshold") == 50.0);
  CHECK(t.get_int("llm.max_retries").has_value());
  CHECK(t.get_string("output.dir") == "artifacts");
}
