#include <catch_amalgamated.hpp>

#include <fstream>
#include <sstream>

#include "rigidity/config.hpp"

using namespace rigidity;

namespace {

const char* kMinimal = R"(version = 1
[sft]
row = 1 1
row = 1 1
[generator]
dimension = 2
window = 0 0
entry = 1 : 1 0 0 1
entry = 2 : 1 0 0 1
)";

ConfigError parse_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e;
  }
  FAIL("config parsed without error");
  throw;
}

std::string replace(std::string s, const std::string& from, const std::string& to) {
  const auto at = s.find(from);
  REQUIRE(at != std::string::npos);
  return s.replace(at, from.size(), to);
}

}  // namespace

TEST_CASE("minimal config parses with defaults") {
  const ExperimentConfig cfg = parse_config(kMinimal);
  CHECK(cfg.tau == 1.0);
  CHECK(cfg.get("tolerance") == "1e-10");
  CHECK(cfg.get("seed") == "0");
  CHECK(cfg.measure_type == "parry");
  CHECK(cfg.sft().alphabet_size() == 2);
  CHECK(cfg.generator().table().at({1}) == Matrix::Identity(2, 2));
  CHECK_FALSE(cfg.field().has_value());
}

TEST_CASE("transition row of the wrong length names the row") {
  const ConfigError e = parse_error(replace(kMinimal, "row = 1 1\nrow = 1 1", "row = 1 1\nrow = 1 1 1"));
  CHECK(e.key() == "row");
  CHECK(e.line() == 4);
  CHECK_THAT(e.reason(), Catch::Matchers::ContainsSubstring("row 2"));
  CHECK(e.code() == ErrorCode::ParseError);
}

TEST_CASE("missing window words are listed") {
  const std::string text = replace(replace(kMinimal, "window = 0 0", "window = 0 1"),
                                   "entry = 1 : 1 0 0 1\nentry = 2 : 1 0 0 1",
                                   "entry = 1 1 : 1 0 0 1\nentry = 2 1 : 1 0 0 1");
  const ConfigError e = parse_error(text);
  CHECK(e.key() == "entry");
  CHECK_THAT(e.reason(), Catch::Matchers::ContainsSubstring("[1 2]"));
  CHECK_THAT(e.reason(), Catch::Matchers::ContainsSubstring("[2 2]"));
}

TEST_CASE("config diagnostics") {
  CHECK(parse_error(replace(kMinimal, "version = 1", "version = 2")).key() == "version");
  CHECK(parse_error(replace(kMinimal, "entry = 2 : 1 0 0 1", "entry = 2 : 1 1 1 1")).line() == 9);
  CHECK(parse_error(replace(kMinimal, "entry = 2 : 1 0 0 1", "entry = 3 : 1 0 0 1")).key() == "entry");
  CHECK(parse_error(replace(kMinimal, "entry = 2 : 1 0 0 1", "entry = 2 : 1 0 0")).key() == "entry");
  CHECK(parse_error(replace(kMinimal, "row = 1 1\n[gen", "row = 1 2\n[gen")).key() == "row");
  CHECK(parse_error(std::string(kMinimal) + "[run]\ntheta = -1\n").key() == "theta");
  CHECK(parse_error(std::string(kMinimal) + "[run]\nbogus = 1\n").key() == "bogus");
  CHECK(parse_error(std::string(kMinimal) + "[measure]\ntype = explicit\nrow = 0.5 0.4\nrow = 1 0\n").key() == "row");
  CHECK(parse_error(std::string(kMinimal) + "[nope]\n").line() == 10);
}

TEST_CASE("builtin generators, explicit measures and fields") {
  const ExperimentConfig cfg = parse_config(R"(version = 1
[sft]
builtin = golden
tau = 0.5
[generator]
builtin = mixed
[measure]
type = explicit
row = 0.5 0.5
row = 1 0
[field]
window = 0 0
entry = 1 : 2 0 0 2
entry = 2 : 1 0 0 4
[run]
m = 4 8
)");
  CHECK(cfg.tau == 0.5);
  CHECK(cfg.sft().alphabet_size() == 2);
  CHECK(cfg.measure().p(0, 0) == 0.5);
  const auto f = cfg.field();
  REQUIRE(f.has_value());
  CHECK((f->at({0}).form() - Matrix::Identity(2, 2)).norm() < 1e-15);
  CHECK(f->at({1}).form().determinant() == Catch::Approx(1.0));
  CHECK(cfg.get("m") == "4 8");
}

TEST_CASE("shipped configs all parse") {
  for (const char* name : {"identity", "rotations", "hyperbolic", "conjugated_rotation", "manufactured_conjugate",
                           "mixed_golden", "bunched", "expanding_and_elliptic"}) {
    std::ifstream in(std::string(RIGIDITY_CONFIGS) + "/" + name + ".cfg");
    REQUIRE(in.good());
    std::stringstream buf;
    buf << in.rdbuf();
    CHECK_NOTHROW(parse_config(buf.str()));
  }
}
