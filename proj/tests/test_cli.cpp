#include <catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

const std::string kConfigs = RIGIDITY_CONFIGS;

int run(const std::string& args) {
  const std::string line = std::string("\"") + RIGIDITY_CLI + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(line.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

int run_cmd(const std::string& cmd, const std::string& config, const std::string& out,
            const std::string& extra = "") {
  fs::remove_all(out);
  return run(cmd + " --config " + kConfigs + "/" + config + ".cfg --out " + out + " " + extra);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("construct exit codes") {
  CHECK(run_cmd("construct", "rotations", "cli_out/rot") == 0);
  CHECK(fs::exists("cli_out/rot/construct.csv"));
  CHECK(run_cmd("construct", "hyperbolic", "cli_out/hyp") == 1);
  const auto j = nlohmann::json::parse(slurp("cli_out/hyp/construct.json"));
  CHECK(j["obstruction"]["kind"] == "PositiveExponent");
  CHECK(j["exit_code"] == 1);
}

TEST_CASE("errors exit with 2 and a qualified code") {
  CHECK(run_cmd("bogus", "identity", "cli_out/bad") == 2);
  CHECK(run("construct --config /nonexistent.cfg --out cli_out/none") == 2);
  CHECK(run("construct") == 2);
  // shadow on the identity config has no expanding point to use
  CHECK(run_cmd("shadow", "identity", "cli_out/id") == 2);
  const auto j = nlohmann::json::parse(slurp("cli_out/id/shadow.json"));
  CHECK(j["error"]["code"].get<std::string>().find('.') != std::string::npos);
}

TEST_CASE("shadow writes one row per m") {
  REQUIRE(run_cmd("shadow", "expanding_and_elliptic", "cli_out/sh") == 0);
  const auto rows = lines(slurp("cli_out/sh/shadow.csv"));
  REQUIRE(rows.size() == 4);
  CHECK(rows[0] == "m,u_m,log_norm,chi_reference,in_D,N,theta,log_C,distances_ok,periodic_ok");
  CHECK(rows[1].rfind("4,", 0) == 0);
  CHECK(rows[2].rfind("8,", 0) == 0);
  CHECK(rows[3].rfind("16,", 0) == 0);
  const auto j = nlohmann::json::parse(slurp("cli_out/sh/shadow.json"));
  CHECK(j["config"]["run"]["m"] == "4 8 16");
}

TEST_CASE("reports are byte-identical across runs") {
  for (const char* cmd : {"lyapunov", "certify", "holonomy"}) {
    REQUIRE(run_cmd(cmd, "bunched", "cli_out/a", "--seed 5") <= 1);
    const std::string ja = slurp(std::string("cli_out/a/") + cmd + ".json");
    const std::string ca = slurp(std::string("cli_out/a/") + cmd + ".csv");
    REQUIRE(run_cmd(cmd, "bunched", "cli_out/b", "--seed 5") <= 1);
    CHECK(ja == slurp(std::string("cli_out/b/") + cmd + ".json"));
    CHECK(ca == slurp(std::string("cli_out/b/") + cmd + ".csv"));
  }
}

TEST_CASE("seed and tolerance overrides land in the echoed config") {
  REQUIRE(run_cmd("verify", "conjugated_rotation", "cli_out/v", "--seed 9 --tolerance 1e-9") == 0);
  const auto j = nlohmann::json::parse(slurp("cli_out/v/verify.json"));
  CHECK(j["config"]["run"]["seed"] == "9");
  CHECK(j["config"]["run"]["tolerance"] == "1.0000000000000001e-09");
}

TEST_CASE("csv numbers carry full precision") {
  REQUIRE(run_cmd("lyapunov", "mixed_golden", "cli_out/ly") == 0);
  const auto rows = lines(slurp("cli_out/ly/lyapunov.csv"));
  REQUIRE(rows.size() > 1);
  // lambda_plus of a non-trivial cycle: at least 15 significant digits
  std::istringstream in(rows[1]);
  std::string period, cycle, lp;
  std::getline(in, period, ',');
  std::getline(in, cycle, ',');
  std::getline(in, lp, ',');
  std::string digits;
  for (char ch : lp)
    if (std::isdigit(static_cast<unsigned char>(ch))) digits += ch;
  while (!digits.empty() && digits.front() == '0') digits.erase(digits.begin());
  CHECK(digits.size() >= 15);
}
