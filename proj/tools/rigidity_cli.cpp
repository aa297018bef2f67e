// rigidity: run conformal-structure experiments on locally constant cocycles
// over subshifts of finite type.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "rigidity/commands.hpp"

int main(int argc, char** argv) {
  using namespace rigidity;
  CLI::App app{"Cocycle rigidity experiments.\n\n" + cli::csv_schemas()};
  std::string command, config_path, out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<double> tolerance;

  std::string names;
  for (const auto& n : cli::command_names()) names += (names.empty() ? "" : ", ") + n;
  app.add_option("command", command, "One of: " + names)->required();
  app.add_option("--config", config_path, "Experiment config file")->required()->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "Output directory (default: out)");
  app.add_option("--seed", seed, "Overrides run.seed");
  app.add_option("--threads", threads, "Overrides run.threads (execution is single-threaded)")
      ->check(CLI::PositiveNumber);
  app.add_option("--tolerance", tolerance, "Overrides run.tolerance")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  ExperimentConfig cfg;
  try {
    std::ifstream in(config_path, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    cfg = parse_config(buf.str());
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  if (seed) cfg.run["seed"] = std::to_string(*seed);
  if (threads) cfg.run["threads"] = std::to_string(*threads);
  if (tolerance) cfg.run["tolerance"] = cli::num(*tolerance);
  return cli::run_command(command, cfg, out_dir);
}
