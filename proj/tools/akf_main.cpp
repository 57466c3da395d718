// akf: run angiogenesis scenarios and their invariant checks.
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "akf/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Solver and invariant harness for the coupled vessel-density / angiogenic-factor system"};
  app.require_subcommand(1);

  std::vector<std::string> overrides;
  std::string out_dir = "akf_out";
  int jobs = 1;
  double tol = 0.0;

  auto* run = app.add_subcommand("run", "run scenarios (config files or shipped names)");
  std::vector<std::string> targets;
  run->add_option("scenario", targets, "config file or shipped scenario name")->required();
  run->add_option("--out", out_dir, "output directory")->capture_default_str();
  run->add_option("--jobs", jobs, "scenarios run concurrently")->check(CLI::PositiveNumber);
  run->add_option("--tol", tol, "Picard tolerance (overrides [solver] tol)")->check(CLI::PositiveNumber);
  run->add_option("--override", overrides, "section.key=value, applied after parsing");

  auto* check = app.add_subcommand("check", "validate a configuration without running it");
  std::string check_target;
  check->add_option("scenario", check_target, "config file or shipped scenario name")->required();
  check->add_option("--override", overrides, "section.key=value, applied after parsing");

  app.add_subcommand("list-checks", "list every invariant check");

  auto* describe = app.add_subcommand("describe", "describe a check or a shipped scenario");
  std::string describe_name;
  describe->add_option("name", describe_name)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : akf::kExitConfig;
  }

  if (*run) {
    akf::RunOptions options;
    options.out_dir = out_dir;
    if (tol > 0.0) options.tol = tol;
    return akf::run_command(targets, overrides, options, jobs, std::cout, std::cerr);
  }
  if (*check) return akf::check_command(check_target, overrides, std::cout, std::cerr);
  if (app.got_subcommand("list-checks")) return akf::list_checks_command(std::cout);
  if (*describe) return akf::describe_command(describe_name, std::cout, std::cerr);
  return akf::kExitInternal;
}
