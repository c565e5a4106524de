// Command-line front end: geowalk {run,sample,anneal,diagnose,list} --config FILE
#include <CLI11.hpp>
#include <iostream>

#include "geowalk/config.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Geodesic random walks on convex bodies in manifolds"};
  app.require_subcommand(1);

  std::string config_path;
  geowalk::CliOverrides overrides;
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string output_dir;
  double budget_constant = 1.0;
  int trials = 1;
  double epsilon = 0.1;
  double fail_prob = 0.1;

  struct Mode {
    const char* name;
    const char* help;
    std::optional<geowalk::RunMode> mode;
  };
  const Mode modes[] = {
      {"run", "Run the mode named in [run] mode", std::nullopt},
      {"sample", "Draw samples with the geodesic walk", geowalk::RunMode::Sample},
      {"anneal", "Minimize a target by simulated annealing", geowalk::RunMode::Anneal},
      {"diagnose", "Run numerical checks and write reports", geowalk::RunMode::Diagnose},
  };
  std::vector<std::pair<CLI::App*, std::optional<geowalk::RunMode>>> commands;
  std::vector<CLI::Option*> seed_opts, jobs_opts, out_opts, budget_opts, trial_opts, eps_opts, fail_opts;
  for (const auto& m : modes) {
    auto* sub = app.add_subcommand(m.name, m.help);
    sub->add_option("-c,--config", config_path, "Config file")->required()->check(CLI::ExistingFile);
    seed_opts.push_back(sub->add_option("--seed", seed, "Master seed"));
    jobs_opts.push_back(sub->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber));
    out_opts.push_back(sub->add_option("--output-dir", output_dir, "Output directory"));
    sub->add_flag("--override-delta", overrides.override_delta, "Allow step sizes above the safe bound");
    budget_opts.push_back(
        sub->add_option("--budget-constant", budget_constant, "Annealing budget constant")->check(CLI::PositiveNumber));
    trial_opts.push_back(sub->add_option("--trials", trials, "Independent annealing trials")->check(CLI::PositiveNumber));
    eps_opts.push_back(sub->add_option("--epsilon", epsilon, "Annealing optimality gap")->check(CLI::PositiveNumber));
    fail_opts.push_back(
        sub->add_option("--fail-prob", fail_prob, "Annealing failure probability")->check(CLI::Range(0.0, 1.0)));
    commands.emplace_back(sub, m.mode);
  }
  auto* list = app.add_subcommand("list", "List built-in manifolds, bodies, targets and checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (list->parsed()) {
    std::cout << geowalk::list_builtins();
    return 0;
  }
  for (std::size_t i = 0; i < commands.size(); ++i) {
    if (!commands[i].first->parsed()) continue;
    overrides.mode = commands[i].second;
    if (seed_opts[i]->count()) overrides.seed = seed;
    if (jobs_opts[i]->count()) overrides.jobs = jobs;
    if (out_opts[i]->count()) overrides.output_dir = output_dir;
    if (budget_opts[i]->count()) overrides.budget_constant = budget_constant;
    if (trial_opts[i]->count()) overrides.trials = trials;
    if (eps_opts[i]->count()) overrides.epsilon = epsilon;
    if (fail_opts[i]->count()) overrides.fail_prob = fail_prob;
    return geowalk::run(config_path, overrides, std::cout, std::cerr);
  }
  return 2;
}
