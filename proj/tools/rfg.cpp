#include <CLI11.hpp>

#include <iostream>

#include "rfg/cli/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"rfg: policy-gradient molecular string generation"};
  app.require_subcommand(1);

  std::string corpus, out, config, prior, spec, variant;
  std::size_t workers = 1, budget = 10000;
  std::vector<std::string> logs;

  auto* pretrain = app.add_subcommand("pretrain", "Train a prior on a SMILES corpus");
  pretrain->add_option("--corpus", corpus, "One SMILES per line")->required();
  pretrain->add_option("--out", out, "Checkpoint path")->required();
  pretrain->add_option("--config", config, "key = value config file");

  auto* optimize = app.add_subcommand("optimize", "Run RL optimisation from a prior");
  optimize->add_option("--config", config, "key = value config file")->required();
  optimize->add_option("--prior", prior, "Prior checkpoint")->required();
  optimize->add_option("--out", out, "Output directory")->required();
  optimize->add_option("--workers", workers, "Replicates run in parallel")
      ->check(CLI::PositiveNumber);

  auto* sweep = app.add_subcommand("sweep", "Random hyperparameter search");
  sweep->add_option("--spec", spec, "Sweep spec file")->required();
  sweep->add_option("--out", out, "Output directory")->required();
  sweep->add_option("--workers", workers, "Runs in parallel")->check(CLI::PositiveNumber);

  auto* landscape = app.add_subcommand("landscape", "Tabulate a reward-shaping landscape");
  landscape->add_option("--variant", variant, "reinvent or acegen")
      ->required()
      ->check(CLI::IsMember({"reinvent", "acegen"}));
  landscape->add_option("--out", out, "Output directory")->required();

  auto* report = app.add_subcommand("report", "Recompute metrics from run logs");
  report->add_option("logs", logs, "Run log CSV files")->required();
  report->add_option("--budget", budget, "Molecules counted per log")
      ->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*pretrain) {
      rfg::cli::cmd_pretrain(corpus, out,
                             config.empty() ? std::nullopt : std::optional<std::string>(config),
                             std::cout);
    } else if (*optimize) {
      rfg::cli::cmd_optimize(config, prior, out, workers, std::cout);
    } else if (*sweep) {
      rfg::cli::cmd_sweep(spec, out, workers, std::cout);
    } else if (*landscape) {
      rfg::cli::cmd_landscape(variant, out, std::cout);
    } else if (*report) {
      rfg::cli::cmd_report(logs, budget, std::cout, std::cerr);
    }
  } catch (const std::exception& e) {
    std::cerr << "rfg: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
