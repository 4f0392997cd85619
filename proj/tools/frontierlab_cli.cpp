// Command-line front end: frontier / analytic / static / eval subcommands
// over a key=value run configuration.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "frontierlab/commands.hpp"
#include "frontierlab/io.hpp"

namespace {

struct CliState {
  frontierlab::CommandOptions options;
  std::string labels_csv;
};

void add_common(CLI::App* cmd, CliState& state) {
  cmd->add_option("--config", state.options.config_path, "run configuration file")
      ->required();
  cmd->add_option("--seed", [&state](const CLI::results_t& res) {
        state.options.seed = std::stoull(res[0]);
        return true;
      },
      "override the config seed");
  cmd->add_option("--out", [&state](const CLI::results_t& res) {
        state.options.out_dir = res[0];
        return true;
      },
      "output directory");
  cmd->add_option("--threads", [&state](const CLI::results_t& res) {
        state.options.threads = std::stoull(res[0]);
        return true;
      },
      "worker thread count (default: all cores)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Efficient-frontier computation for multi-asset portfolios"};
  app.require_subcommand(1);

  CliState frontier_state, analytic_state, static_state, eval_state;

  CLI::App* frontier =
      app.add_subcommand("frontier", "train and evaluate a frontier sweep");
  add_common(frontier, frontier_state);

  CLI::App* analytic = app.add_subcommand(
      "analytic", "Monte Carlo frontier of the closed-form optimal control");
  add_common(analytic, analytic_state);

  CLI::App* static_cmd =
      app.add_subcommand("static", "optimized constant-mix frontier");
  add_common(static_cmd, static_state);
  static_cmd->add_option("--compare",
                         [&static_state](const CLI::results_t& res) {
                           static_state.options.compare_path = res[0];
                           return true;
                         },
                         "dynamic frontier CSV to compare against");

  CLI::App* eval_cmd =
      app.add_subcommand("eval", "re-evaluate saved parameters");
  add_common(eval_cmd, eval_state);
  eval_cmd->add_option("--network",
                       [&eval_state](const CLI::results_t& res) {
                         eval_state.options.network_path = res[0];
                         return true;
                       },
                       "saved network parameter file");
  eval_cmd->add_option("--theta",
                       [&eval_state](const CLI::results_t& res) {
                         eval_state.options.theta_path = res[0];
                         return true;
                       },
                       "saved weight-vector file (constant mix, incremental)");
  eval_cmd->add_option("--labels", eval_state.labels_csv,
                       "comma-separated label override");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? frontierlab::kExitOk
                            : frontierlab::kExitValidation;
  }

  if (frontier->parsed())
    return frontierlab::cmd_frontier(frontier_state.options, std::cout,
                                     std::cerr);
  if (analytic->parsed())
    return frontierlab::cmd_analytic(analytic_state.options, std::cout,
                                     std::cerr);
  if (static_cmd->parsed())
    return frontierlab::cmd_static(static_state.options, std::cout, std::cerr);
  if (eval_cmd->parsed()) {
    if (!eval_state.labels_csv.empty()) {
      std::vector<double> labels;
      for (const std::string& item :
           frontierlab::split(eval_state.labels_csv, ','))
        labels.push_back(std::stod(frontierlab::trim(item)));
      eval_state.options.labels = std::move(labels);
    }
    return frontierlab::cmd_eval(eval_state.options, std::cout, std::cerr);
  }
  return frontierlab::kExitValidation;
}
