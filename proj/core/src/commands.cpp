#include "frontierlab/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "frontierlab/io.hpp"
#include "frontierlab/parallel.hpp"

namespace frontierlab {

const char* const kFrontierCsvHeader =
    "label_kind,label,mean,risk_kind,risk,n_samples,max_constraint_violation,"
    "converged";

namespace {

RunConfig load_with_overrides(const CommandOptions& options) {
  RunConfig config = load_run_config(options.config_path);
  if (options.seed) {
    config.seed = *options.seed;
    config.train.seed = *options.seed;
  }
  if (options.out_dir) config.out_dir = *options.out_dir;
  if (options.threads) {
    config.threads = *options.threads;
    config.train.threads = *options.threads;
  }
  if (config.threads == 0) {
    config.threads = default_thread_count();
    config.train.threads = config.threads;
  }
  return config;
}

std::string csv_row(const FrontierPoint& p) {
  std::string row;
  row += p.label_kind;
  row += ',';
  row += format_double(p.label);
  row += ',';
  row += format_double(p.mean);
  row += ',';
  row += p.risk_kind;
  row += ',';
  row += format_double(p.risk);
  row += ',';
  row += std::to_string(p.n_samples);
  row += ',';
  row += format_double(p.max_constraint_violation);
  row += ',';
  row += p.converged ? '1' : '0';
  return row;
}

std::string out_path(const RunConfig& config, const std::string& name) {
  return (std::filesystem::path(config.out_dir) / name).string();
}

std::string point_file_name(const char* stem, std::size_t index) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%03zu.txt", stem, index);
  return buf;
}

void report_pareto(const std::vector<FrontierPoint>& points,
                   std::ostream& err) {
  const auto flagged = pareto_violations(points);
  for (std::size_t i : flagged)
    err << "warning: frontier point label=" << format_double(points[i].label)
        << " is dominated beyond the Monte Carlo band (kept in output)\n";
}

int run_guarded(const CommandOptions& options, std::ostream& err,
                int (*body)(const CommandOptions&, std::ostream&,
                            std::ostream&),
                std::ostream& out) {
  try {
    return body(options, out, err);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const NumericError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << "\n";
    return kExitNumeric;
  }
}

int frontier_body(const CommandOptions& options, std::ostream& out,
                  std::ostream& err) {
  const RunConfig config = load_with_overrides(options);
  if (config.sweep.mode == SweepMode::kStatic)
    throw ConfigError("sweep.mode", "use the static command for static sweeps");
  ensure_directory(config.out_dir);

  std::vector<TrainedPolicy> policies;
  const std::vector<FrontierPoint> points =
      run_sweep(config.market, config.strategy, config.objective, config.sweep,
                config.train, &policies);

  std::string csv = kFrontierCsvHeader;
  csv += '\n';
  std::size_t failures = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const FrontierPoint& p = points[i];
    if (p.failed) {
      ++failures;
      err << "point label=" << format_double(p.label) << " failed: " << p.error
          << "\n";
      continue;
    }
    csv += csv_row(p);
    csv += '\n';
    if (!policies[i].net.empty())
      write_file_atomic(out_path(config, point_file_name("net", i)),
                        serialize_network(policies[i].net));
    if (!policies[i].theta_tilde.empty())
      write_file_atomic(out_path(config, point_file_name("theta", i)),
                        serialize_vector(policies[i].theta_tilde));
  }
  write_file_atomic(out_path(config, "frontier.csv"), csv);
  report_pareto(points, err);
  out << "frontier: wrote " << (points.size() - failures) << " points to "
      << out_path(config, "frontier.csv") << "\n";
  return failures == 0 ? kExitOk : kExitNumeric;
}

int analytic_body(const CommandOptions& options, std::ostream& out,
                  std::ostream& err) {
  (void)err;
  const RunConfig config = load_with_overrides(options);
  if (config.market.is_heston())
    throw ConfigError("market", "analytic frontier needs a Black-Scholes market");
  if (config.sweep.label_kind != "beta")
    throw ConfigError("sweep.label_kind", "analytic frontier uses beta labels");
  ensure_directory(config.out_dir);

  const BlackScholesModel& model = config.market.bs();
  const AnalyticSolution solution = solve_analytic(model);
  const std::size_t n_sims = config.train.eval_samples;

  std::vector<double> labels = config.sweep.labels;
  std::vector<McEstimate> estimates(labels.size());
  parallel_for(labels.size(), config.threads, [&](std::size_t i) {
    estimates[i] = analytic_frontier_point(labels[i], model, config.market.grid,
                                           n_sims, eval_seed_for(config.seed),
                                           config.market.x0, 1);
  });

  std::vector<std::size_t> order(labels.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return estimates[a].variance < estimates[b].variance;
  });

  std::string csv = std::string(kFrontierCsvHeader) +
                    ",closed_form_mean,closed_form_risk\n";
  for (std::size_t i : order) {
    const FrontierMoments cf = closed_form_frontier(
        labels[i], solution, config.market.grid.horizon, config.market.x0);
    FrontierPoint p;
    p.label_kind = "beta";
    p.label = labels[i];
    p.mean = estimates[i].mean;
    p.risk_kind = "variance";
    p.risk = estimates[i].variance;
    p.n_samples = estimates[i].n_samples;
    p.converged = true;
    csv += csv_row(p);
    csv += ',';
    csv += format_double(cf.mean);
    csv += ',';
    csv += format_double(cf.variance);
    csv += '\n';
  }
  write_file_atomic(out_path(config, "analytic.csv"), csv);
  out << "analytic: wrote " << labels.size() << " points to "
      << out_path(config, "analytic.csv") << "\n";
  return kExitOk;
}

struct CsvFrontier {
  std::vector<double> mean;
  std::vector<double> risk;
};

CsvFrontier load_frontier_csv(const std::string& path) {
  const auto rows = parse_csv(read_file(path));
  if (rows.size() < 2) throw std::invalid_argument("empty frontier CSV: " + path);
  const auto& header = rows.front();
  std::size_t mean_col = std::string::npos, risk_col = std::string::npos;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (trim(header[c]) == "mean") mean_col = c;
    if (trim(header[c]) == "risk") risk_col = c;
  }
  if (mean_col == std::string::npos || risk_col == std::string::npos)
    throw std::invalid_argument("frontier CSV lacks mean/risk columns: " + path);
  CsvFrontier out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    out.mean.push_back(std::strtod(rows[r][mean_col].c_str(), nullptr));
    out.risk.push_back(std::strtod(rows[r][risk_col].c_str(), nullptr));
  }
  return out;
}

// Piecewise-linear interpolation of the comparison frontier's mean at the
// given risk level (clamped to its range).
double interp_mean_at(const CsvFrontier& f, double risk) {
  std::vector<std::size_t> order(f.risk.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return f.risk[a] < f.risk[b]; });
  if (risk <= f.risk[order.front()]) return f.mean[order.front()];
  if (risk >= f.risk[order.back()]) return f.mean[order.back()];
  for (std::size_t i = 1; i < order.size(); ++i) {
    const double r0 = f.risk[order[i - 1]], r1 = f.risk[order[i]];
    if (risk <= r1) {
      const double w = (r1 == r0) ? 0.0 : (risk - r0) / (r1 - r0);
      return f.mean[order[i - 1]] +
             w * (f.mean[order[i]] - f.mean[order[i - 1]]);
    }
  }
  return f.mean[order.back()];
}

int static_body(const CommandOptions& options, std::ostream& out,
                std::ostream& err) {
  RunConfig config = load_with_overrides(options);
  config.sweep.mode = SweepMode::kStatic;
  ensure_directory(config.out_dir);

  std::vector<TrainedPolicy> policies;
  const std::vector<FrontierPoint> points =
      run_sweep(config.market, config.strategy, config.objective, config.sweep,
                config.train, &policies);

  std::string csv = kFrontierCsvHeader;
  csv += '\n';
  std::size_t failures = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].failed) {
      ++failures;
      err << "point label=" << format_double(points[i].label)
          << " failed: " << points[i].error << "\n";
      continue;
    }
    csv += csv_row(points[i]);
    csv += '\n';
    write_file_atomic(out_path(config, point_file_name("theta", i)),
                      serialize_vector(policies[i].theta_static));
  }
  write_file_atomic(out_path(config, "static.csv"), csv);
  report_pareto(points, err);

  if (options.compare_path) {
    const CsvFrontier dynamic = load_frontier_csv(*options.compare_path);
    bool dominated = true;
    for (const FrontierPoint& p : points) {
      if (p.failed) continue;
      const double dyn_mean = interp_mean_at(dynamic, p.risk);
      const double slack = 4.0 * p.mean_std_error;
      const bool point_ok = p.mean <= dyn_mean + slack;
      out << "compare: risk=" << format_double(p.risk)
          << " static_mean=" << format_double(p.mean)
          << " dynamic_mean=" << format_double(dyn_mean)
          << (point_ok ? "" : "  [static exceeds dynamic]") << "\n";
      if (!point_ok) dominated = false;
    }
    out << "static_dominated_by_dynamic=" << (dominated ? "true" : "false")
        << "\n";
  }
  out << "static: wrote " << (points.size() - failures) << " points to "
      << out_path(config, "static.csv") << "\n";
  return failures == 0 ? kExitOk : kExitNumeric;
}

int eval_body(const CommandOptions& options, std::ostream& out,
              std::ostream& err) {
  (void)err;
  const RunConfig config = load_with_overrides(options);
  ensure_directory(config.out_dir);

  TrainedPolicy policy;
  policy.kind = config.sweep.mode == SweepMode::kStatic
                    ? StrategyKind::kConstantMix
                    : config.strategy.kind;
  policy.label_in_state = config.sweep.mode == SweepMode::kGlobalDet ||
                          config.sweep.mode == SweepMode::kGlobalRand;
  policy.scaling.horizon = config.market.grid.horizon;
  policy.scaling.x0 = config.market.x0;
  if (config.market.is_heston()) policy.scaling.v0 = config.market.heston().v0;
  if (policy.label_in_state) {
    double label_max = 1.0;
    if (config.sweep.mode == SweepMode::kGlobalRand)
      label_max = config.objective.sampler.max_value();
    else
      for (double l : config.sweep.labels) label_max = std::max(label_max, l);
    policy.scaling.label_max = label_max;
  }

  const StrategySpec eval_strategy =
      policy.kind == StrategyKind::kConstantMix
          ? StrategySpec{StrategyKind::kConstantMix}
          : config.strategy;

  if (policy.kind == StrategyKind::kConstantMix) {
    if (!options.theta_path)
      throw ConfigError("theta", "constant-mix evaluation needs --theta");
    policy.theta_static = deserialize_vector(read_file(*options.theta_path));
  } else {
    if (!options.network_path)
      throw ConfigError("network", "evaluation needs --network");
    policy.net = deserialize_network(read_file(*options.network_path));
    if (policy.net.output_dim() != config.market.dim())
      throw ConfigError("network", "network output does not match the market");
    if (eval_strategy.is_incremental()) {
      if (!options.theta_path)
        throw ConfigError("theta", "incremental evaluation needs --theta");
      policy.theta_tilde = deserialize_vector(read_file(*options.theta_path));
    }
  }

  const std::vector<double> labels =
      options.labels ? *options.labels : config.sweep.labels;

  std::vector<FrontierPoint> points(labels.size());
  parallel_for(labels.size(), config.threads, [&](std::size_t i) {
    points[i] = evaluate_policy(policy, config.market, eval_strategy,
                                config.objective, config.sweep.label_kind,
                                labels[i], config.train.eval_samples,
                                eval_seed_for(config.seed), 1);
    points[i].converged = true;
  });

  std::string csv = kFrontierCsvHeader;
  csv += '\n';
  for (const FrontierPoint& p : points) {
    csv += csv_row(p);
    csv += '\n';
  }
  write_file_atomic(out_path(config, "eval.csv"), csv);
  out << "eval: wrote " << points.size() << " points to "
      << out_path(config, "eval.csv") << "\n";
  return kExitOk;
}

}  // namespace

std::string serialize_vector(const NumArray& v) {
  std::string out = "FRONTIERLAB-VEC v1\n";
  out += std::to_string(v.rows());
  out += '\n';
  for (std::size_t i = 0; i < v.rows(); ++i) {
    if (i) out += ' ';
    out += format_double(v[i]);
  }
  out += '\n';
  return out;
}

NumArray deserialize_vector(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string magic, version;
  in >> magic >> version;
  if (magic != "FRONTIERLAB-VEC" || version != "v1")
    throw std::invalid_argument("vector file: bad magic or version");
  std::size_t n = 0;
  in >> n;
  if (!in || n == 0) throw std::invalid_argument("vector file: bad length");
  NumArray v(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    in >> v[i];
    if (!in) throw std::invalid_argument("vector file: truncated");
  }
  return v;
}

int cmd_frontier(const CommandOptions& options, std::ostream& out,
                 std::ostream& err) {
  return run_guarded(options, err, frontier_body, out);
}

int cmd_analytic(const CommandOptions& options, std::ostream& out,
                 std::ostream& err) {
  return run_guarded(options, err, analytic_body, out);
}

int cmd_static(const CommandOptions& options, std::ostream& out,
               std::ostream& err) {
  return run_guarded(options, err, static_body, out);
}

int cmd_eval(const CommandOptions& options, std::ostream& out,
             std::ostream& err) {
  return run_guarded(options, err, eval_body, out);
}

}  // namespace frontierlab
