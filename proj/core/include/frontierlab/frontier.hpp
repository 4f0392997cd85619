#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "frontierlab/analytic.hpp"
#include "frontierlab/market.hpp"
#include "frontierlab/network.hpp"
#include "frontierlab/objectives.hpp"
#include "frontierlab/strategy.hpp"

namespace frontierlab {

struct TrainConfig {
  std::size_t batch_size = 300;
  std::size_t n_iterations = 15000;
  double lr_initial = 2.5e-3;
  double lr_final = 2.5e-4;
  std::uint64_t seed = 1;
  std::size_t eval_samples = 100000;
  std::size_t stabilization_every = 100;
  std::size_t stabilization_samples = 10000;
  double stabilization_tol = 1e-3;
  std::size_t n_restarts = 1;
  std::size_t threads = 1;
  // Point/static sweeps: train labels sequentially from the lowest-risk
  // label up, warm-starting each from its neighbor. Low-beta (high-leverage)
  // points are not reachable by cold Adam runs at these learning rates; the
  // continuation path is.
  bool warm_start_chain = false;

  void validate() const;
  LrSchedule schedule() const {
    return LrSchedule{lr_initial, lr_final, n_iterations};
  }
};

struct FrontierPoint {
  std::string label_kind = "beta";   // "beta" or "gamma"
  double label = 0.0;
  double mean = 0.0;
  std::string risk_kind = "variance";  // "variance" or "cvar"
  double risk = 0.0;
  std::size_t n_samples = 0;
  double max_constraint_violation = 0.0;
  bool converged = false;

  double mean_std_error = 0.0;
  std::vector<double> objective_trace;
  bool failed = false;
  std::string error;
};

enum class SweepMode { kPoint, kGlobalDet, kGlobalRand, kStatic };

SweepMode sweep_mode_from_name(std::string_view name);
std::string sweep_mode_name(SweepMode mode);

struct SweepSpec {
  SweepMode mode = SweepMode::kPoint;
  std::string label_kind = "beta";
  std::vector<double> labels;

  void validate() const;
};

// The trained artifact: a network for policy kinds that use one, the initial
// weight vector for incremental kinds, the raw parameters for constant mix.
// Carries its input scaling; evaluation must normalize exactly as training.
struct TrainedPolicy {
  StrategyKind kind = StrategyKind::kUnconstrained;
  NetworkParams net;
  NumArray theta_tilde;
  NumArray theta_static;
  StateScaling scaling;
  bool label_in_state = false;  // set for globally trained networks
};

struct TrainResult {
  TrainedPolicy policy;
  std::vector<double> objective_trace;
  bool converged = false;
  std::optional<std::size_t> diverged_at;
  double best_objective = 0.0;
  bool ok = false;
  std::string error;
};

// Runs n_iterations of simulate -> rollout -> loss -> backward -> Adam with
// the linearly decaying learning rate, recording a high-sample objective
// estimate every stabilization_every iterations. With n_restarts > 1 the
// restart with the best final estimate wins. A warm start, when given,
// replaces the random initialization of the first restart.
TrainResult train_point(const MarketModel& market, const StrategySpec& strategy,
                        const ObjectiveSpec& objective, double label,
                        const TrainConfig& config,
                        const TrainedPolicy* warm_start = nullptr);

// One label-conditioned network serving the whole grid. The per-iteration
// loss sums over the grid (deterministic mode) or averages over sampled
// labels (randomized mode).
TrainResult train_global(const MarketModel& market,
                         const StrategySpec& strategy,
                         const ObjectiveSpec& objective, const SweepSpec& sweep,
                         const TrainConfig& config);

// Adam directly on d constant-mix parameters; no network.
TrainResult static_optimize(const MarketModel& market,
                            const ObjectiveSpec& objective, double label,
                            const TrainConfig& config,
                            const TrainedPolicy* warm_start = nullptr);

// Out-of-sample evaluation on fresh paths: empirical mean, risk (variance or
// CVaR at the configured alpha) and the maximum constraint violation seen
// along the weight trajectory.
FrontierPoint evaluate_policy(const TrainedPolicy& policy,
                              const MarketModel& market,
                              const StrategySpec& strategy,
                              const ObjectiveSpec& objective,
                              const std::string& label_kind, double label,
                              std::size_t eval_samples, std::uint64_t eval_seed,
                              std::size_t threads = 1);

// Full frontier construction. Point/static modes train one artifact per
// label (in parallel); global modes train once and evaluate at every label.
// Output sorted by risk; failed points carry their error and are kept.
std::vector<FrontierPoint> run_sweep(const MarketModel& market,
                                     const StrategySpec& strategy,
                                     const ObjectiveSpec& objective,
                                     const SweepSpec& sweep,
                                     const TrainConfig& config,
                                     std::vector<TrainedPolicy>* policies = nullptr);

// Converged iff the relative drift of the objective estimate over the last
// `window` checkpoints stays below `rel_tol`.
bool stabilization_check(std::span<const double> trace, double rel_tol = 1e-3,
                         std::size_t window = 10);

// Indices of sorted frontier points dominated beyond the Monte Carlo error
// band by a lower-risk point (flagged, never dropped).
std::vector<std::size_t> pareto_violations(
    std::span<const FrontierPoint> sorted_points, double band_sigmas = 4.0);

// Evaluation runs on a stream disjoint from training by a fixed offset.
std::uint64_t eval_seed_for(std::uint64_t train_seed);

// beta_i = (2i/K)^2 grid used for CVaR frontiers.
std::vector<double> cvar_beta_grid(std::size_t count);

// Gamma grid induced by a beta grid through the analytic frontier mean.
std::vector<double> gamma_grid_from_betas(std::span<const double> betas,
                                          const AnalyticSolution& solution,
                                          double horizon, double x0);

}  // namespace frontierlab
