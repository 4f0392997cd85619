#include "frontierlab/frontier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "frontierlab/parallel.hpp"
#include "frontierlab/portfolio.hpp"
#include "frontierlab/rng.hpp"

namespace frontierlab {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

constexpr std::uint64_t kEvalSeedOffset = 1000003;
constexpr std::size_t kEvalChunk = 8192;

// Reported violations ignore float rounding at this level: simplex rows sum
// to 1 only up to ~1e-16, which is not a constraint breach.
constexpr double kViolationDeadband = 1e-12;

std::uint64_t mix_restart_iter(std::size_t restart, std::size_t iter) {
  return (static_cast<std::uint64_t>(restart) << 40) ^
         static_cast<std::uint64_t>(iter);
}

// ---------------------------------------------------------------------------
// Plain (tape-free) evaluation
// ---------------------------------------------------------------------------

struct PenaltySums {
  double local = 0.0;
  double box = 0.0;
  double budget = 0.0;
};

struct BlockOutcome {
  PenaltySums penalties;  // sums over paths of per-path totals
  double max_violation = 0.0;
};

// Rolls out `count` paths of `paths` with plain arithmetic, mirroring the
// tape-side policy exactly. Terminal wealth lands in `terminal`.
BlockOutcome rollout_block_plain(const TrainedPolicy& policy,
                                 const MarketModel& market,
                                 const StrategySpec& strategy,
                                 std::optional<double> label_input,
                                 std::uint64_t perm_seed, const PathSet& paths,
                                 std::size_t count,
                                 std::span<double> terminal) {
  const std::size_t d = market.dim();
  const std::size_t n_steps = market.grid.n_steps;
  const double x0 = market.x0;
  const bool heston = paths.has_variances();
  const bool fixed_equal =
      strategy.initial_weights == InitialWeightsMode::kFixedEqual;

  BlockOutcome outcome;
  std::vector<double> wealth(count, x0);
  NumArray weights(count, d);
  NumArray prev_weights;
  NumArray running_sum;
  NumArray state;
  NumArray static_weights;

  if (strategy.kind == StrategyKind::kConstantMix)
    static_weights = constant_mix_weights_plain(policy.theta_static);

  std::size_t d0 = 0;
  if (strategy.uses_network()) {
    d0 = policy.net.input_dim();
    state = NumArray(count, d0);
  }

  const NumArray* lo = strategy.bounds ? &strategy.bounds->lo : nullptr;
  const NumArray* hi = strategy.bounds ? &strategy.bounds->hi : nullptr;
  const NumArray* eta =
      strategy.move_limit ? &strategy.move_limit->eta : nullptr;

  for (std::size_t i = 0; i < n_steps; ++i) {
    const bool net_dates = strategy.uses_network() &&
                           !(i == 0 && fixed_equal && !strategy.is_incremental());
    NumArray net_out;
    if (net_dates && !(strategy.is_incremental() && i == 0)) {
      const double t_norm =
          static_cast<double>(i) / static_cast<double>(n_steps);
      for (std::size_t p = 0; p < count; ++p) {
        double* row = state.data() + p * d0;
        std::size_t c = 0;
        row[c++] = t_norm;
        row[c++] = wealth[p] / x0;
        if (heston)
          for (std::size_t j = 0; j < d; ++j)
            row[c++] = paths.variance(p, i, j) / policy.scaling.v0[j];
        if (label_input.has_value())
          row[c++] = *label_input / policy.scaling.label_max;
      }
      net_out = network_forward_plain(policy.net, state);
    }

    switch (strategy.kind) {
      case StrategyKind::kConstantMix:
        for (std::size_t p = 0; p < count; ++p)
          for (std::size_t j = 0; j < d; ++j)
            weights(p, j) = static_weights[j];
        break;
      case StrategyKind::kUnconstrained:
      case StrategyKind::kUnconstrainedAmounts:
      case StrategyKind::kSimplex:
      case StrategyKind::kBoxProjected: {
        if (i == 0 && fixed_equal) {
          weights.fill(1.0 / static_cast<double>(d));
          break;
        }
        if (strategy.kind == StrategyKind::kUnconstrained ||
            strategy.kind == StrategyKind::kUnconstrainedAmounts) {
          weights = std::move(net_out);
        } else if (strategy.kind == StrategyKind::kSimplex) {
          weights = std::move(net_out);
          for (std::size_t p = 0; p < count; ++p) {
            double total = 0.0;
            for (std::size_t j = 0; j < d; ++j) total += weights(p, j);
            for (std::size_t j = 0; j < d; ++j) weights(p, j) /= total;
          }
        } else {
          weights = std::move(net_out);
          for (std::size_t p = 0; p < count; ++p)
            for (std::size_t j = 0; j < d; ++j)
              weights(p, j) = (*lo)[j] + weights(p, j) * ((*hi)[j] - (*lo)[j]);
          const auto order = strategy.permute_projection
                                 ? permuted_order(d, perm_seed, i)
                                 : natural_order(d);
          for (std::size_t p = 0; p < count; ++p)
            project_to_budget_plain(
                std::span<double>(weights.data() + p * d, d), *strategy.bounds,
                order);
        }
        break;
      }
      case StrategyKind::kIncremental:
      case StrategyKind::kIncrementalClipped: {
        if (i == 0) {
          for (std::size_t p = 0; p < count; ++p)
            for (std::size_t j = 0; j < d; ++j)
              weights(p, j) = policy.theta_tilde[j];
        } else {
          if (running_sum.empty())
            running_sum = std::move(net_out);
          else
            for (std::size_t k = 0; k < running_sum.size(); ++k)
              running_sum[k] += net_out[k];
          for (std::size_t p = 0; p < count; ++p)
            for (std::size_t j = 0; j < d; ++j)
              weights(p, j) =
                  policy.theta_tilde[j] + (*eta)[j] * running_sum(p, j);
        }
        if (strategy.kind == StrategyKind::kIncrementalClipped)
          for (std::size_t p = 0; p < count; ++p)
            for (std::size_t j = 0; j < d; ++j)
              weights(p, j) =
                  std::min(std::max(weights(p, j), (*lo)[j]), (*hi)[j]);
        break;
      }
    }

    // Constraint bookkeeping over the realized trajectory.
    for (std::size_t p = 0; p < count; ++p) {
      double row_total = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double w = weights(p, j);
        row_total += w;
        if (lo) {
          const double above = w - (*hi)[j];
          const double below = (*lo)[j] - w;
          if (above > 0.0) outcome.penalties.box += above;
          if (below > 0.0) outcome.penalties.box += below;
          const double box_gap = std::max(above, below);
          if (box_gap > kViolationDeadband)
            outcome.max_violation = std::max(outcome.max_violation, box_gap);
        }
        if (eta && i > 0) {
          const double move = std::fabs(w - prev_weights(p, j)) - (*eta)[j];
          if (move > 0.0) {
            outcome.penalties.local += move;
            if (move > kViolationDeadband)
              outcome.max_violation = std::max(outcome.max_violation, move);
          }
        }
      }
      const double budget_gap = std::fabs(row_total - 1.0);
      outcome.penalties.budget += budget_gap;
      if (strategy.kind != StrategyKind::kUnconstrained &&
          strategy.kind != StrategyKind::kUnconstrainedAmounts &&
          budget_gap > kViolationDeadband)
        outcome.max_violation = std::max(outcome.max_violation, budget_gap);
    }

    const bool amounts = strategy.kind == StrategyKind::kUnconstrainedAmounts;
    for (std::size_t p = 0; p < count; ++p) {
      double step_return = 0.0;
      for (std::size_t j = 0; j < d; ++j)
        step_return += weights(p, j) * paths.yield(p, i, j);
      if (amounts)
        wealth[p] += step_return;
      else
        wealth[p] *= 1.0 + step_return;
    }
    prev_weights = weights;
  }

  for (std::size_t p = 0; p < count; ++p) terminal[p] = wealth[p];
  return outcome;
}

struct PlainEval {
  double mean = 0.0;
  double variance = 0.0;
  double risk = 0.0;
  double objective = 0.0;
  double max_violation = 0.0;
  double mean_std_error = 0.0;
  std::size_t n_samples = 0;
};

double tail_mean_losses(std::vector<double> losses, double alpha) {
  const std::size_t k = cvar_tail_count(alpha, losses.size());
  std::nth_element(losses.begin(), losses.begin() + (k - 1), losses.end(),
                   std::greater<double>());
  std::partial_sort(losses.begin(), losses.begin() + k, losses.begin() + k,
                    std::greater<double>());
  double acc = 0.0;
  for (std::size_t i = 0; i < k; ++i) acc += losses[i];
  return acc / static_cast<double>(k);
}

PlainEval plain_evaluate(const TrainedPolicy& policy, const MarketModel& market,
                         const StrategySpec& strategy,
                         const ObjectiveSpec& objective,
                         std::optional<double> label_input, double label,
                         std::size_t n_samples, std::uint64_t seed,
                         std::size_t threads) {
  require(n_samples >= 2, "evaluate: need at least 2 samples");
  const std::size_t n_chunks = (n_samples + kEvalChunk - 1) / kEvalChunk;
  std::vector<double> terminal(n_samples);
  std::vector<BlockOutcome> outcomes(n_chunks);

  parallel_for(n_chunks, threads, [&](std::size_t c) {
    const std::size_t first = c * kEvalChunk;
    const std::size_t count = std::min(kEvalChunk, n_samples - first);
    const PathSet paths = simulate(market, count, seed, first);
    outcomes[c] = rollout_block_plain(
        policy, market, strategy, label_input, seed, paths, count,
        std::span<double>(terminal.data() + first, count));
  });

  PenaltySums pen;
  double max_violation = 0.0;
  for (const BlockOutcome& o : outcomes) {
    pen.local += o.penalties.local;
    pen.box += o.penalties.box;
    pen.budget += o.penalties.budget;
    max_violation = std::max(max_violation, o.max_violation);
  }

  PlainEval out;
  out.n_samples = n_samples;
  out.max_violation = max_violation;
  const double inv_n = 1.0 / static_cast<double>(n_samples);
  double mean = 0.0;
  for (double x : terminal) mean += x;
  mean *= inv_n;
  double m2 = 0.0;
  for (double x : terminal) m2 += (x - mean) * (x - mean);
  out.mean = mean;
  out.variance = m2 * inv_n;
  out.mean_std_error = std::sqrt(out.variance * inv_n);

  double base = 0.0;
  switch (objective.criterion) {
    case Criterion::kMvDirect:
      out.risk = out.variance;
      base = -mean + label * out.variance;
      break;
    case Criterion::kMvAux: {
      out.risk = out.variance;
      double acc = 0.0;
      for (double x : terminal) acc += (x - label) * (x - label);
      base = acc * inv_n;
      break;
    }
    case Criterion::kCvar: {
      std::vector<double> losses(n_samples);
      for (std::size_t i = 0; i < n_samples; ++i)
        losses[i] = market.x0 - terminal[i];
      out.risk = tail_mean_losses(std::move(losses), objective.alpha);
      base = -mean + label * out.risk;
      break;
    }
  }

  double penalty = 0.0;
  const double scale = inv_n / objective.epsilon;
  switch (objective.penalty_model) {
    case PenaltyModel::kNone: break;
    case PenaltyModel::kM1: penalty = (pen.local + pen.box) * scale; break;
    case PenaltyModel::kM2: penalty = (pen.budget + pen.box) * scale; break;
    case PenaltyModel::kM3: penalty = pen.budget * scale; break;
    case PenaltyModel::kM4: penalty = pen.local * scale; break;
  }
  out.objective = base + penalty;
  return out;
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

struct ParamPack {
  NetworkParams net;
  NumArray theta_tilde;
  NumArray theta_static;
  bool theta_tilde_trainable = false;

  std::vector<NumArray*> trainables() {
    std::vector<NumArray*> list;
    if (!net.empty()) {
      auto net_params = net.param_list();
      list.insert(list.end(), net_params.begin(), net_params.end());
    }
    if (theta_tilde_trainable) list.push_back(&theta_tilde);
    if (!theta_static.empty()) list.push_back(&theta_static);
    return list;
  }
};

struct TrainSetup {
  const MarketModel* market = nullptr;
  const StrategySpec* strategy = nullptr;
  const ObjectiveSpec* objective = nullptr;
  SweepMode mode = SweepMode::kPoint;
  double label = 0.0;                 // point/static modes
  std::vector<double> labels;        // global_det grid
  StateScaling scaling;
  TrainConfig config;
  const TrainedPolicy* warm_start = nullptr;
};

ParamPack init_params(const TrainSetup& setup, std::size_t restart) {
  const std::size_t d = setup.market->dim();
  ParamPack pack;
  const std::uint64_t init_seed = rng::derive_stream(
      setup.config.seed, rng::StreamTag::kInit, restart);

  const bool warm = restart == 0 && setup.warm_start != nullptr &&
                    !(setup.warm_start->net.empty() &&
                      setup.warm_start->theta_static.empty());
  if (setup.mode == SweepMode::kStatic) {
    pack.theta_static =
        warm ? setup.warm_start->theta_static : NumArray(d, 1);
    return pack;
  }

  std::size_t d0 = 2;
  if (setup.market->is_heston()) d0 += d;
  const bool label_aware = setup.mode == SweepMode::kGlobalDet ||
                           setup.mode == SweepMode::kGlobalRand;
  if (label_aware) d0 += 1;
  const std::size_t m = hidden_width_for(d);
  pack.net = init_network({d0, m, m, m, d}, setup.strategy->required_head(),
                          init_seed);
  if (warm && setup.warm_start->net.layer_dims == pack.net.layer_dims &&
      setup.warm_start->net.head == pack.net.head)
    pack.net = setup.warm_start->net;

  if (setup.strategy->is_incremental()) {
    pack.theta_tilde = NumArray(d, 1, 1.0 / static_cast<double>(d));
    if (warm && setup.warm_start->theta_tilde.rows() == d)
      pack.theta_tilde = setup.warm_start->theta_tilde;
    pack.theta_tilde_trainable =
        setup.strategy->initial_weights == InitialWeightsMode::kOptimized;
  }
  return pack;
}

TrainedPolicy to_policy(const ParamPack& pack, const TrainSetup& setup) {
  TrainedPolicy policy;
  policy.kind = setup.mode == SweepMode::kStatic ? StrategyKind::kConstantMix
                                                 : setup.strategy->kind;
  policy.net = pack.net;
  policy.theta_tilde = pack.theta_tilde;
  policy.theta_static = pack.theta_static;
  policy.scaling = setup.scaling;
  policy.label_in_state = setup.mode == SweepMode::kGlobalDet ||
                          setup.mode == SweepMode::kGlobalRand;
  return policy;
}

const StrategySpec& static_strategy() {
  static const StrategySpec spec{StrategyKind::kConstantMix};
  return spec;
}

// One gradient iteration; returns the training-batch loss.
double train_iteration(Tape& tape, ParamPack& pack, AdamState& adam,
                       const TrainSetup& setup, std::size_t restart,
                       std::size_t iter) {
  const TrainConfig& config = setup.config;
  const StrategySpec& strategy = setup.mode == SweepMode::kStatic
                                     ? static_strategy()
                                     : *setup.strategy;
  tape.reset();

  BoundNetwork bound;
  NodeId theta_tilde_id = kNoNode;
  NodeId theta_static_id = kNoNode;
  if (!pack.net.empty()) bound = bind_network(tape, pack.net);
  if (!pack.theta_tilde.empty()) theta_tilde_id = tape.leaf(pack.theta_tilde);
  if (!pack.theta_static.empty()) theta_static_id = tape.leaf(pack.theta_static);

  const std::uint64_t iter_mix = mix_restart_iter(restart, iter);
  const std::uint64_t perm_seed =
      rng::derive_stream(config.seed, rng::StreamTag::kPermutation, iter_mix);

  auto make_rollout = [&](std::optional<double> label_input,
                          std::size_t batch,
                          std::uint64_t sim_seed) -> std::pair<Rollout, PathSet> {
    PathSet paths = simulate(*setup.market, batch, sim_seed);
    TapePolicy::Inputs inputs;
    inputs.spec = &strategy;
    inputs.scaling = setup.scaling;
    inputs.grid = &setup.market->grid;
    inputs.net = pack.net.empty() ? nullptr : &bound;
    inputs.theta_tilde = theta_tilde_id;
    inputs.theta_static = theta_static_id;
    inputs.paths = &paths;
    inputs.first_path = 0;
    inputs.batch = batch;
    inputs.label_input = label_input;
    inputs.perm_seed = perm_seed;
    TapePolicy policy(tape, std::move(inputs));
    Rollout r =
        rollout_additive(tape, policy, paths, 0, batch, setup.market->x0);
    return {std::move(r), std::move(paths)};
  };

  NodeId loss = kNoNode;
  switch (setup.mode) {
    case SweepMode::kPoint:
    case SweepMode::kStatic: {
      const std::uint64_t sim_seed =
          rng::derive_stream(config.seed, rng::StreamTag::kBatch, iter_mix, 0);
      auto [rollout, paths] =
          make_rollout(std::nullopt, config.batch_size, sim_seed);
      loss = assemble_constrained_loss(tape, rollout, *setup.objective,
                                       strategy, setup.label,
                                       setup.market->x0);
      break;
    }
    case SweepMode::kGlobalDet: {
      std::vector<Rollout> rollouts;
      rollouts.reserve(setup.labels.size());
      for (std::size_t k = 0; k < setup.labels.size(); ++k) {
        const std::uint64_t sim_seed = rng::derive_stream(
            config.seed, rng::StreamTag::kBatch, iter_mix, k);
        auto [rollout, paths] =
            make_rollout(setup.labels[k], config.batch_size, sim_seed);
        rollouts.push_back(std::move(rollout));
      }
      loss = global_det_loss(tape, rollouts, setup.labels, *setup.objective,
                             strategy, setup.market->x0);
      break;
    }
    case SweepMode::kGlobalRand: {
      const std::size_t groups = setup.objective->subgroups;
      const std::size_t group_batch = config.batch_size / groups;
      rng::Stream beta_stream(rng::derive_stream(
          config.seed, rng::StreamTag::kBetaDraw, iter_mix));
      std::vector<double> drawn(groups);
      for (double& b : drawn) b = setup.objective->sampler.sample(beta_stream);
      std::vector<Rollout> rollouts;
      rollouts.reserve(groups);
      for (std::size_t g = 0; g < groups; ++g) {
        const std::uint64_t sim_seed = rng::derive_stream(
            config.seed, rng::StreamTag::kBatch, iter_mix, g);
        auto [rollout, paths] = make_rollout(drawn[g], group_batch, sim_seed);
        rollouts.push_back(std::move(rollout));
      }
      loss = global_rand_loss(tape, rollouts, drawn, *setup.objective,
                              strategy, setup.market->x0);
      break;
    }
  }

  const double loss_value = tape.value(loss).value();
  tape.backward(loss);

  std::vector<NumArray*> params = pack.trainables();
  std::vector<const NumArray*> grads;
  grads.reserve(params.size());
  if (!pack.net.empty()) {
    for (std::size_t l = 0; l < pack.net.weights.size(); ++l) {
      grads.push_back(&tape.grad(bound.weight_ids[l]));
      grads.push_back(&tape.grad(bound.bias_ids[l]));
    }
  }
  if (pack.theta_tilde_trainable) grads.push_back(&tape.grad(theta_tilde_id));
  if (!pack.theta_static.empty()) grads.push_back(&tape.grad(theta_static_id));

  adam_step(params, grads, adam, lr_at(config.schedule(), iter));
  return loss_value;
}

// High-sample objective estimate on the fixed stabilization stream.
double objective_estimate(const ParamPack& pack, const TrainSetup& setup) {
  const TrainedPolicy policy = to_policy(pack, setup);
  const StrategySpec& strategy = setup.mode == SweepMode::kStatic
                                     ? static_strategy()
                                     : *setup.strategy;
  const bool label_aware = setup.mode == SweepMode::kGlobalDet ||
                           setup.mode == SweepMode::kGlobalRand;
  const std::uint64_t stab_seed = rng::derive_stream(
      setup.config.seed, rng::StreamTag::kStabilization);

  if (!label_aware) {
    return plain_evaluate(policy, *setup.market, strategy, *setup.objective,
                          std::nullopt, setup.label,
                          setup.config.stabilization_samples, stab_seed,
                          setup.config.threads)
        .objective;
  }
  // Global modes: stabilization tracks the grid objective (sum over labels,
  // as in the deterministic loss; the randomized loss estimates its mean).
  double total = 0.0;
  for (double label : setup.labels) {
    total += plain_evaluate(policy, *setup.market, strategy, *setup.objective,
                            label, label, setup.config.stabilization_samples,
                            stab_seed, setup.config.threads)
                 .objective;
  }
  if (setup.mode == SweepMode::kGlobalRand)
    total /= static_cast<double>(setup.labels.size());
  return total;
}

TrainResult train_common(TrainSetup setup) {
  const TrainConfig& config = setup.config;
  config.validate();
  if (setup.mode != SweepMode::kStatic)
    setup.strategy->validate(setup.market->dim());
  setup.objective->validate(setup.mode == SweepMode::kStatic
                                ? static_strategy()
                                : *setup.strategy);
  if (setup.mode == SweepMode::kGlobalRand) {
    require(config.batch_size % setup.objective->subgroups == 0,
            "train: batch_size must be divisible by the subgroup count");
    require(config.batch_size / setup.objective->subgroups >= 2,
            "train: conditional subgroups need at least 2 samples each");
  }
  if (setup.mode == SweepMode::kGlobalDet)
    require(!setup.labels.empty(), "train: empty label grid");

  TrainResult best;
  best.best_objective = std::numeric_limits<double>::infinity();
  std::optional<std::size_t> first_divergence;

  for (std::size_t restart = 0; restart < config.n_restarts; ++restart) {
    ParamPack pack = init_params(setup, restart);
    auto param_ptrs = pack.trainables();
    std::vector<const NumArray*> shapes(param_ptrs.begin(), param_ptrs.end());
    AdamState adam = make_adam_state(shapes);
    Tape tape;

    std::vector<double> trace;
    std::optional<std::size_t> diverged_at;
    for (std::size_t iter = 0; iter < config.n_iterations; ++iter) {
      try {
        train_iteration(tape, pack, adam, setup, restart, iter);
      } catch (const NumericError&) {
        diverged_at = iter;
        break;
      }
      const bool checkpoint =
          (iter + 1) % config.stabilization_every == 0 ||
          iter + 1 == config.n_iterations;
      if (checkpoint) {
        const double estimate = objective_estimate(pack, setup);
        if (!std::isfinite(estimate)) {
          diverged_at = iter;
          break;
        }
        trace.push_back(estimate);
      }
    }

    if (diverged_at.has_value()) {
      if (!first_divergence) first_divergence = diverged_at;
      continue;
    }
    const double final_objective =
        trace.empty() ? objective_estimate(pack, setup) : trace.back();
    if (final_objective < best.best_objective) {
      best.best_objective = final_objective;
      best.policy = to_policy(pack, setup);
      best.objective_trace = std::move(trace);
      best.ok = true;
    }
  }

  if (!best.ok) {
    best.diverged_at = first_divergence;
    best.error = first_divergence.has_value()
                     ? "training diverged at iteration " +
                           std::to_string(*first_divergence) +
                           " in every restart"
                     : "training produced no result";
    return best;
  }
  best.converged = best.objective_trace.size() >= 2 &&
                   stabilization_check(best.objective_trace,
                                       config.stabilization_tol);
  return best;
}

}  // namespace

void TrainConfig::validate() const {
  require(batch_size >= 1, "train config: batch_size must be positive");
  require(n_iterations >= 1, "train config: n_iterations must be positive");
  require(lr_initial >= lr_final && lr_final > 0.0,
          "train config: need lr_initial >= lr_final > 0");
  require(eval_samples >= batch_size,
          "train config: eval_samples must be >= batch_size");
  require(stabilization_every >= 1 && stabilization_samples >= 2,
          "train config: stabilization settings must be positive");
  require(n_restarts >= 1, "train config: n_restarts must be positive");
}

SweepMode sweep_mode_from_name(std::string_view name) {
  if (name == "point") return SweepMode::kPoint;
  if (name == "global_det") return SweepMode::kGlobalDet;
  if (name == "global_rand") return SweepMode::kGlobalRand;
  if (name == "static") return SweepMode::kStatic;
  throw std::invalid_argument("unknown sweep mode: " + std::string(name));
}

std::string sweep_mode_name(SweepMode mode) {
  switch (mode) {
    case SweepMode::kPoint: return "point";
    case SweepMode::kGlobalDet: return "global_det";
    case SweepMode::kGlobalRand: return "global_rand";
    case SweepMode::kStatic: return "static";
  }
  return "?";
}

void SweepSpec::validate() const {
  require(!labels.empty(), "sweep: empty label grid");
  require(label_kind == "beta" || label_kind == "gamma",
          "sweep: label_kind must be beta or gamma");
}

std::uint64_t eval_seed_for(std::uint64_t train_seed) {
  return train_seed + kEvalSeedOffset;
}

std::vector<double> cvar_beta_grid(std::size_t count) {
  require(count >= 1, "cvar grid: count must be positive");
  std::vector<double> grid(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double x = 2.0 * static_cast<double>(i) / static_cast<double>(count);
    grid[i] = x * x;
  }
  return grid;
}

std::vector<double> gamma_grid_from_betas(std::span<const double> betas,
                                          const AnalyticSolution& solution,
                                          double horizon, double x0) {
  std::vector<double> gammas;
  gammas.reserve(betas.size());
  for (double beta : betas) {
    const FrontierMoments m = closed_form_frontier(beta, solution, horizon, x0);
    gammas.push_back(gamma_from_beta(beta, m.mean));
  }
  return gammas;
}

static StateScaling make_scaling(const MarketModel& market, double label_max) {
  StateScaling scaling;
  scaling.horizon = market.grid.horizon;
  scaling.x0 = market.x0;
  if (market.is_heston()) scaling.v0 = market.heston().v0;
  scaling.label_max = label_max;
  return scaling;
}

TrainResult train_point(const MarketModel& market, const StrategySpec& strategy,
                        const ObjectiveSpec& objective, double label,
                        const TrainConfig& config,
                        const TrainedPolicy* warm_start) {
  TrainSetup setup;
  setup.market = &market;
  setup.strategy = &strategy;
  setup.objective = &objective;
  setup.mode = SweepMode::kPoint;
  setup.label = label;
  setup.scaling = make_scaling(market, 1.0);
  setup.config = config;
  setup.warm_start = warm_start;
  return train_common(std::move(setup));
}

TrainResult train_global(const MarketModel& market,
                         const StrategySpec& strategy,
                         const ObjectiveSpec& objective, const SweepSpec& sweep,
                         const TrainConfig& config) {
  sweep.validate();
  require(sweep.mode == SweepMode::kGlobalDet ||
              sweep.mode == SweepMode::kGlobalRand,
          "train_global: sweep mode must be a global mode");
  TrainSetup setup;
  setup.market = &market;
  setup.strategy = &strategy;
  setup.objective = &objective;
  setup.mode = sweep.mode;
  setup.labels = sweep.labels;
  double label_max = 1.0;
  if (sweep.mode == SweepMode::kGlobalRand) {
    label_max = objective.sampler.max_value();
  } else {
    for (double l : sweep.labels) label_max = std::max(label_max, l);
  }
  setup.scaling = make_scaling(market, label_max);
  setup.config = config;
  return train_common(std::move(setup));
}

TrainResult static_optimize(const MarketModel& market,
                            const ObjectiveSpec& objective, double label,
                            const TrainConfig& config,
                            const TrainedPolicy* warm_start) {
  TrainSetup setup;
  setup.market = &market;
  setup.strategy = &static_strategy();
  setup.objective = &objective;
  setup.mode = SweepMode::kStatic;
  setup.label = label;
  setup.scaling = make_scaling(market, 1.0);
  setup.config = config;
  setup.warm_start = warm_start;
  return train_common(std::move(setup));
}

FrontierPoint evaluate_policy(const TrainedPolicy& policy,
                              const MarketModel& market,
                              const StrategySpec& strategy,
                              const ObjectiveSpec& objective,
                              const std::string& label_kind, double label,
                              std::size_t eval_samples, std::uint64_t eval_seed,
                              std::size_t threads) {
  const PlainEval eval = plain_evaluate(
      policy, market, strategy, objective,
      policy.label_in_state ? std::optional<double>(label) : std::nullopt,
      label, eval_samples, eval_seed, threads);

  FrontierPoint point;
  point.label_kind = label_kind;
  point.label = label;
  point.mean = eval.mean;
  point.risk_kind = objective.is_cvar() ? "cvar" : "variance";
  point.risk = eval.risk;
  point.n_samples = eval.n_samples;
  point.max_constraint_violation = eval.max_violation;
  point.mean_std_error = eval.mean_std_error;
  return point;
}

std::vector<FrontierPoint> run_sweep(const MarketModel& market,
                                     const StrategySpec& strategy,
                                     const ObjectiveSpec& objective,
                                     const SweepSpec& sweep,
                                     const TrainConfig& config,
                                     std::vector<TrainedPolicy>* policies) {
  sweep.validate();
  const std::size_t n_labels = sweep.labels.size();
  std::vector<FrontierPoint> points(n_labels);
  std::vector<TrainedPolicy> trained(n_labels);
  const std::uint64_t eval_seed = eval_seed_for(config.seed);

  const bool per_label_training =
      sweep.mode == SweepMode::kPoint || sweep.mode == SweepMode::kStatic;

  if (per_label_training) {
    const std::size_t total_threads =
        config.threads == 0 ? default_thread_count() : config.threads;

    auto train_one = [&](std::size_t i, const TrainConfig& local,
                         const TrainedPolicy* warm) {
      const double label = sweep.labels[i];
      const TrainResult result =
          sweep.mode == SweepMode::kStatic
              ? static_optimize(market, objective, label, local, warm)
              : train_point(market, strategy, objective, label, local, warm);
      FrontierPoint point;
      if (!result.ok) {
        point.label_kind = sweep.label_kind;
        point.label = label;
        point.risk_kind = objective.is_cvar() ? "cvar" : "variance";
        point.failed = true;
        point.error = result.error;
      } else {
        const StrategySpec& eval_strategy =
            sweep.mode == SweepMode::kStatic ? static_strategy() : strategy;
        point = evaluate_policy(result.policy, market, eval_strategy, objective,
                                sweep.label_kind, label, config.eval_samples,
                                eval_seed, local.threads);
        point.converged = result.converged;
        point.objective_trace = result.objective_trace;
      }
      points[i] = std::move(point);
      trained[i] = result.policy;
      return result.ok;
    };

    if (config.warm_start_chain) {
      // Continuation: walk the labels from the least to the most aggressive
      // point, seeding each training with its neighbor's solution. Beta
      // grids get harder as beta falls, gamma grids as gamma grows.
      std::vector<std::size_t> order(n_labels);
      for (std::size_t i = 0; i < n_labels; ++i) order[i] = i;
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) {
                         return sweep.label_kind == "gamma"
                                    ? sweep.labels[a] < sweep.labels[b]
                                    : sweep.labels[a] > sweep.labels[b];
                       });
      TrainConfig local = config;
      local.threads = total_threads;
      const TrainedPolicy* warm = nullptr;
      for (std::size_t i : order) {
        const bool ok = train_one(i, local, warm);
        if (ok) warm = &trained[i];
      }
    } else {
      const std::size_t outer = std::min(total_threads, n_labels);
      const std::size_t inner = std::max<std::size_t>(
          1, total_threads / std::max<std::size_t>(outer, 1));
      parallel_for(n_labels, outer, [&](std::size_t i) {
        TrainConfig local = config;
        local.threads = inner;
        train_one(i, local, nullptr);
      });
    }
  } else {
    const TrainResult result =
        train_global(market, strategy, objective, sweep, config);
    const std::size_t threads =
        config.threads == 0 ? default_thread_count() : config.threads;
    if (!result.ok) {
      for (std::size_t i = 0; i < n_labels; ++i) {
        points[i].label_kind = sweep.label_kind;
        points[i].label = sweep.labels[i];
        points[i].risk_kind = objective.is_cvar() ? "cvar" : "variance";
        points[i].failed = true;
        points[i].error = result.error;
      }
    } else {
      parallel_for(n_labels, threads, [&](std::size_t i) {
        points[i] = evaluate_policy(result.policy, market, strategy, objective,
                                    sweep.label_kind, sweep.labels[i],
                                    config.eval_samples, eval_seed, 1);
        points[i].converged = result.converged;
        trained[i] = result.policy;
      });
      if (!points.empty() && !result.objective_trace.empty())
        points.front().objective_trace = result.objective_trace;
    }
  }

  std::vector<std::size_t> index(n_labels);
  for (std::size_t i = 0; i < n_labels; ++i) index[i] = i;
  std::stable_sort(index.begin(), index.end(), [&](std::size_t a, std::size_t b) {
    if (points[a].failed != points[b].failed) return !points[a].failed;
    return points[a].risk < points[b].risk;
  });
  std::vector<FrontierPoint> sorted;
  sorted.reserve(n_labels);
  std::vector<TrainedPolicy> sorted_policies;
  sorted_policies.reserve(n_labels);
  for (std::size_t i : index) {
    sorted.push_back(std::move(points[i]));
    sorted_policies.push_back(std::move(trained[i]));
  }
  if (policies != nullptr) *policies = std::move(sorted_policies);
  return sorted;
}

bool stabilization_check(std::span<const double> trace, double rel_tol,
                         std::size_t window) {
  require(trace.size() >= 2, "stabilization_check: need at least 2 estimates");
  const std::size_t w = std::min(window, trace.size());
  const double ref = trace.back();
  const double denom = std::max(std::fabs(ref), 1e-12);
  for (std::size_t i = trace.size() - w; i < trace.size(); ++i)
    if (std::fabs(trace[i] - ref) / denom >= rel_tol) return false;
  return true;
}

std::vector<std::size_t> pareto_violations(
    std::span<const FrontierPoint> sorted_points, double band_sigmas) {
  std::vector<std::size_t> flagged;
  for (std::size_t i = 1; i < sorted_points.size(); ++i) {
    const FrontierPoint& cur = sorted_points[i];
    if (cur.failed) continue;
    for (std::size_t j = 0; j < i; ++j) {
      const FrontierPoint& prev = sorted_points[j];
      if (prev.failed) continue;
      const double band = band_sigmas * (cur.mean_std_error +
                                         prev.mean_std_error);
      if (prev.risk <= cur.risk && prev.mean > cur.mean + band) {
        flagged.push_back(i);
        break;
      }
    }
  }
  return flagged;
}

}  // namespace frontierlab
