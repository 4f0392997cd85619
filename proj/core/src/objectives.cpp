#include "frontierlab/objectives.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace frontierlab {

namespace {
void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}
}  // namespace

Criterion criterion_from_name(std::string_view name) {
  if (name == "mv_direct") return Criterion::kMvDirect;
  if (name == "mv_aux") return Criterion::kMvAux;
  if (name == "cvar") return Criterion::kCvar;
  throw std::invalid_argument("unknown criterion: " + std::string(name));
}

std::string criterion_name(Criterion c) {
  switch (c) {
    case Criterion::kMvDirect: return "mv_direct";
    case Criterion::kMvAux: return "mv_aux";
    case Criterion::kCvar: return "cvar";
  }
  return "?";
}

PenaltyModel penalty_model_from_name(std::string_view name) {
  if (name == "none") return PenaltyModel::kNone;
  if (name == "m1") return PenaltyModel::kM1;
  if (name == "m2") return PenaltyModel::kM2;
  if (name == "m3") return PenaltyModel::kM3;
  if (name == "m4") return PenaltyModel::kM4;
  throw std::invalid_argument("unknown penalty model: " + std::string(name));
}

double BetaSampler::sample(rng::Stream& stream) const {
  if (kind == Kind::kUniform) return stream.uniform(lower, upper);
  const double u = stream.uniform01();
  return label_max * u * u;
}

double BetaSampler::max_value() const {
  return kind == Kind::kUniform ? upper : label_max;
}

void BetaSampler::validate() const {
  if (kind == Kind::kUniform) {
    require(lower >= 0.0 && upper > lower,
            "beta sampler: need 0 <= lower < upper");
  } else {
    require(label_max > 0.0, "beta sampler: label_max must be positive");
  }
}

void ObjectiveSpec::validate(const StrategySpec& strategy) const {
  if (is_cvar())
    require(alpha > 0.0 && alpha < 1.0, "alpha must be inside (0,1)");
  require(epsilon > 0.0, "epsilon must be positive");
  if (mode == ResolutionMode::kGlobalRand) {
    require(subgroups >= 1, "subgroups must be >= 1");
    sampler.validate();
  }
  switch (penalty_model) {
    case PenaltyModel::kNone:
      break;
    case PenaltyModel::kM1:
      require(strategy.kind == StrategyKind::kSimplex,
              "penalty model m1 requires simplex weights");
      require(strategy.bounds.has_value() && strategy.move_limit.has_value(),
              "penalty model m1 requires bounds and a move limit");
      break;
    case PenaltyModel::kM2:
      require(strategy.kind == StrategyKind::kIncremental,
              "penalty model m2 requires incremental weights");
      require(strategy.bounds.has_value(),
              "penalty model m2 requires bounds");
      break;
    case PenaltyModel::kM3:
      require(strategy.kind == StrategyKind::kIncrementalClipped,
              "penalty model m3 requires clipped incremental weights");
      break;
    case PenaltyModel::kM4:
      require(strategy.kind == StrategyKind::kBoxProjected,
              "penalty model m4 requires box-projected weights");
      require(strategy.move_limit.has_value(),
              "penalty model m4 requires a move limit");
      break;
  }
}

std::size_t cvar_tail_count(double alpha, std::size_t batch) {
  require(batch >= 1, "cvar: empty batch");
  require(alpha > 0.0 && alpha < 1.0, "cvar: alpha must be inside (0,1)");
  const double raw = (1.0 - alpha) * static_cast<double>(batch);
  // Nudge below the decimal boundary so e.g. (1-0.95)*100 lands on 5, not 6.
  std::size_t k = static_cast<std::size_t>(std::ceil(raw - 1e-9));
  if (k < 1) k = 1;
  if (k > batch) k = batch;
  return k;
}

NodeId mv_direct(Tape& tape, NodeId terminal_wealth, double beta) {
  require(tape.value(terminal_wealth).size() >= 2,
          "mv_direct: need a batch of at least 2");
  const NodeId neg_mean = tape.scale(tape.mean(terminal_wealth), -1.0);
  const NodeId var = tape.variance(terminal_wealth);
  return tape.add(neg_mean, tape.scale(var, beta));
}

NodeId mv_aux(Tape& tape, NodeId terminal_wealth, double gamma) {
  return tape.mean(tape.square(tape.scale(terminal_wealth, 1.0, -gamma)));
}

double gamma_from_beta(double beta, double expected_optimal_wealth) {
  if (beta <= 0.0) throw std::invalid_argument("gamma_from_beta: beta must be > 0");
  return 1.0 / (2.0 * beta) + expected_optimal_wealth;
}

NodeId cvar_empirical(Tape& tape, NodeId terminal_wealth, double alpha,
                      double x0) {
  const std::size_t batch = tape.value(terminal_wealth).size();
  const std::size_t k = cvar_tail_count(alpha, batch);
  const NodeId losses = tape.scale(terminal_wealth, -1.0, x0);  // x0 - X
  return tape.tail_mean_largest(losses, k);
}

NodeId mean_cvar(Tape& tape, NodeId terminal_wealth, double beta, double alpha,
                 double x0) {
  const NodeId neg_mean = tape.scale(tape.mean(terminal_wealth), -1.0);
  const NodeId cvar = cvar_empirical(tape, terminal_wealth, alpha, x0);
  return tape.add(neg_mean, tape.scale(cvar, beta));
}

namespace {

std::size_t batch_rows(Tape& tape, std::span<const NodeId> trajectory) {
  require(!trajectory.empty(), "penalty: empty weight trajectory");
  return tape.value(trajectory.front()).rows();
}

}  // namespace

NodeId penalty_local(Tape& tape, std::span<const NodeId> weight_trajectory,
                     const NumArray& eta, double epsilon) {
  require(weight_trajectory.size() >= 2,
          "penalty_local: need at least two dates");
  const std::size_t rows = batch_rows(tape, weight_trajectory);
  const NodeId eta_leaf = tape.leaf(eta);
  NodeId acc = kNoNode;
  for (std::size_t i = 0; i + 1 < weight_trajectory.size(); ++i) {
    const NodeId delta =
        tape.abs(tape.sub(weight_trajectory[i + 1], weight_trajectory[i]));
    const NodeId excess = tape.sum(tape.pos(tape.sub_row(delta, eta_leaf)));
    acc = (acc == kNoNode) ? excess : tape.add(acc, excess);
  }
  return tape.scale(acc, 1.0 / (epsilon * static_cast<double>(rows)));
}

NodeId penalty_box(Tape& tape, std::span<const NodeId> weight_trajectory,
                   const Bounds& bounds, double epsilon) {
  const std::size_t rows = batch_rows(tape, weight_trajectory);
  const NodeId lo_leaf = tape.leaf(bounds.lo);
  const NodeId hi_leaf = tape.leaf(bounds.hi);
  NodeId acc = kNoNode;
  for (const NodeId w : weight_trajectory) {
    const NodeId above = tape.pos(tape.sub_row(w, hi_leaf));
    const NodeId below = tape.pos(tape.add_row(tape.scale(w, -1.0), lo_leaf));
    const NodeId term = tape.sum(tape.add(above, below));
    acc = (acc == kNoNode) ? term : tape.add(acc, term);
  }
  return tape.scale(acc, 1.0 / (epsilon * static_cast<double>(rows)));
}

NodeId penalty_budget(Tape& tape, std::span<const NodeId> weight_trajectory,
                      double epsilon) {
  const std::size_t rows = batch_rows(tape, weight_trajectory);
  NodeId acc = kNoNode;
  for (const NodeId w : weight_trajectory) {
    const NodeId gap =
        tape.sum(tape.abs(tape.scale(tape.row_sum(w), 1.0, -1.0)));
    acc = (acc == kNoNode) ? gap : tape.add(acc, gap);
  }
  return tape.scale(acc, 1.0 / (epsilon * static_cast<double>(rows)));
}

NodeId base_criterion(Tape& tape, NodeId terminal_wealth,
                      const ObjectiveSpec& objective, double label, double x0) {
  switch (objective.criterion) {
    case Criterion::kMvDirect: return mv_direct(tape, terminal_wealth, label);
    case Criterion::kMvAux: return mv_aux(tape, terminal_wealth, label);
    case Criterion::kCvar:
      return mean_cvar(tape, terminal_wealth, label, objective.alpha, x0);
  }
  throw std::logic_error("unreachable criterion");
}

NodeId assemble_constrained_loss(Tape& tape, const Rollout& rollout,
                                 const ObjectiveSpec& objective,
                                 const StrategySpec& strategy, double label,
                                 double x0) {
  NodeId loss = base_criterion(tape, rollout.terminal_wealth, objective, label, x0);
  const double eps = objective.epsilon;
  const std::span<const NodeId> traj(rollout.weights);
  switch (objective.penalty_model) {
    case PenaltyModel::kNone:
      break;
    case PenaltyModel::kM1:
      loss = tape.add(
          loss, penalty_local(tape, traj, strategy.move_limit->eta, eps));
      loss = tape.add(loss, penalty_box(tape, traj, *strategy.bounds, eps));
      break;
    case PenaltyModel::kM2:
      loss = tape.add(loss, penalty_budget(tape, traj, eps));
      loss = tape.add(loss, penalty_box(tape, traj, *strategy.bounds, eps));
      break;
    case PenaltyModel::kM3:
      loss = tape.add(loss, penalty_budget(tape, traj, eps));
      break;
    case PenaltyModel::kM4:
      loss = tape.add(
          loss, penalty_local(tape, traj, strategy.move_limit->eta, eps));
      break;
  }
  return loss;
}

NodeId global_det_loss(Tape& tape, std::span<const Rollout> rollouts,
                       std::span<const double> labels,
                       const ObjectiveSpec& objective,
                       const StrategySpec& strategy, double x0) {
  require(!rollouts.empty() && rollouts.size() == labels.size(),
          "global loss: need one rollout per grid label");
  NodeId acc = kNoNode;
  for (std::size_t k = 0; k < rollouts.size(); ++k) {
    const NodeId term = assemble_constrained_loss(tape, rollouts[k], objective,
                                                  strategy, labels[k], x0);
    acc = (acc == kNoNode) ? term : tape.add(acc, term);
  }
  return acc;
}

NodeId global_rand_loss(Tape& tape, std::span<const Rollout> rollouts,
                        std::span<const double> sampled_labels,
                        const ObjectiveSpec& objective,
                        const StrategySpec& strategy, double x0) {
  require(!rollouts.empty() && rollouts.size() == sampled_labels.size(),
          "global loss: need one rollout per sampled label");
  for (const Rollout& r : rollouts)
    require(tape.value(r.terminal_wealth).size() >= 2,
            "global_rand: each conditional group needs at least 2 samples");
  const NodeId total = global_det_loss(tape, rollouts, sampled_labels,
                                       objective, strategy, x0);
  return tape.scale(total, 1.0 / static_cast<double>(rollouts.size()));
}

}  // namespace frontierlab
