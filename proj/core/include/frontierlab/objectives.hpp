#pragma once

#include <span>
#include <string_view>

#include "frontierlab/portfolio.hpp"
#include "frontierlab/rng.hpp"
#include "frontierlab/strategy.hpp"
#include "frontierlab/tape.hpp"

namespace frontierlab {

enum class Criterion { kMvDirect, kMvAux, kCvar };
enum class ResolutionMode { kPoint, kGlobalDet, kGlobalRand };
enum class PenaltyModel { kNone, kM1, kM2, kM3, kM4 };

Criterion criterion_from_name(std::string_view name);
std::string criterion_name(Criterion c);
PenaltyModel penalty_model_from_name(std::string_view name);

struct BetaSampler {
  enum class Kind { kUniform, kSquaredUniform };
  Kind kind = Kind::kUniform;
  double lower = 0.0;     // uniform
  double upper = 1.0;
  double label_max = 1.0; // squared_uniform: label_max * U^2

  double sample(rng::Stream& stream) const;
  double max_value() const;
  void validate() const;
};

struct ObjectiveSpec {
  Criterion criterion = Criterion::kMvDirect;
  ResolutionMode mode = ResolutionMode::kPoint;
  double alpha = 0.95;          // CVaR level, in (0,1)
  double epsilon = 1e-4;        // penalties scale by 1/epsilon
  PenaltyModel penalty_model = PenaltyModel::kNone;
  std::size_t subgroups = 10;   // conditional groups for global_rand
  BetaSampler sampler;

  void validate(const StrategySpec& strategy) const;
  bool is_cvar() const { return criterion == Criterion::kCvar; }
};

// Tail size of the empirical CVaR estimator: ceil((1 - alpha) * B).
std::size_t cvar_tail_count(double alpha, std::size_t batch);

// --- losses (scalar nodes) ---------------------------------------------------

// -E[X] + beta Var[X], with the biased batch variance.
NodeId mv_direct(Tape& tape, NodeId terminal_wealth, double beta);

// E[(X - gamma)^2].
NodeId mv_aux(Tape& tape, NodeId terminal_wealth, double gamma);

// gamma = 1/(2 beta) + E[X*].
double gamma_from_beta(double beta, double expected_optimal_wealth);

// Mean of the k largest losses x0 - X; gradient reaches only those samples.
NodeId cvar_empirical(Tape& tape, NodeId terminal_wealth, double alpha,
                      double x0);

// -E[X] + beta CVaR(X - x0, alpha).
NodeId mean_cvar(Tape& tape, NodeId terminal_wealth, double beta, double alpha,
                 double x0);

// --- constraint penalties ----------------------------------------------------

// (1/eps) sum_dates sum_assets E[(|dphi| - eta)^+]
NodeId penalty_local(Tape& tape, std::span<const NodeId> weight_trajectory,
                     const NumArray& eta, double epsilon);

// (1/eps) sum_dates sum_assets E[(phi - hi)^+ + (lo - phi)^+]
NodeId penalty_box(Tape& tape, std::span<const NodeId> weight_trajectory,
                   const Bounds& bounds, double epsilon);

// (1/eps) sum_dates E[|sum_j phi_j - 1|]
NodeId penalty_budget(Tape& tape, std::span<const NodeId> weight_trajectory,
                      double epsilon);

// Base criterion at one label (beta for mv_direct/cvar, gamma for mv_aux).
NodeId base_criterion(Tape& tape, NodeId terminal_wealth,
                      const ObjectiveSpec& objective, double label, double x0);

// Base criterion plus the penalty combination of the selected model:
//   m1 = local + box, m2 = budget + box, m3 = budget, m4 = local.
NodeId assemble_constrained_loss(Tape& tape, const Rollout& rollout,
                                 const ObjectiveSpec& objective,
                                 const StrategySpec& strategy, double label,
                                 double x0);

// Sum over the label grid of per-label assembled losses.
NodeId global_det_loss(Tape& tape, std::span<const Rollout> rollouts,
                       std::span<const double> labels,
                       const ObjectiveSpec& objective,
                       const StrategySpec& strategy, double x0);

// Average over sampled labels of per-group assembled losses (each group
// realizes one conditional expectation).
NodeId global_rand_loss(Tape& tape, std::span<const Rollout> rollouts,
                        std::span<const double> sampled_labels,
                        const ObjectiveSpec& objective,
                        const StrategySpec& strategy, double x0);

}  // namespace frontierlab
