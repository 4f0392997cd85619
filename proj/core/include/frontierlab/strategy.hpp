#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "frontierlab/array.hpp"
#include "frontierlab/market.hpp"
#include "frontierlab/network.hpp"
#include "frontierlab/tape.hpp"

namespace frontierlab {

inline constexpr NodeId kNoNode = 0xffffffffu;

// Box bounds on portfolio weights. Budget feasibility (sum lo <= 1 <= sum hi)
// is part of validity: the projection step relies on it.
struct Bounds {
  NumArray lo;
  NumArray hi;
  void validate() const;
  std::size_t dim() const { return lo.rows(); }
};

// Per-step cap on the absolute change of each weight.
struct MoveLimit {
  NumArray eta;
  void validate() const;
};

enum class StrategyKind {
  kUnconstrained,        // network output = fractions of wealth
  kUnconstrainedAmounts, // network output = monetary positions
  kSimplex,
  kBoxProjected,
  kIncremental,
  kIncrementalClipped,
  kConstantMix,
};

enum class InitialWeightsMode { kOptimized, kFixedEqual };

StrategyKind strategy_kind_from_name(std::string_view name);
std::string strategy_kind_name(StrategyKind kind);

struct StrategySpec {
  StrategyKind kind = StrategyKind::kUnconstrained;
  std::optional<Bounds> bounds;
  std::optional<MoveLimit> move_limit;
  InitialWeightsMode initial_weights = InitialWeightsMode::kOptimized;
  bool permute_projection = false;

  void validate(std::size_t n_assets) const;
  OutputHead required_head() const;
  bool uses_network() const { return kind != StrategyKind::kConstantMix; }
  bool is_incremental() const {
    return kind == StrategyKind::kIncremental ||
           kind == StrategyKind::kIncrementalClipped;
  }
};

// Normalization constants for the network input, frozen at run construction.
struct StateScaling {
  double horizon = 1.0;
  double x0 = 1.0;
  NumArray v0;            // per-asset variance scale (Heston only)
  double label_max = 1.0; // risk-weight scale when the label enters the state
};

// --- weight maps (tape ops) -------------------------------------------------

// Rows of zeta normalized to sum 1: phi_ij = zeta_ij / sum_j zeta_ij.
NodeId weights_simplex(Tape& tape, NodeId zeta);

// phi = lo + zeta * (hi - lo), componentwise.
NodeId rescale_to_box(Tape& tape, NodeId zeta, const Bounds& bounds);

// Sequential clipped projection onto {sum w = 1} within [lo, hi]. Visits
// coordinates in `order`; requires the input inside the box and feasible
// bounds. Differentiable through the clip subgradient.
NodeId project_to_budget(Tape& tape, NodeId w, const Bounds& bounds,
                         std::span<const std::size_t> order);
NodeId project_to_budget(Tape& tape, NodeId w, const Bounds& bounds);

// Plain-arithmetic twin of the projection, for evaluation and tests.
void project_to_budget_plain(std::span<double> w, const Bounds& bounds,
                             std::span<const std::size_t> order);

// Raw parameter vector -> strictly positive weights summing to 1.
NodeId constant_mix_weights(Tape& tape, NodeId theta);
NumArray constant_mix_weights_plain(const NumArray& theta);

std::vector<std::size_t> natural_order(std::size_t d);
std::vector<std::size_t> permuted_order(std::size_t d, std::uint64_t perm_seed,
                                        std::size_t date_index);

// --- per-rollout policy ------------------------------------------------------

// Produces the weight node for each rebalancing date of one batched rollout.
// Stateful for incremental kinds (running sum of network increments); create
// one instance per rollout.
class TapePolicy {
 public:
  struct Inputs {
    const StrategySpec* spec = nullptr;
    StateScaling scaling;
    const TimeGrid* grid = nullptr;
    const BoundNetwork* net = nullptr;   // null for constant mix
    NodeId theta_tilde = kNoNode;        // incremental kinds
    NodeId theta_static = kNoNode;       // constant mix
    const PathSet* paths = nullptr;      // variance columns (Heston)
    std::size_t first_path = 0;
    std::size_t batch = 0;
    std::optional<double> label_input;   // beta/gamma entering the state
    std::uint64_t perm_seed = 0;
  };

  TapePolicy(Tape& tape, Inputs inputs);

  // Weight node at date `i` given the wealth node; B x d, or d x 1 for the
  // constant-mix kind.
  NodeId weights_at(std::size_t date_index, NodeId wealth);

  std::size_t n_assets() const { return n_assets_; }

  // True when weights_at returns one shared d-vector instead of per-path rows.
  bool shared_weights() const {
    return in_.spec->kind == StrategyKind::kConstantMix;
  }

  // True when weights_at returns monetary positions: the wealth recursion is
  // then X_{i+1} = X_i + alpha_i . Y_i instead of X_i (1 + phi_i . Y_i).
  bool amount_weights() const {
    return in_.spec->kind == StrategyKind::kUnconstrainedAmounts;
  }

 private:
  NodeId state_input(std::size_t date_index, NodeId wealth);
  NodeId broadcast_rows(NodeId row_vector);

  Tape& tape_;
  Inputs in_;
  std::size_t n_assets_ = 0;
  NodeId lo_leaf_ = kNoNode;
  NodeId span_leaf_ = kNoNode;
  NodeId eta_leaf_ = kNoNode;
  NodeId zero_block_ = kNoNode;
  NodeId static_weights_ = kNoNode;
  NodeId running_sum_ = kNoNode;
};

}  // namespace frontierlab
