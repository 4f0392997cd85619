#pragma once

#include <cstdint>
#include <vector>

#include "frontierlab/market.hpp"
#include "frontierlab/strategy.hpp"
#include "frontierlab/tape.hpp"

namespace frontierlab {

// One batched wealth rollout recorded on a tape. Wealth nodes are B x 1;
// weight nodes are B x d (d x 1 for the constant-mix kind).
struct Rollout {
  NodeId terminal_wealth = kNoNode;
  std::vector<NodeId> weights;  // one per rebalancing date, N entries
  std::vector<NodeId> wealth;   // N + 1 entries, wealth[0] = x0
};

// Wealth recursion X_{i+1} = X_i (1 + phi_i . Y_i) with the weights evaluated
// on the state at date i (state feedback, no look-ahead). The whole recursion
// is recorded on the tape so gradients flow through the weights into the
// network parameters.
Rollout rollout_additive(Tape& tape, TapePolicy& policy, const PathSet& paths,
                         std::size_t first_path, std::size_t batch, double x0);

// Simulates a fresh batch and rolls it out on the given tape. The policy is
// built by the factory once the paths exist (incremental and Heston policies
// read exogenous path data).
template <typename PolicyFactory>
Rollout rollout_batch(Tape& tape, PolicyFactory&& make_policy,
                      const MarketModel& market, std::size_t batch_size,
                      std::uint64_t seed) {
  if (batch_size < 1) throw std::invalid_argument("rollout_batch: empty batch");
  const PathSet paths = simulate(market, batch_size, seed);
  TapePolicy policy = make_policy(paths);
  return rollout_additive(tape, policy, paths, 0, batch_size, market.x0);
}

}  // namespace frontierlab
