#include "frontierlab/portfolio.hpp"

#include <stdexcept>

namespace frontierlab {

Rollout rollout_additive(Tape& tape, TapePolicy& policy, const PathSet& paths,
                         std::size_t first_path, std::size_t batch, double x0) {
  if (batch < 1) throw std::invalid_argument("rollout: empty batch");
  if (first_path + batch > paths.n_paths)
    throw std::invalid_argument("rollout: path range out of bounds");

  Rollout rollout;
  rollout.weights.reserve(paths.n_steps);
  rollout.wealth.reserve(paths.n_steps + 1);

  NodeId wealth = tape.leaf(NumArray(batch, 1, x0));
  rollout.wealth.push_back(wealth);

  for (std::size_t i = 0; i < paths.n_steps; ++i) {
    const NodeId w = policy.weights_at(i, wealth);
    rollout.weights.push_back(w);

    const NodeId yields = tape.leaf(paths.yield_matrix(i, first_path, batch));
    // Portfolio return phi . Y per path; constant-mix weights arrive as a
    // shared d x 1 vector.
    const NodeId step_return = policy.shared_weights()
                                   ? tape.matvec(yields, w)
                                   : tape.row_sum(tape.mul(w, yields));
    // Fractions compound the wealth; monetary positions add their gain.
    wealth = policy.amount_weights()
                 ? tape.add(wealth, step_return)
                 : tape.mul(wealth, tape.scale(step_return, 1.0, 1.0));
    rollout.wealth.push_back(wealth);
  }
  rollout.terminal_wealth = wealth;
  return rollout;
}

}  // namespace frontierlab
