#include "frontierlab/strategy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "frontierlab/rng.hpp"

namespace frontierlab {

namespace {
void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}
}  // namespace

void Bounds::validate() const {
  require(lo.cols() == 1 && hi.cols() == 1 && lo.rows() == hi.rows() &&
              lo.rows() >= 1,
          "bounds: lo and hi must be vectors of equal length");
  double sum_lo = 0.0, sum_hi = 0.0;
  for (std::size_t j = 0; j < lo.rows(); ++j) {
    require(0.0 <= lo[j] && lo[j] <= hi[j] && hi[j] <= 1.0,
            "bounds: need 0 <= lo <= hi <= 1 componentwise");
    sum_lo += lo[j];
    sum_hi += hi[j];
  }
  require(sum_lo <= 1.0 && 1.0 <= sum_hi,
          "bounds: budget infeasible (need sum lo <= 1 <= sum hi)");
}

void MoveLimit::validate() const {
  require(eta.cols() == 1 && eta.rows() >= 1, "move limit: eta must be a vector");
  for (std::size_t j = 0; j < eta.rows(); ++j)
    require(eta[j] > 0.0, "move limit: eta must be strictly positive");
}

StrategyKind strategy_kind_from_name(std::string_view name) {
  if (name == "unconstrained") return StrategyKind::kUnconstrained;
  if (name == "unconstrained_amounts")
    return StrategyKind::kUnconstrainedAmounts;
  if (name == "simplex") return StrategyKind::kSimplex;
  if (name == "box_projected") return StrategyKind::kBoxProjected;
  if (name == "incremental") return StrategyKind::kIncremental;
  if (name == "incremental_clipped") return StrategyKind::kIncrementalClipped;
  if (name == "constant_mix") return StrategyKind::kConstantMix;
  throw std::invalid_argument("unknown strategy kind: " + std::string(name));
}

std::string strategy_kind_name(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::kUnconstrained: return "unconstrained";
    case StrategyKind::kUnconstrainedAmounts: return "unconstrained_amounts";
    case StrategyKind::kSimplex: return "simplex";
    case StrategyKind::kBoxProjected: return "box_projected";
    case StrategyKind::kIncremental: return "incremental";
    case StrategyKind::kIncrementalClipped: return "incremental_clipped";
    case StrategyKind::kConstantMix: return "constant_mix";
  }
  return "?";
}

void StrategySpec::validate(std::size_t n_assets) const {
  const bool needs_bounds = kind == StrategyKind::kBoxProjected ||
                            kind == StrategyKind::kIncremental ||
                            kind == StrategyKind::kIncrementalClipped;
  if (needs_bounds) {
    require(bounds.has_value(), "strategy: this kind requires bounds");
    bounds->validate();
    require(bounds->dim() == n_assets, "strategy: bounds dimension mismatch");
  }
  if (is_incremental()) {
    require(move_limit.has_value(), "strategy: incremental kinds require a move limit");
    move_limit->validate();
    require(move_limit->eta.rows() == n_assets,
            "strategy: move limit dimension mismatch");
  }
  if (initial_weights == InitialWeightsMode::kFixedEqual && bounds.has_value()) {
    const double w0 = 1.0 / static_cast<double>(n_assets);
    for (std::size_t j = 0; j < n_assets; ++j)
      require(bounds->lo[j] <= w0 && w0 <= bounds->hi[j],
              "strategy: equal initial weights fall outside the bounds");
  }
}

OutputHead StrategySpec::required_head() const {
  switch (kind) {
    case StrategyKind::kUnconstrained:
    case StrategyKind::kUnconstrainedAmounts: return OutputHead::kIdentity;
    case StrategyKind::kSimplex:
    case StrategyKind::kBoxProjected: return OutputHead::kSigmoid;
    case StrategyKind::kIncremental:
    case StrategyKind::kIncrementalClipped: return OutputHead::kTanh;
    case StrategyKind::kConstantMix: return OutputHead::kIdentity;
  }
  return OutputHead::kIdentity;
}

NodeId weights_simplex(Tape& tape, NodeId zeta) {
  return tape.div_col(zeta, tape.row_sum(zeta));
}

NodeId rescale_to_box(Tape& tape, NodeId zeta, const Bounds& bounds) {
  NumArray span(bounds.dim(), 1);
  for (std::size_t j = 0; j < bounds.dim(); ++j)
    span[j] = bounds.hi[j] - bounds.lo[j];
  const NodeId lo_leaf = tape.leaf(bounds.lo);
  const NodeId span_leaf = tape.leaf(span);
  return tape.add_row(tape.mul_row(zeta, span_leaf), lo_leaf);
}

namespace {

NodeId project_impl(Tape& tape, NodeId w, const Bounds& bounds,
                    std::span<const std::size_t> order) {
  const NumArray& value = tape.value(w);
  const std::size_t d = value.cols();
  require(d == bounds.dim(), "project: bounds dimension mismatch");
  require(order.size() == d, "project: order must visit every coordinate once");

  std::vector<NodeId> cols(d);
  for (std::size_t j = 0; j < d; ++j) cols[j] = tape.slice_col(w, j);

  for (std::size_t idx : order) {
    require(idx < d, "project: order index out of range");
    NodeId total = cols[0];
    for (std::size_t j = 1; j < d; ++j) total = tape.add(total, cols[j]);
    const NodeId deficit = tape.scale(total, -1.0, 1.0);  // 1 - sum w
    cols[idx] = tape.clip(tape.add(cols[idx], deficit), bounds.lo[idx],
                          bounds.hi[idx]);
  }
  return tape.concat_cols(cols);
}

}  // namespace

NodeId project_to_budget(Tape& tape, NodeId w, const Bounds& bounds,
                         std::span<const std::size_t> order) {
  return project_impl(tape, w, bounds, order);
}

NodeId project_to_budget(Tape& tape, NodeId w, const Bounds& bounds) {
  const auto order = natural_order(tape.value(w).cols());
  return project_impl(tape, w, bounds, order);
}

void project_to_budget_plain(std::span<double> w, const Bounds& bounds,
                             std::span<const std::size_t> order) {
  const std::size_t d = w.size();
  for (std::size_t idx : order) {
    double total = 0.0;
    for (std::size_t j = 0; j < d; ++j) total += w[j];
    const double candidate = w[idx] + (1.0 - total);
    w[idx] = std::min(std::max(candidate, bounds.lo[idx]), bounds.hi[idx]);
  }
}

NodeId constant_mix_weights(Tape& tape, NodeId theta) {
  const NodeId zeta = tape.sigmoid(theta);
  return tape.div_scalar(zeta, tape.sum(zeta));
}

NumArray constant_mix_weights_plain(const NumArray& theta) {
  NumArray w(theta.rows(), 1);
  double total = 0.0;
  for (std::size_t j = 0; j < theta.rows(); ++j) {
    w[j] = 1.0 / (1.0 + std::exp(-theta[j]));
    total += w[j];
  }
  for (std::size_t j = 0; j < theta.rows(); ++j) w[j] /= total;
  return w;
}

std::vector<std::size_t> natural_order(std::size_t d) {
  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), std::size_t{0});
  return order;
}

std::vector<std::size_t> permuted_order(std::size_t d, std::uint64_t perm_seed,
                                        std::size_t date_index) {
  auto order = natural_order(d);
  rng::Stream stream(rng::derive_stream(perm_seed, rng::StreamTag::kPermutation,
                                        date_index));
  for (std::size_t i = d; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(stream.below(i));
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

TapePolicy::TapePolicy(Tape& tape, Inputs inputs)
    : tape_(tape), in_(std::move(inputs)) {
  require(in_.spec != nullptr && in_.grid != nullptr, "policy: missing spec/grid");
  if (in_.spec->uses_network()) {
    require(in_.net != nullptr, "policy: this strategy kind needs a network");
    n_assets_ = in_.net->params->output_dim();
    require(in_.net->params->head == in_.spec->required_head(),
            "policy: network head does not match the strategy kind");
  } else {
    require(in_.theta_static != kNoNode, "policy: constant mix needs theta");
    n_assets_ = tape_.value(in_.theta_static).rows();
  }
  in_.spec->validate(n_assets_);
  if (in_.spec->is_incremental())
    require(in_.theta_tilde != kNoNode, "policy: incremental kinds need theta_tilde");

  if (in_.spec->bounds.has_value()) {
    const Bounds& b = *in_.spec->bounds;
    NumArray span(n_assets_, 1);
    for (std::size_t j = 0; j < n_assets_; ++j) span[j] = b.hi[j] - b.lo[j];
    lo_leaf_ = tape_.leaf(b.lo);
    span_leaf_ = tape_.leaf(span);
  }
  if (in_.spec->is_incremental())
    eta_leaf_ = tape_.leaf(in_.spec->move_limit->eta);
}

NodeId TapePolicy::broadcast_rows(NodeId row_vector) {
  if (zero_block_ == kNoNode)
    zero_block_ = tape_.leaf(NumArray(in_.batch, n_assets_));
  return tape_.add_row(zero_block_, row_vector);
}

NodeId TapePolicy::state_input(std::size_t date_index, NodeId wealth) {
  const double t_norm = static_cast<double>(date_index) /
                        static_cast<double>(in_.grid->n_steps);
  std::vector<NodeId> cols;
  cols.push_back(tape_.leaf(NumArray(in_.batch, 1, t_norm)));
  cols.push_back(tape_.scale(wealth, 1.0 / in_.scaling.x0));
  if (in_.paths != nullptr && in_.paths->has_variances()) {
    const NodeId vmat = tape_.leaf(
        in_.paths->variance_matrix(date_index, in_.first_path, in_.batch));
    for (std::size_t j = 0; j < n_assets_; ++j)
      cols.push_back(
          tape_.scale(tape_.slice_col(vmat, j), 1.0 / in_.scaling.v0[j]));
  }
  if (in_.label_input.has_value())
    cols.push_back(tape_.leaf(
        NumArray(in_.batch, 1, *in_.label_input / in_.scaling.label_max)));
  return tape_.concat_cols(cols);
}

NodeId TapePolicy::weights_at(std::size_t date_index, NodeId wealth) {
  const StrategySpec& spec = *in_.spec;

  if (spec.kind == StrategyKind::kConstantMix) {
    if (static_weights_ == kNoNode)
      static_weights_ = constant_mix_weights(tape_, in_.theta_static);
    return static_weights_;
  }

  // With fixed initial weights the policy only controls dates >= 1.
  if (date_index == 0 &&
      spec.initial_weights == InitialWeightsMode::kFixedEqual &&
      !spec.is_incremental()) {
    return tape_.leaf(
        NumArray(in_.batch, n_assets_, 1.0 / static_cast<double>(n_assets_)));
  }

  if (spec.is_incremental()) {
    if (date_index > 0) {
      const NodeId xi =
          network_forward(tape_, *in_.net, state_input(date_index, wealth));
      running_sum_ =
          (running_sum_ == kNoNode) ? xi : tape_.add(running_sum_, xi);
    }
    NodeId w = (running_sum_ == kNoNode)
                   ? broadcast_rows(in_.theta_tilde)
                   : tape_.add_row(tape_.mul_row(running_sum_, eta_leaf_),
                                   in_.theta_tilde);
    if (spec.kind == StrategyKind::kIncrementalClipped)
      w = tape_.clip(w, spec.bounds->lo, spec.bounds->hi);
    return w;
  }

  const NodeId out =
      network_forward(tape_, *in_.net, state_input(date_index, wealth));
  switch (spec.kind) {
    case StrategyKind::kUnconstrained:
    case StrategyKind::kUnconstrainedAmounts:
      return out;
    case StrategyKind::kSimplex:
      return weights_simplex(tape_, out);
    case StrategyKind::kBoxProjected: {
      const NodeId boxed =
          tape_.add_row(tape_.mul_row(out, span_leaf_), lo_leaf_);
      const auto order =
          spec.permute_projection
              ? permuted_order(n_assets_, in_.perm_seed, date_index)
              : natural_order(n_assets_);
      return project_to_budget(tape_, boxed, *spec.bounds, order);
    }
    default:
      throw std::logic_error("unreachable strategy kind");
  }
}

}  // namespace frontierlab
