#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "frontierlab/array.hpp"
#include "frontierlab/tape.hpp"

namespace frontierlab {

enum class OutputHead { kIdentity, kSigmoid, kTanh };

std::string head_name(OutputHead head);
OutputHead head_from_name(std::string_view name);

// Feedforward policy network: affine maps with tanh between them and an
// optional squashing head on the output. Three hidden layers of equal width.
struct NetworkParams {
  std::vector<std::size_t> layer_dims;  // [d0, m, m, m, d1]
  std::vector<NumArray> weights;        // weights[l] is dims[l+1] x dims[l]
  std::vector<NumArray> biases;         // biases[l] is dims[l+1] x 1
  OutputHead head = OutputHead::kIdentity;

  std::size_t input_dim() const { return layer_dims.front(); }
  std::size_t output_dim() const { return layer_dims.back(); }
  std::size_t param_count() const;
  bool empty() const { return layer_dims.empty(); }

  // Tensors in update order: W0, b0, W1, b1, ...
  std::vector<NumArray*> param_list();
  std::vector<const NumArray*> param_list() const;
};

// Hidden width convention: 10 + number of assets.
std::size_t hidden_width_for(std::size_t n_assets);

// Glorot-uniform weights, zero biases. dims must be [d0, m, m, m, d1] with
// the three hidden widths equal.
NetworkParams init_network(const std::vector<std::size_t>& layer_dims,
                           OutputHead head, std::uint64_t seed);

// Parameter node ids for one tape pass.
struct BoundNetwork {
  const NetworkParams* params = nullptr;
  std::vector<NodeId> weight_ids;
  std::vector<NodeId> bias_ids;
};

BoundNetwork bind_network(Tape& tape, const NetworkParams& params);

// Forward pass recorded on the tape. Accepts a single input vector (d0 x 1)
// or a row batch (B x d0).
NodeId network_forward(Tape& tape, const BoundNetwork& net, NodeId input);

// Forward pass without a tape, for evaluation. `input` is d0 x 1 or B x d0;
// the result has matching orientation (d1 x 1 or B x d1).
NumArray network_forward_plain(const NetworkParams& params,
                               const NumArray& input);

struct AdamState {
  std::vector<NumArray> first_moment;
  std::vector<NumArray> second_moment;
  std::size_t step_count = 0;
};

AdamState make_adam_state(const std::vector<const NumArray*>& params);

// One bias-corrected Adam update (beta1=0.9, beta2=0.999, eps=1e-8) applied
// in place to every tensor in `params`.
void adam_step(const std::vector<NumArray*>& params,
               const std::vector<const NumArray*>& grads, AdamState& state,
               double lr);

struct LrSchedule {
  double lr_initial = 1e-3;
  double lr_final = 1e-4;
  std::size_t total_iterations = 1;
};

// Linear interpolation from lr_initial at 0 to lr_final at total_iterations.
double lr_at(const LrSchedule& schedule, std::size_t iteration);

// Versioned line-oriented text format; round trip is bitwise identity.
std::string serialize_network(const NetworkParams& params);
NetworkParams deserialize_network(std::string_view text);

}  // namespace frontierlab
