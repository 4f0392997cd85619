#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "frontierlab/array.hpp"

namespace frontierlab {

using NodeId = std::uint32_t;

enum class Op : std::uint8_t {
  kLeaf,
  kMatVec,      // W * x, or row-batched X * W^T when x has matching columns
  kAdd,         // elementwise, same shape
  kSub,
  kMul,
  kDiv,
  kAddRow,      // matrix op vector broadcast across rows (vector length = cols)
  kSubRow,
  kMulRow,
  kDivCol,      // matrix / column vector, broadcast across columns
  kDivScalar,   // array / scalar node
  kScale,       // a*x + b with compile-time constants
  kTanh,
  kSigmoid,
  kPos,         // max(x, 0)
  kAbs,
  kClip,        // clamp to [lo, hi]; scalar or per-column bounds
  kSquare,
  kMean,        // mean over all entries -> scalar
  kVariance,    // biased variance (divisor = entry count) -> scalar
  kSum,         // sum over all entries -> scalar
  kRowSum,      // matrix -> column vector of row sums
  kTailMean,    // mean of the k largest entries -> scalar
  kConcatCols,  // column vectors -> matrix
  kSliceCol,    // matrix -> one column
};

// Tape-based reverse-mode autodiff over NumArray values. Single-threaded:
// one rollout-and-backward per tape; parallelism happens across tapes.
// Every recorded operation checks its output for NaN/Inf and throws
// NumericError on violation, so a finished tape holds only finite values.
class Tape {
 public:
  struct Node {
    Op op = Op::kLeaf;
    NodeId a = 0;
    NodeId b = 0;
    double p0 = 0.0;  // Scale: multiplier; Clip: scalar lo
    double p1 = 0.0;  // Scale: shift; Clip: scalar hi
    NumArray value;
    NumArray lo;                      // Clip per-column bounds (optional)
    NumArray hi;
    std::vector<std::uint32_t> ids;   // ConcatCols inputs / TailMean selection / SliceCol index
  };

  NodeId leaf(NumArray value);

  NodeId matvec(NodeId w, NodeId x);
  NodeId add(NodeId a, NodeId b);
  NodeId sub(NodeId a, NodeId b);
  NodeId mul(NodeId a, NodeId b);
  NodeId div(NodeId a, NodeId b);
  NodeId add_row(NodeId m, NodeId v);
  NodeId sub_row(NodeId m, NodeId v);
  NodeId mul_row(NodeId m, NodeId v);
  NodeId div_col(NodeId m, NodeId c);
  NodeId div_scalar(NodeId a, NodeId s);
  NodeId scale(NodeId x, double a, double b = 0.0);
  NodeId tanh(NodeId x);
  NodeId sigmoid(NodeId x);
  NodeId pos(NodeId x);
  NodeId abs(NodeId x);
  NodeId clip(NodeId x, double lo, double hi);
  NodeId clip(NodeId x, const NumArray& lo, const NumArray& hi);
  NodeId square(NodeId x);
  NodeId mean(NodeId x);
  NodeId variance(NodeId x);
  NodeId sum(NodeId x);
  NodeId row_sum(NodeId x);
  NodeId tail_mean_largest(NodeId x, std::size_t k);
  NodeId concat_cols(std::span<const NodeId> columns);
  NodeId slice_col(NodeId m, std::size_t col);

  const NumArray& value(NodeId id) const { return nodes_[id].value; }
  std::size_t node_count() const { return nodes_.size(); }

  // Seeds the adjoint of a scalar node with 1 and propagates the chain rule
  // backwards. May be called repeatedly (adjoints are reset each time).
  void backward(NodeId seed);

  // Adjoint of a node after backward(); zero array if the node was not
  // reached from the seed.
  const NumArray& grad(NodeId id);

  void reset();

 private:
  NodeId push(Node node);
  void check_exists(NodeId id) const;
  NumArray& adjoint_slot(NodeId id);

  std::vector<Node> nodes_;
  std::vector<NumArray> adjoints_;
};

}  // namespace frontierlab
