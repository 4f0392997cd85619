#include "frontierlab/tape.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace frontierlab {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

const char* op_name(Op op) {
  switch (op) {
    case Op::kLeaf: return "leaf";
    case Op::kMatVec: return "matvec";
    case Op::kAdd: return "add";
    case Op::kSub: return "sub";
    case Op::kMul: return "mul";
    case Op::kDiv: return "div";
    case Op::kAddRow: return "add_row";
    case Op::kSubRow: return "sub_row";
    case Op::kMulRow: return "mul_row";
    case Op::kDivCol: return "div_col";
    case Op::kDivScalar: return "div_scalar";
    case Op::kScale: return "scale";
    case Op::kTanh: return "tanh";
    case Op::kSigmoid: return "sigmoid";
    case Op::kPos: return "pos";
    case Op::kAbs: return "abs";
    case Op::kClip: return "clip";
    case Op::kSquare: return "square";
    case Op::kMean: return "mean";
    case Op::kVariance: return "variance";
    case Op::kSum: return "sum";
    case Op::kRowSum: return "row_sum";
    case Op::kTailMean: return "tail_mean";
    case Op::kConcatCols: return "concat_cols";
    case Op::kSliceCol: return "slice_col";
  }
  return "?";
}

}  // namespace

NodeId Tape::push(Node node) {
  if (!node.value.all_finite())
    throw NumericError(std::string("non-finite value produced by ") +
                       op_name(node.op));
  nodes_.push_back(std::move(node));
  return static_cast<NodeId>(nodes_.size() - 1);
}

void Tape::check_exists(NodeId id) const {
  require(id < nodes_.size(), "tape: input node does not exist");
}

NodeId Tape::leaf(NumArray value) {
  require(value.size() > 0, "leaf: empty array");
  Node n;
  n.op = Op::kLeaf;
  n.value = std::move(value);
  return push(std::move(n));
}

NodeId Tape::matvec(NodeId w, NodeId x) {
  check_exists(w);
  check_exists(x);
  const NumArray& W = nodes_[w].value;
  const NumArray& X = nodes_[x].value;
  Node n;
  n.op = Op::kMatVec;
  n.a = w;
  n.b = x;
  if (X.cols() == 1 && X.rows() == W.cols()) {
    // W[m x n] * x[n]
    NumArray out(W.rows(), 1);
    for (std::size_t i = 0; i < W.rows(); ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < W.cols(); ++j) acc += W(i, j) * X[j];
      out[i] = acc;
    }
    n.value = std::move(out);
  } else if (X.cols() == W.cols()) {
    // Row batch: X[B x n] * W^T -> [B x m]
    const std::size_t B = X.rows(), m = W.rows(), k = W.cols();
    NumArray out(B, m);
    for (std::size_t p = 0; p < B; ++p) {
      const double* xr = X.data() + p * k;
      double* orow = out.data() + p * m;
      for (std::size_t i = 0; i < m; ++i) {
        const double* wr = W.data() + i * k;
        double acc = 0.0;
        for (std::size_t j = 0; j < k; ++j) acc += xr[j] * wr[j];
        orow[i] = acc;
      }
    }
    n.value = std::move(out);
  } else {
    throw std::invalid_argument("matvec: incompatible shapes " +
                                shape_string(W) + " and " + shape_string(X));
  }
  return push(std::move(n));
}

namespace {
template <typename F>
NumArray zip(const NumArray& a, const NumArray& b, F f, const char* name) {
  if (!a.same_shape(b))
    throw std::invalid_argument(std::string(name) + ": shape mismatch " +
                                shape_string(a) + " vs " + shape_string(b));
  NumArray out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i], b[i]);
  return out;
}

template <typename F>
NumArray zip_row(const NumArray& m, const NumArray& v, F f, const char* name) {
  if (v.cols() != 1 || v.rows() != m.cols())
    throw std::invalid_argument(
        std::string(name) + ": vector length must equal matrix columns, got " +
        shape_string(m) + " and " + shape_string(v));
  NumArray out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = f(m(i, j), v[j]);
  return out;
}
}  // namespace

NodeId Tape::add(NodeId a, NodeId b) {
  check_exists(a);
  check_exists(b);
  Node n;
  n.op = Op::kAdd;
  n.a = a;
  n.b = b;
  n.value = zip(nodes_[a].value, nodes_[b].value,
                [](double x, double y) { return x + y; }, "add");
  return push(std::move(n));
}

NodeId Tape::sub(NodeId a, NodeId b) {
  check_exists(a);
  check_exists(b);
  Node n;
  n.op = Op::kSub;
  n.a = a;
  n.b = b;
  n.value = zip(nodes_[a].value, nodes_[b].value,
                [](double x, double y) { return x - y; }, "sub");
  return push(std::move(n));
}

NodeId Tape::mul(NodeId a, NodeId b) {
  check_exists(a);
  check_exists(b);
  Node n;
  n.op = Op::kMul;
  n.a = a;
  n.b = b;
  n.value = zip(nodes_[a].value, nodes_[b].value,
                [](double x, double y) { return x * y; }, "mul");
  return push(std::move(n));
}

NodeId Tape::div(NodeId a, NodeId b) {
  check_exists(a);
  check_exists(b);
  Node n;
  n.op = Op::kDiv;
  n.a = a;
  n.b = b;
  n.value = zip(nodes_[a].value, nodes_[b].value,
                [](double x, double y) { return x / y; }, "div");
  return push(std::move(n));
}

NodeId Tape::add_row(NodeId m, NodeId v) {
  check_exists(m);
  check_exists(v);
  Node n;
  n.op = Op::kAddRow;
  n.a = m;
  n.b = v;
  n.value = zip_row(nodes_[m].value, nodes_[v].value,
                    [](double x, double y) { return x + y; }, "add_row");
  return push(std::move(n));
}

NodeId Tape::sub_row(NodeId m, NodeId v) {
  check_exists(m);
  check_exists(v);
  Node n;
  n.op = Op::kSubRow;
  n.a = m;
  n.b = v;
  n.value = zip_row(nodes_[m].value, nodes_[v].value,
                    [](double x, double y) { return x - y; }, "sub_row");
  return push(std::move(n));
}

NodeId Tape::mul_row(NodeId m, NodeId v) {
  check_exists(m);
  check_exists(v);
  Node n;
  n.op = Op::kMulRow;
  n.a = m;
  n.b = v;
  n.value = zip_row(nodes_[m].value, nodes_[v].value,
                    [](double x, double y) { return x * y; }, "mul_row");
  return push(std::move(n));
}

NodeId Tape::div_col(NodeId m, NodeId c) {
  check_exists(m);
  check_exists(c);
  const NumArray& M = nodes_[m].value;
  const NumArray& C = nodes_[c].value;
  require(C.cols() == 1 && C.rows() == M.rows(),
          "div_col: divisor must be a column vector matching matrix rows");
  Node n;
  n.op = Op::kDivCol;
  n.a = m;
  n.b = c;
  NumArray out(M.rows(), M.cols());
  for (std::size_t i = 0; i < M.rows(); ++i)
    for (std::size_t j = 0; j < M.cols(); ++j) out(i, j) = M(i, j) / C[i];
  n.value = std::move(out);
  return push(std::move(n));
}

NodeId Tape::div_scalar(NodeId a, NodeId s) {
  check_exists(a);
  check_exists(s);
  require(nodes_[s].value.is_scalar(), "div_scalar: divisor must be scalar");
  const double d = nodes_[s].value.value();
  const NumArray& A = nodes_[a].value;
  Node n;
  n.op = Op::kDivScalar;
  n.a = a;
  n.b = s;
  NumArray out(A.rows(), A.cols());
  for (std::size_t i = 0; i < A.size(); ++i) out[i] = A[i] / d;
  n.value = std::move(out);
  return push(std::move(n));
}

NodeId Tape::scale(NodeId x, double a, double b) {
  check_exists(x);
  const NumArray& X = nodes_[x].value;
  Node n;
  n.op = Op::kScale;
  n.a = x;
  n.p0 = a;
  n.p1 = b;
  NumArray out(X.rows(), X.cols());
  for (std::size_t i = 0; i < X.size(); ++i) out[i] = a * X[i] + b;
  n.value = std::move(out);
  return push(std::move(n));
}

namespace {
template <typename F>
NumArray map(const NumArray& x, F f) {
  NumArray out(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = f(x[i]);
  return out;
}
}  // namespace

NodeId Tape::tanh(NodeId x) {
  check_exists(x);
  Node n;
  n.op = Op::kTanh;
  n.a = x;
  n.value = map(nodes_[x].value, [](double v) { return std::tanh(v); });
  return push(std::move(n));
}

NodeId Tape::sigmoid(NodeId x) {
  check_exists(x);
  Node n;
  n.op = Op::kSigmoid;
  n.a = x;
  n.value = map(nodes_[x].value,
                [](double v) { return 1.0 / (1.0 + std::exp(-v)); });
  return push(std::move(n));
}

NodeId Tape::pos(NodeId x) {
  check_exists(x);
  Node n;
  n.op = Op::kPos;
  n.a = x;
  n.value = map(nodes_[x].value, [](double v) { return v > 0.0 ? v : 0.0; });
  return push(std::move(n));
}

NodeId Tape::abs(NodeId x) {
  check_exists(x);
  Node n;
  n.op = Op::kAbs;
  n.a = x;
  n.value = map(nodes_[x].value, [](double v) { return std::fabs(v); });
  return push(std::move(n));
}

NodeId Tape::clip(NodeId x, double lo, double hi) {
  check_exists(x);
  require(lo <= hi, "clip: lo must not exceed hi");
  Node n;
  n.op = Op::kClip;
  n.a = x;
  n.p0 = lo;
  n.p1 = hi;
  n.value = map(nodes_[x].value,
                [=](double v) { return std::min(std::max(v, lo), hi); });
  return push(std::move(n));
}

NodeId Tape::clip(NodeId x, const NumArray& lo, const NumArray& hi) {
  check_exists(x);
  const NumArray& X = nodes_[x].value;
  require(lo.cols() == 1 && hi.cols() == 1 && lo.rows() == X.cols() &&
              hi.rows() == X.cols(),
          "clip: per-column bounds must be vectors of length = matrix columns");
  Node n;
  n.op = Op::kClip;
  n.a = x;
  n.lo = lo;
  n.hi = hi;
  NumArray out(X.rows(), X.cols());
  for (std::size_t i = 0; i < X.rows(); ++i)
    for (std::size_t j = 0; j < X.cols(); ++j)
      out(i, j) = std::min(std::max(X(i, j), lo[j]), hi[j]);
  n.value = std::move(out);
  return push(std::move(n));
}

NodeId Tape::square(NodeId x) {
  check_exists(x);
  Node n;
  n.op = Op::kSquare;
  n.a = x;
  n.value = map(nodes_[x].value, [](double v) { return v * v; });
  return push(std::move(n));
}

NodeId Tape::mean(NodeId x) {
  check_exists(x);
  const NumArray& X = nodes_[x].value;
  Node n;
  n.op = Op::kMean;
  n.a = x;
  double acc = 0.0;
  for (std::size_t i = 0; i < X.size(); ++i) acc += X[i];
  n.value = NumArray::scalar(acc / static_cast<double>(X.size()));
  return push(std::move(n));
}

NodeId Tape::variance(NodeId x) {
  check_exists(x);
  const NumArray& X = nodes_[x].value;
  require(X.size() >= 1, "variance: empty input");
  Node n;
  n.op = Op::kVariance;
  n.a = x;
  const double inv = 1.0 / static_cast<double>(X.size());
  double m = 0.0;
  for (std::size_t i = 0; i < X.size(); ++i) m += X[i];
  m *= inv;
  double acc = 0.0;
  for (std::size_t i = 0; i < X.size(); ++i) {
    const double d = X[i] - m;
    acc += d * d;
  }
  n.value = NumArray::scalar(acc * inv);
  return push(std::move(n));
}

NodeId Tape::sum(NodeId x) {
  check_exists(x);
  const NumArray& X = nodes_[x].value;
  Node n;
  n.op = Op::kSum;
  n.a = x;
  double acc = 0.0;
  for (std::size_t i = 0; i < X.size(); ++i) acc += X[i];
  n.value = NumArray::scalar(acc);
  return push(std::move(n));
}

NodeId Tape::row_sum(NodeId x) {
  check_exists(x);
  const NumArray& X = nodes_[x].value;
  Node n;
  n.op = Op::kRowSum;
  n.a = x;
  NumArray out(X.rows(), 1);
  for (std::size_t i = 0; i < X.rows(); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < X.cols(); ++j) acc += X(i, j);
    out[i] = acc;
  }
  n.value = std::move(out);
  return push(std::move(n));
}

NodeId Tape::tail_mean_largest(NodeId x, std::size_t k) {
  check_exists(x);
  const NumArray& X = nodes_[x].value;
  require(k >= 1 && k <= X.size(), "tail_mean: k out of range");
  Node n;
  n.op = Op::kTailMean;
  n.a = x;
  n.p0 = static_cast<double>(k);
  std::vector<std::uint32_t> idx(X.size());
  std::iota(idx.begin(), idx.end(), 0u);
  // Ties broken by index so the selection is deterministic.
  std::sort(idx.begin(), idx.end(), [&](std::uint32_t i, std::uint32_t j) {
    if (X[i] != X[j]) return X[i] > X[j];
    return i < j;
  });
  idx.resize(k);
  double acc = 0.0;
  for (std::uint32_t i : idx) acc += X[i];
  n.ids = std::move(idx);
  n.value = NumArray::scalar(acc / static_cast<double>(k));
  return push(std::move(n));
}

NodeId Tape::concat_cols(std::span<const NodeId> columns) {
  require(!columns.empty(), "concat_cols: no inputs");
  for (NodeId id : columns) check_exists(id);
  const std::size_t rows = nodes_[columns[0]].value.rows();
  for (NodeId id : columns)
    require(nodes_[id].value.cols() == 1 && nodes_[id].value.rows() == rows,
            "concat_cols: inputs must be equal-length column vectors");
  Node n;
  n.op = Op::kConcatCols;
  n.ids.assign(columns.begin(), columns.end());
  NumArray out(rows, columns.size());
  for (std::size_t j = 0; j < columns.size(); ++j) {
    const NumArray& c = nodes_[columns[j]].value;
    for (std::size_t i = 0; i < rows; ++i) out(i, j) = c[i];
  }
  n.value = std::move(out);
  return push(std::move(n));
}

NodeId Tape::slice_col(NodeId m, std::size_t col) {
  check_exists(m);
  const NumArray& M = nodes_[m].value;
  require(col < M.cols(), "slice_col: column out of range");
  Node n;
  n.op = Op::kSliceCol;
  n.a = m;
  n.ids = {static_cast<std::uint32_t>(col)};
  NumArray out(M.rows(), 1);
  for (std::size_t i = 0; i < M.rows(); ++i) out[i] = M(i, col);
  n.value = std::move(out);
  return push(std::move(n));
}

NumArray& Tape::adjoint_slot(NodeId id) {
  NumArray& slot = adjoints_[id];
  if (slot.empty()) {
    const NumArray& v = nodes_[id].value;
    slot = NumArray(v.rows(), v.cols());
  }
  return slot;
}

void Tape::backward(NodeId seed) {
  check_exists(seed);
  require(nodes_[seed].value.is_scalar(), "backward: seed must be scalar");
  adjoints_.assign(nodes_.size(), NumArray());
  adjoint_slot(seed)[0] = 1.0;

  for (std::size_t pos = nodes_.size(); pos-- > 0;) {
    const NodeId id = static_cast<NodeId>(pos);
    const Node& node = nodes_[id];
    const NumArray& g = adjoints_[id];
    if (g.empty() || node.op == Op::kLeaf) continue;
    const NumArray& av = nodes_[node.a].value;

    switch (node.op) {
      case Op::kLeaf:
        break;
      case Op::kMatVec: {
        const NumArray& W = av;
        const NumArray& X = nodes_[node.b].value;
        NumArray& dW = adjoint_slot(node.a);
        NumArray& dX = adjoint_slot(node.b);
        if (X.cols() == 1 && X.rows() == W.cols()) {
          for (std::size_t i = 0; i < W.rows(); ++i) {
            const double gi = g[i];
            for (std::size_t j = 0; j < W.cols(); ++j) {
              dW(i, j) += gi * X[j];
              dX[j] += gi * W(i, j);
            }
          }
        } else {
          const std::size_t B = X.rows(), m = W.rows(), k = W.cols();
          for (std::size_t p = 0; p < B; ++p) {
            const double* grow = g.data() + p * m;
            const double* xrow = X.data() + p * k;
            double* dxrow = dX.data() + p * k;
            for (std::size_t i = 0; i < m; ++i) {
              const double gi = grow[i];
              if (gi == 0.0) continue;
              const double* wrow = W.data() + i * k;
              double* dwrow = dW.data() + i * k;
              for (std::size_t j = 0; j < k; ++j) {
                dwrow[j] += gi * xrow[j];
                dxrow[j] += gi * wrow[j];
              }
            }
          }
        }
        break;
      }
      case Op::kAdd: {
        NumArray& da = adjoint_slot(node.a);
        NumArray& db = adjoint_slot(node.b);
        for (std::size_t i = 0; i < g.size(); ++i) {
          da[i] += g[i];
          db[i] += g[i];
        }
        break;
      }
      case Op::kSub: {
        NumArray& da = adjoint_slot(node.a);
        NumArray& db = adjoint_slot(node.b);
        for (std::size_t i = 0; i < g.size(); ++i) {
          da[i] += g[i];
          db[i] -= g[i];
        }
        break;
      }
      case Op::kMul: {
        const NumArray& bv = nodes_[node.b].value;
        NumArray& da = adjoint_slot(node.a);
        NumArray& db = adjoint_slot(node.b);
        for (std::size_t i = 0; i < g.size(); ++i) {
          da[i] += g[i] * bv[i];
          db[i] += g[i] * av[i];
        }
        break;
      }
      case Op::kDiv: {
        const NumArray& bv = nodes_[node.b].value;
        NumArray& da = adjoint_slot(node.a);
        NumArray& db = adjoint_slot(node.b);
        for (std::size_t i = 0; i < g.size(); ++i) {
          da[i] += g[i] / bv[i];
          db[i] -= g[i] * av[i] / (bv[i] * bv[i]);
        }
        break;
      }
      case Op::kAddRow: {
        NumArray& dm = adjoint_slot(node.a);
        NumArray& dv = adjoint_slot(node.b);
        const std::size_t cols = av.cols();
        for (std::size_t i = 0; i < av.rows(); ++i)
          for (std::size_t j = 0; j < cols; ++j) {
            dm(i, j) += g(i, j);
            dv[j] += g(i, j);
          }
        break;
      }
      case Op::kSubRow: {
        NumArray& dm = adjoint_slot(node.a);
        NumArray& dv = adjoint_slot(node.b);
        for (std::size_t i = 0; i < av.rows(); ++i)
          for (std::size_t j = 0; j < av.cols(); ++j) {
            dm(i, j) += g(i, j);
            dv[j] -= g(i, j);
          }
        break;
      }
      case Op::kMulRow: {
        const NumArray& v = nodes_[node.b].value;
        NumArray& dm = adjoint_slot(node.a);
        NumArray& dv = adjoint_slot(node.b);
        for (std::size_t i = 0; i < av.rows(); ++i)
          for (std::size_t j = 0; j < av.cols(); ++j) {
            dm(i, j) += g(i, j) * v[j];
            dv[j] += g(i, j) * av(i, j);
          }
        break;
      }
      case Op::kDivCol: {
        const NumArray& c = nodes_[node.b].value;
        NumArray& dm = adjoint_slot(node.a);
        NumArray& dc = adjoint_slot(node.b);
        for (std::size_t i = 0; i < av.rows(); ++i) {
          const double ci = c[i];
          double acc = 0.0;
          for (std::size_t j = 0; j < av.cols(); ++j) {
            dm(i, j) += g(i, j) / ci;
            acc += g(i, j) * av(i, j);
          }
          dc[i] -= acc / (ci * ci);
        }
        break;
      }
      case Op::kDivScalar: {
        const double s = nodes_[node.b].value.value();
        NumArray& da = adjoint_slot(node.a);
        NumArray& ds = adjoint_slot(node.b);
        double acc = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
          da[i] += g[i] / s;
          acc += g[i] * av[i];
        }
        ds[0] -= acc / (s * s);
        break;
      }
      case Op::kScale: {
        NumArray& da = adjoint_slot(node.a);
        for (std::size_t i = 0; i < g.size(); ++i) da[i] += g[i] * node.p0;
        break;
      }
      case Op::kTanh: {
        const NumArray& y = node.value;
        NumArray& da = adjoint_slot(node.a);
        for (std::size_t i = 0; i < g.size(); ++i)
          da[i] += g[i] * (1.0 - y[i] * y[i]);
        break;
      }
      case Op::kSigmoid: {
        const NumArray& y = node.value;
        NumArray& da = adjoint_slot(node.a);
        for (std::size_t i = 0; i < g.size(); ++i)
          da[i] += g[i] * y[i] * (1.0 - y[i]);
        break;
      }
      case Op::kPos: {
        // d/dx x+ = 1 for x > 0, 0 for x <= 0.
        NumArray& da = adjoint_slot(node.a);
        for (std::size_t i = 0; i < g.size(); ++i)
          if (av[i] > 0.0) da[i] += g[i];
        break;
      }
      case Op::kAbs: {
        // d/dx |x| = sign(x), 0 at x = 0.
        NumArray& da = adjoint_slot(node.a);
        for (std::size_t i = 0; i < g.size(); ++i) {
          if (av[i] > 0.0)
            da[i] += g[i];
          else if (av[i] < 0.0)
            da[i] -= g[i];
        }
        break;
      }
      case Op::kClip: {
        // Pass-through only strictly inside the interval (0 at boundaries).
        NumArray& da = adjoint_slot(node.a);
        if (node.lo.empty()) {
          for (std::size_t i = 0; i < g.size(); ++i)
            if (av[i] > node.p0 && av[i] < node.p1) da[i] += g[i];
        } else {
          for (std::size_t i = 0; i < av.rows(); ++i)
            for (std::size_t j = 0; j < av.cols(); ++j)
              if (av(i, j) > node.lo[j] && av(i, j) < node.hi[j])
                da(i, j) += g(i, j);
        }
        break;
      }
      case Op::kSquare: {
        NumArray& da = adjoint_slot(node.a);
        for (std::size_t i = 0; i < g.size(); ++i)
          da[i] += g[i] * 2.0 * av[i];
        break;
      }
      case Op::kMean: {
        NumArray& da = adjoint_slot(node.a);
        const double gi = g[0] / static_cast<double>(av.size());
        for (std::size_t i = 0; i < av.size(); ++i) da[i] += gi;
        break;
      }
      case Op::kVariance: {
        // d/dx_i (1/B) sum (x_j - xbar)^2 = (2/B)(x_i - xbar)
        NumArray& da = adjoint_slot(node.a);
        const double inv = 1.0 / static_cast<double>(av.size());
        double m = 0.0;
        for (std::size_t i = 0; i < av.size(); ++i) m += av[i];
        m *= inv;
        const double c = g[0] * 2.0 * inv;
        for (std::size_t i = 0; i < av.size(); ++i) da[i] += c * (av[i] - m);
        break;
      }
      case Op::kSum: {
        NumArray& da = adjoint_slot(node.a);
        for (std::size_t i = 0; i < av.size(); ++i) da[i] += g[0];
        break;
      }
      case Op::kRowSum: {
        NumArray& da = adjoint_slot(node.a);
        for (std::size_t i = 0; i < av.rows(); ++i)
          for (std::size_t j = 0; j < av.cols(); ++j) da(i, j) += g[i];
        break;
      }
      case Op::kTailMean: {
        NumArray& da = adjoint_slot(node.a);
        const double gi = g[0] / node.p0;
        for (std::uint32_t i : node.ids) da[i] += gi;
        break;
      }
      case Op::kConcatCols: {
        for (std::size_t j = 0; j < node.ids.size(); ++j) {
          NumArray& dc = adjoint_slot(node.ids[j]);
          for (std::size_t i = 0; i < dc.rows(); ++i) dc[i] += g(i, j);
        }
        break;
      }
      case Op::kSliceCol: {
        NumArray& dm = adjoint_slot(node.a);
        const std::size_t col = node.ids[0];
        for (std::size_t i = 0; i < g.rows(); ++i) dm(i, col) += g[i];
        break;
      }
    }
  }
}

const NumArray& Tape::grad(NodeId id) {
  check_exists(id);
  if (adjoints_.size() != nodes_.size())
    throw std::logic_error("grad: backward() has not been run");
  return adjoint_slot(id);
}

void Tape::reset() {
  nodes_.clear();
  adjoints_.clear();
}

}  // namespace frontierlab
