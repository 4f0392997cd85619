#include "frontierlab/network.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

#include "frontierlab/rng.hpp"

namespace frontierlab {

std::string head_name(OutputHead head) {
  switch (head) {
    case OutputHead::kIdentity: return "identity";
    case OutputHead::kSigmoid: return "sigmoid";
    case OutputHead::kTanh: return "tanh";
  }
  return "identity";
}

OutputHead head_from_name(std::string_view name) {
  if (name == "identity") return OutputHead::kIdentity;
  if (name == "sigmoid") return OutputHead::kSigmoid;
  if (name == "tanh") return OutputHead::kTanh;
  throw std::invalid_argument("unknown output head: " + std::string(name));
}

std::size_t NetworkParams::param_count() const {
  std::size_t count = 0;
  for (std::size_t l = 0; l + 1 < layer_dims.size(); ++l)
    count += layer_dims[l + 1] * (layer_dims[l] + 1);
  return count;
}

std::vector<NumArray*> NetworkParams::param_list() {
  std::vector<NumArray*> out;
  out.reserve(weights.size() * 2);
  for (std::size_t l = 0; l < weights.size(); ++l) {
    out.push_back(&weights[l]);
    out.push_back(&biases[l]);
  }
  return out;
}

std::vector<const NumArray*> NetworkParams::param_list() const {
  std::vector<const NumArray*> out;
  out.reserve(weights.size() * 2);
  for (std::size_t l = 0; l < weights.size(); ++l) {
    out.push_back(&weights[l]);
    out.push_back(&biases[l]);
  }
  return out;
}

std::size_t hidden_width_for(std::size_t n_assets) { return 10 + n_assets; }

NetworkParams init_network(const std::vector<std::size_t>& layer_dims,
                           OutputHead head, std::uint64_t seed) {
  if (layer_dims.size() != 5)
    throw std::invalid_argument(
        "init_network: expected dims [d0, m, m, m, d1]");
  for (std::size_t d : layer_dims)
    if (d == 0) throw std::invalid_argument("init_network: zero dimension");
  if (layer_dims[1] != layer_dims[2] || layer_dims[2] != layer_dims[3])
    throw std::invalid_argument("init_network: hidden widths must be equal");

  NetworkParams params;
  params.layer_dims = layer_dims;
  params.head = head;
  rng::Stream stream(seed);
  for (std::size_t l = 0; l + 1 < layer_dims.size(); ++l) {
    const std::size_t fan_in = layer_dims[l];
    const std::size_t fan_out = layer_dims[l + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    NumArray w(fan_out, fan_in);
    for (std::size_t i = 0; i < w.size(); ++i)
      w[i] = stream.uniform(-limit, limit);
    params.weights.push_back(std::move(w));
    params.biases.emplace_back(fan_out, 1);
  }
  return params;
}

BoundNetwork bind_network(Tape& tape, const NetworkParams& params) {
  BoundNetwork bound;
  bound.params = &params;
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    bound.weight_ids.push_back(tape.leaf(params.weights[l]));
    bound.bias_ids.push_back(tape.leaf(params.biases[l]));
  }
  return bound;
}

NodeId network_forward(Tape& tape, const BoundNetwork& net, NodeId input) {
  const NetworkParams& p = *net.params;
  const NumArray& in = tape.value(input);
  const bool batched = !(in.cols() == 1 && in.rows() == p.input_dim());
  if (batched && in.cols() != p.input_dim())
    throw std::invalid_argument("network_forward: input dimension mismatch");

  NodeId h = input;
  const std::size_t n_layers = p.weights.size();
  for (std::size_t l = 0; l < n_layers; ++l) {
    NodeId z = tape.matvec(net.weight_ids[l], h);
    z = batched ? tape.add_row(z, net.bias_ids[l])
                : tape.add(z, net.bias_ids[l]);
    h = (l + 1 < n_layers) ? tape.tanh(z) : z;
  }
  switch (p.head) {
    case OutputHead::kIdentity: return h;
    case OutputHead::kSigmoid: return tape.sigmoid(h);
    case OutputHead::kTanh: return tape.tanh(h);
  }
  return h;
}

NumArray network_forward_plain(const NetworkParams& p, const NumArray& input) {
  const bool batched = !(input.cols() == 1 && input.rows() == p.input_dim());
  if (batched && input.cols() != p.input_dim())
    throw std::invalid_argument("network_forward_plain: dimension mismatch");
  const std::size_t B = batched ? input.rows() : 1;

  NumArray h = batched ? input : NumArray(1, p.input_dim());
  if (!batched)
    for (std::size_t j = 0; j < p.input_dim(); ++j) h(0, j) = input[j];

  const std::size_t n_layers = p.weights.size();
  for (std::size_t l = 0; l < n_layers; ++l) {
    const NumArray& W = p.weights[l];
    const NumArray& b = p.biases[l];
    const std::size_t m = W.rows(), k = W.cols();
    NumArray z(B, m);
    for (std::size_t pth = 0; pth < B; ++pth) {
      const double* hr = h.data() + pth * k;
      double* zr = z.data() + pth * m;
      for (std::size_t i = 0; i < m; ++i) {
        const double* wr = W.data() + i * k;
        double acc = b[i];
        for (std::size_t j = 0; j < k; ++j) acc += wr[j] * hr[j];
        zr[i] = acc;
      }
    }
    if (l + 1 < n_layers)
      for (std::size_t i = 0; i < z.size(); ++i) z[i] = std::tanh(z[i]);
    h = std::move(z);
  }
  switch (p.head) {
    case OutputHead::kSigmoid:
      for (std::size_t i = 0; i < h.size(); ++i)
        h[i] = 1.0 / (1.0 + std::exp(-h[i]));
      break;
    case OutputHead::kTanh:
      for (std::size_t i = 0; i < h.size(); ++i) h[i] = std::tanh(h[i]);
      break;
    case OutputHead::kIdentity:
      break;
  }
  if (!batched) {
    NumArray out(p.output_dim(), 1);
    for (std::size_t j = 0; j < p.output_dim(); ++j) out[j] = h(0, j);
    return out;
  }
  return h;
}

AdamState make_adam_state(const std::vector<const NumArray*>& params) {
  AdamState state;
  for (const NumArray* p : params) {
    state.first_moment.emplace_back(p->rows(), p->cols());
    state.second_moment.emplace_back(p->rows(), p->cols());
  }
  return state;
}

void adam_step(const std::vector<NumArray*>& params,
               const std::vector<const NumArray*>& grads, AdamState& state,
               double lr) {
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;
  if (params.size() != grads.size() ||
      params.size() != state.first_moment.size())
    throw std::invalid_argument("adam_step: tensor count mismatch");

  state.step_count += 1;
  const double t = static_cast<double>(state.step_count);
  const double corr1 = 1.0 - std::pow(kBeta1, t);
  const double corr2 = 1.0 - std::pow(kBeta2, t);

  for (std::size_t k = 0; k < params.size(); ++k) {
    NumArray& p = *params[k];
    const NumArray& g = *grads[k];
    if (!p.same_shape(g))
      throw std::invalid_argument("adam_step: gradient shape mismatch");
    NumArray& m = state.first_moment[k];
    NumArray& v = state.second_moment[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * g[i];
      v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * g[i] * g[i];
      const double mhat = m[i] / corr1;
      const double vhat = v[i] / corr2;
      p[i] -= lr * mhat / (std::sqrt(vhat) + kEps);
    }
  }
}

double lr_at(const LrSchedule& schedule, std::size_t iteration) {
  if (schedule.lr_initial < schedule.lr_final || schedule.lr_final <= 0.0)
    throw std::invalid_argument("lr schedule: need lr_initial >= lr_final > 0");
  if (iteration > schedule.total_iterations)
    throw std::invalid_argument("lr_at: iteration out of range");
  const double frac = static_cast<double>(iteration) /
                      static_cast<double>(schedule.total_iterations);
  return schedule.lr_initial +
         (schedule.lr_final - schedule.lr_initial) * frac;
}

namespace {

constexpr char kMagic[] = "FRONTIERLAB-NET v1";

void append_float(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

void append_row(std::string& out, const double* row, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    if (j) out += ' ';
    append_float(out, row[j]);
  }
  out += '\n';
}

}  // namespace

std::string serialize_network(const NetworkParams& params) {
  if (params.empty())
    throw std::invalid_argument("serialize_network: empty network");
  std::string out = kMagic;
  out += '\n';
  for (std::size_t i = 0; i < params.layer_dims.size(); ++i) {
    if (i) out += ' ';
    out += std::to_string(params.layer_dims[i]);
  }
  out += '\n';
  out += head_name(params.head);
  out += '\n';
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    const NumArray& w = params.weights[l];
    for (std::size_t i = 0; i < w.rows(); ++i)
      append_row(out, w.data() + i * w.cols(), w.cols());
    append_row(out, params.biases[l].data(), params.biases[l].size());
  }
  return out;
}

namespace {

class LineReader {
 public:
  explicit LineReader(std::string_view text) : text_(text) {}

  std::string_view next() {
    if (pos_ >= text_.size())
      throw std::invalid_argument("network file: unexpected end of stream");
    const std::size_t nl = text_.find('\n', pos_);
    if (nl == std::string_view::npos)
      throw std::invalid_argument("network file: missing trailing newline");
    std::string_view line = text_.substr(pos_, nl - pos_);
    pos_ = nl + 1;
    return line;
  }

  bool exhausted() const { return pos_ >= text_.size(); }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

std::vector<double> parse_floats(std::string_view line, std::size_t expect) {
  std::vector<double> out;
  out.reserve(expect);
  const char* p = line.data();
  const char* end = line.data() + line.size();
  while (p < end) {
    char* next = nullptr;
    std::string token(p, end);  // strtod needs NUL termination
    const double v = std::strtod(token.c_str(), &next);
    if (next == token.c_str())
      throw std::invalid_argument("network file: malformed float");
    p += (next - token.c_str());
    out.push_back(v);
    while (p < end && *p == ' ') ++p;
  }
  if (out.size() != expect)
    throw std::invalid_argument("network file: wrong number of values on line");
  return out;
}

}  // namespace

NetworkParams deserialize_network(std::string_view text) {
  LineReader reader(text);
  if (reader.next() != kMagic)
    throw std::invalid_argument("network file: bad magic or version");

  std::vector<std::size_t> dims;
  {
    std::istringstream ss{std::string(reader.next())};
    long v = 0;
    while (ss >> v) {
      if (v <= 0) throw std::invalid_argument("network file: bad dimension");
      dims.push_back(static_cast<std::size_t>(v));
    }
  }
  if (dims.size() < 2)
    throw std::invalid_argument("network file: bad dimension line");

  NetworkParams params;
  params.layer_dims = dims;
  params.head = head_from_name(reader.next());
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    NumArray w(dims[l + 1], dims[l]);
    for (std::size_t i = 0; i < w.rows(); ++i) {
      auto row = parse_floats(reader.next(), w.cols());
      for (std::size_t j = 0; j < w.cols(); ++j) w(i, j) = row[j];
    }
    auto bias = parse_floats(reader.next(), dims[l + 1]);
    params.weights.push_back(std::move(w));
    params.biases.push_back(NumArray::vector(std::move(bias)));
  }
  if (!reader.exhausted())
    throw std::invalid_argument("network file: trailing content");
  return params;
}

}  // namespace frontierlab
