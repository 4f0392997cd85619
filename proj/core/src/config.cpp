#include "frontierlab/config.hpp"

#include <cmath>
#include <cstdlib>
#include <set>

#include "frontierlab/io.hpp"

namespace frontierlab {

KeyValueMap parse_key_values(std::string_view text) {
  KeyValueMap kv;
  std::size_t line_no = 0;
  for (const std::string& raw : split(text, '\n')) {
    ++line_no;
    std::string line = raw;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no),
                        "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("line " + std::to_string(line_no), "empty key");
    if (kv.count(key))
      throw ConfigError(key, "duplicate key");
    kv[key] = value;
  }
  return kv;
}

namespace {

class Reader {
 public:
  explicit Reader(const KeyValueMap& kv) : kv_(kv) {}

  bool has(const std::string& key) const { return kv_.count(key) > 0; }

  std::string str(const std::string& key, const std::string& fallback) {
    mark(key);
    auto it = kv_.find(key);
    return it == kv_.end() ? fallback : it->second;
  }

  std::string required(const std::string& key) {
    mark(key);
    auto it = kv_.find(key);
    if (it == kv_.end() || it->second.empty())
      throw ConfigError(key, "required");
    return it->second;
  }

  double number(const std::string& key, double fallback) {
    mark(key);
    auto it = kv_.find(key);
    return it == kv_.end() ? fallback : to_double(key, it->second);
  }

  double required_number(const std::string& key) {
    return to_double(key, required(key));
  }

  std::size_t count(const std::string& key, std::size_t fallback) {
    const double v = number(key, static_cast<double>(fallback));
    if (v < 0 || v != std::floor(v))
      throw ConfigError(key, "expected a nonnegative integer");
    return static_cast<std::size_t>(v);
  }

  bool flag(const std::string& key, bool fallback) {
    mark(key);
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    if (it->second == "true" || it->second == "1") return true;
    if (it->second == "false" || it->second == "0") return false;
    throw ConfigError(key, "expected true/false");
  }

  std::vector<double> number_list(const std::string& key) {
    const std::string value = required(key);
    std::vector<double> out;
    for (const std::string& item : split(value, ',')) {
      const std::string token = trim(item);
      if (token.empty()) continue;
      out.push_back(to_double(key, token));
    }
    if (out.empty()) throw ConfigError(key, "expected a list of numbers");
    return out;
  }

  std::optional<std::vector<double>> optional_number_list(
      const std::string& key) {
    mark(key);
    if (!has(key)) return std::nullopt;
    return number_list(key);
  }

  void reject_unknown() const {
    for (const auto& [key, value] : kv_)
      if (!seen_.count(key)) throw ConfigError(key, "unknown key");
  }

 private:
  void mark(const std::string& key) { seen_.insert(key); }

  static double to_double(const std::string& key, const std::string& text) {
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (end == text.c_str() || *end != '\0')
      throw ConfigError(key, "expected a number, got '" + text + "'");
    return v;
  }

  const KeyValueMap& kv_;
  std::set<std::string> seen_;
};

NumArray vector_or_broadcast(Reader& reader, const std::string& key,
                             std::size_t d) {
  auto values = reader.number_list(key);
  if (values.size() == 1) return NumArray(d, 1, values[0]);
  if (values.size() != d)
    throw ConfigError(key, "expected 1 or " + std::to_string(d) + " values");
  return NumArray::vector(std::move(values));
}

MarketModel parse_market(Reader& reader, std::string* name_out) {
  if (reader.has("market.preset")) {
    const std::string name = reader.required("market.preset");
    *name_out = name;
    try {
      return preset(name);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("market.preset", e.what());
    }
  }
  const std::string kind = reader.required("market.kind");
  *name_out = "inline-" + kind;

  auto mu = NumArray::vector(reader.number_list("market.mu"));
  const std::size_t d = mu.rows();
  // Heston correlates asset and variance drivers jointly.
  const std::size_t rho_dim = kind == "heston" ? 2 * d : d;

  NumArray rho;
  const std::string rho_spec = reader.str("market.rho", "identity");
  if (rho_spec == "identity") {
    rho = NumArray(rho_dim, rho_dim);
    for (std::size_t i = 0; i < rho_dim; ++i) rho(i, i) = 1.0;
  } else if (rho_spec == "random") {
    rho = random_correlation(
        rho_dim, static_cast<std::uint64_t>(reader.number(
               "market.rho_seed", 1.0)),
        reader.number("market.rho_shrink", 0.5));
  } else {
    // Flat row-major list.
    std::vector<double> values;
    for (const std::string& item : split(rho_spec, ',')) {
      const std::string token = trim(item);
      if (token.empty()) continue;
      char* end = nullptr;
      values.push_back(std::strtod(token.c_str(), &end));
      if (end == token.c_str() || *end != '\0')
        throw ConfigError("market.rho", "expected a number, got '" + token + "'");
    }
    if (values.size() != rho_dim * rho_dim)
      throw ConfigError("market.rho",
                        "expected identity, random, or a full row-major "
                        "correlation matrix");
    rho = NumArray(rho_dim, rho_dim, std::move(values));
  }

  MarketModel market;
  market.grid.horizon = reader.required_number("market.horizon");
  market.grid.n_steps = reader.count("market.steps", 0);
  if (market.grid.horizon <= 0.0)
    throw ConfigError("market.horizon", "must be positive");
  if (market.grid.n_steps == 0)
    throw ConfigError("market.steps", "must be a positive integer");

  try {
    if (kind == "bs") {
      market.model = BlackScholesModel::make(
          std::move(mu), vector_or_broadcast(reader, "market.sigma", d),
          std::move(rho));
    } else if (kind == "heston") {
      market.model = HestonModel::make(
          std::move(mu), vector_or_broadcast(reader, "market.kappa", d),
          vector_or_broadcast(reader, "market.vbar", d),
          vector_or_broadcast(reader, "market.sigbar", d),
          vector_or_broadcast(reader, "market.v0", d), std::move(rho));
    } else {
      throw ConfigError("market.kind", "expected bs or heston");
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError("market", e.what());
  }
  return market;
}

}  // namespace

RunConfig parse_run_config(const KeyValueMap& kv) {
  Reader reader(kv);
  RunConfig config;

  config.seed = static_cast<std::uint64_t>(reader.count("seed", 1));
  config.threads = reader.count("threads", 0);
  config.out_dir = reader.str("out", ".");
  config.market = parse_market(reader, &config.market_name);
  config.market.x0 = reader.number("x0", 1.0);
  if (config.market.x0 <= 0.0) throw ConfigError("x0", "must be positive");
  const std::size_t d = config.market.dim();

  // strategy
  {
    StrategySpec& s = config.strategy;
    try {
      s.kind = strategy_kind_from_name(
          reader.str("strategy.kind", "unconstrained"));
    } catch (const std::invalid_argument& e) {
      throw ConfigError("strategy.kind", e.what());
    }
    if (reader.has("strategy.lo") || reader.has("strategy.hi")) {
      Bounds b;
      b.lo = vector_or_broadcast(reader, "strategy.lo", d);
      b.hi = vector_or_broadcast(reader, "strategy.hi", d);
      s.bounds = std::move(b);
    }
    if (reader.has("strategy.eta")) {
      MoveLimit m;
      m.eta = vector_or_broadcast(reader, "strategy.eta", d);
      s.move_limit = std::move(m);
    }
    const std::string init =
        reader.str("strategy.initial_weights", "optimized");
    if (init == "optimized")
      s.initial_weights = InitialWeightsMode::kOptimized;
    else if (init == "fixed-equal")
      s.initial_weights = InitialWeightsMode::kFixedEqual;
    else
      throw ConfigError("strategy.initial_weights",
                        "expected optimized or fixed-equal");
    s.permute_projection = reader.flag("strategy.permute_projection", false);
  }

  // objective
  {
    ObjectiveSpec& o = config.objective;
    try {
      o.criterion =
          criterion_from_name(reader.str("objective.criterion", "mv_direct"));
      o.penalty_model = penalty_model_from_name(
          reader.str("objective.penalty_model", "none"));
    } catch (const std::invalid_argument& e) {
      throw ConfigError("objective", e.what());
    }
    if (o.criterion == Criterion::kCvar) {
      if (!reader.has("objective.alpha"))
        throw ConfigError("objective.alpha",
                          "required for the cvar criterion");
      o.alpha = reader.required_number("objective.alpha");
    }
    o.epsilon = reader.number("objective.epsilon", 1e-4);
    o.subgroups = reader.count("objective.subgroups", 10);
    const std::string sampler =
        reader.str("objective.sampler", "uniform");
    if (sampler == "uniform")
      o.sampler.kind = BetaSampler::Kind::kUniform;
    else if (sampler == "squared_uniform")
      o.sampler.kind = BetaSampler::Kind::kSquaredUniform;
    else
      throw ConfigError("objective.sampler",
                        "expected uniform or squared_uniform");
    o.sampler.lower = reader.number("objective.sampler_lower", 0.0);
    o.sampler.upper = reader.number("objective.sampler_upper", 1.0);
    o.sampler.label_max = reader.number("objective.sampler_max", 1.0);
  }

  // sweep
  {
    SweepSpec& s = config.sweep;
    try {
      s.mode = sweep_mode_from_name(reader.str("sweep.mode", "point"));
    } catch (const std::invalid_argument& e) {
      throw ConfigError("sweep.mode", e.what());
    }
    s.label_kind = reader.str("sweep.label_kind", "beta");
    const std::string grid = reader.str("sweep.grid", "list");
    if (grid == "list") {
      s.labels = reader.number_list("sweep.labels");
    } else if (grid == "cvar_squared") {
      s.labels = cvar_beta_grid(reader.count("sweep.count", 40));
    } else if (grid == "gamma_from_betas") {
      if (config.market.is_heston())
        throw ConfigError("sweep.grid",
                          "gamma_from_betas needs a Black-Scholes market");
      const auto betas = reader.number_list("sweep.labels");
      const AnalyticSolution solution = solve_analytic(config.market.bs());
      s.labels = gamma_grid_from_betas(betas, solution,
                                       config.market.grid.horizon,
                                       config.market.x0);
      s.label_kind = "gamma";
    } else {
      throw ConfigError("sweep.grid",
                        "expected list, cvar_squared, or gamma_from_betas");
    }
    config.objective.mode = s.mode == SweepMode::kGlobalDet
                                ? ResolutionMode::kGlobalDet
                                : s.mode == SweepMode::kGlobalRand
                                      ? ResolutionMode::kGlobalRand
                                      : ResolutionMode::kPoint;
    if (s.label_kind == "gamma" &&
        config.objective.criterion == Criterion::kMvDirect)
      throw ConfigError("sweep.label_kind",
                        "gamma labels require the mv_aux criterion");
  }

  // train
  {
    TrainConfig& t = config.train;
    t.batch_size = reader.count("train.batch_size", 300);
    t.n_iterations = reader.count("train.n_iterations", 15000);
    t.lr_initial = reader.number("train.lr_initial", 2.5e-3);
    t.lr_final = reader.number("train.lr_final", 2.5e-4);
    t.eval_samples = reader.count("train.eval_samples", 100000);
    t.stabilization_every = reader.count("train.stabilization_every", 100);
    t.stabilization_samples =
        reader.count("train.stabilization_samples", 10000);
    t.stabilization_tol = reader.number("train.stabilization_tol", 1e-3);
    t.n_restarts = reader.count("train.n_restarts", 1);
    t.warm_start_chain = reader.flag("train.warm_start_chain", false);
    t.seed = config.seed;
    t.threads = config.threads == 0 ? 0 : config.threads;
  }

  reader.reject_unknown();

  // Cross-field validation, surfaced with the config-field vocabulary.
  try {
    config.sweep.validate();
    config.train.validate();
    if (config.sweep.mode != SweepMode::kStatic)
      config.strategy.validate(d);
    config.objective.validate(config.sweep.mode == SweepMode::kStatic
                                  ? StrategySpec{StrategyKind::kConstantMix}
                                  : config.strategy);
    if (config.sweep.mode == SweepMode::kGlobalRand) {
      if (config.train.batch_size % config.objective.subgroups != 0 ||
          config.train.batch_size / config.objective.subgroups < 2)
        throw ConfigError("train.batch_size",
                          "must be a multiple of objective.subgroups with "
                          "subgroups of size >= 2");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError("config", e.what());
  }
  return config;
}

RunConfig load_run_config(const std::string& path) {
  return parse_run_config(parse_key_values(read_file(path)));
}

}  // namespace frontierlab
