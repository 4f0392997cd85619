#include <doctest.h>

#include <cmath>

#include "frontierlab/frontier.hpp"
#include "frontierlab/market.hpp"

using namespace frontierlab;

namespace {

MarketModel tiny_market() {
  MarketModel market;
  market.model = BlackScholesModel::make(
      NumArray::vector({0.05}), NumArray::vector({0.3}), NumArray(1, 1, {1.0}));
  market.grid = {1.0, 2};
  return market;
}

TrainConfig small_config(std::size_t iters, std::size_t batch, double lr0,
                         double lr1, std::uint64_t seed) {
  TrainConfig config;
  config.batch_size = batch;
  config.n_iterations = iters;
  config.lr_initial = lr0;
  config.lr_final = lr1;
  config.seed = seed;
  config.eval_samples = 20000;
  config.stabilization_every = 100;
  config.stabilization_samples = 4000;
  config.threads = 1;
  return config;
}

}  // namespace

TEST_SUITE("frontier") {

TEST_CASE("stabilization check") {
  SUBCASE("constant trace converges") {
    const std::vector<double> trace(12, -1.25);
    CHECK(stabilization_check(trace));
  }
  SUBCASE("10% improvement per checkpoint does not converge") {
    std::vector<double> trace;
    double v = -1.0;
    for (int i = 0; i < 15; ++i) {
      trace.push_back(v);
      v *= 1.1;  // strictly improving (more negative)
    }
    CHECK_FALSE(stabilization_check(trace));
  }
  SUBCASE("short trace is an error") {
    const std::vector<double> empty_trace;
    CHECK_THROWS_AS((void)stabilization_check(empty_trace),
                    std::invalid_argument);
    const std::vector<double> one{1.0};
    CHECK_THROWS_AS((void)stabilization_check(one), std::invalid_argument);
  }
}

TEST_CASE("cvar beta grid formula") {
  const auto grid = cvar_beta_grid(40);
  CHECK(grid[0] == 0.0);
  CHECK(grid[39] == doctest::Approx(3.8025));  // (39*2/40)^2
  CHECK(grid[20] == doctest::Approx(1.0));
}

TEST_CASE("evaluate: zero-weight policy sits at (x0, 0)") {
  MarketModel market = preset("bs4-continuous");
  market.grid.n_steps = 8;
  TrainedPolicy policy;
  policy.kind = StrategyKind::kUnconstrained;
  policy.net = init_network({2, 14, 14, 14, 4}, OutputHead::kIdentity, 1);
  for (auto* p : policy.net.param_list()) p->fill(0.0);
  policy.scaling = {1.0, 1.0, {}, 1.0};

  const StrategySpec spec{StrategyKind::kUnconstrained};
  const ObjectiveSpec objective;
  const FrontierPoint point = evaluate_policy(policy, market, spec, objective,
                                              "beta", 1.0, 5000, 99, 2);
  CHECK(point.mean == 1.0);
  CHECK(point.risk == 0.0);
  CHECK(point.max_constraint_violation == 0.0);
  CHECK(point.n_samples == 5000);
}

TEST_CASE("evaluate is thread-count invariant") {
  MarketModel market = preset("bs4-continuous");
  market.grid.n_steps = 12;
  TrainedPolicy policy;
  policy.kind = StrategyKind::kSimplex;
  policy.net = init_network({2, 14, 14, 14, 4}, OutputHead::kSigmoid, 5);
  policy.scaling = {1.0, 1.0, {}, 1.0};
  const StrategySpec spec{StrategyKind::kSimplex};
  const ObjectiveSpec objective;

  const FrontierPoint a = evaluate_policy(policy, market, spec, objective,
                                          "beta", 1.0, 30000, 7, 1);
  const FrontierPoint b = evaluate_policy(policy, market, spec, objective,
                                          "beta", 1.0, 30000, 7, 4);
  CHECK(a.mean == b.mean);
  CHECK(a.risk == b.risk);
  CHECK(a.max_constraint_violation == b.max_constraint_violation);
}

TEST_CASE("constant-mix evaluation matches the closed-form moment oracle") {
  const MarketModel market = preset("bs4-continuous");
  TrainedPolicy policy;
  policy.kind = StrategyKind::kConstantMix;
  policy.theta_static = NumArray(4, 1, 0.0);  // equal weights
  policy.scaling = {1.0, 1.0, {}, 1.0};
  const StrategySpec spec{StrategyKind::kConstantMix};
  const ObjectiveSpec objective;

  const std::size_t n = 200000;
  const FrontierPoint point = evaluate_policy(policy, market, spec, objective,
                                              "beta", 1.0, n, 2024, 2);

  // Independent oracle: exact lognormal one-step moments compounded over the
  // grid (steps are i.i.d.).
  const BlackScholesModel& model = market.bs();
  const double dt = market.grid.dt();
  const double w = 0.25;
  double ey = 0.0, eyy = 0.0;
  for (std::size_t j = 0; j < 4; ++j)
    ey += w * (std::exp(model.mu[j] * dt) - 1.0);
  for (std::size_t j = 0; j < 4; ++j)
    for (std::size_t k = 0; k < 4; ++k) {
      const double gross =
          std::exp((model.mu[j] + model.mu[k]) * dt +
                   model.rho(j, k) * model.sigma[j] * model.sigma[k] * dt);
      eyy += w * w *
             (gross - std::exp(model.mu[j] * dt) - std::exp(model.mu[k] * dt) +
              1.0);
    }
  const double step_mean = 1.0 + ey;
  const double step_sq = 1.0 + 2.0 * ey + eyy;
  const double n_steps = static_cast<double>(market.grid.n_steps);
  const double oracle_mean = std::pow(step_mean, n_steps);
  const double oracle_var =
      std::pow(step_sq, n_steps) - oracle_mean * oracle_mean;

  CHECK(std::fabs(point.mean - oracle_mean) < 5.0 * point.mean_std_error);
  CHECK(std::fabs(point.risk - oracle_var) <
        5.0 * oracle_var * std::sqrt(2.0 / static_cast<double>(n)));
  CHECK(point.max_constraint_violation == 0.0);
}

TEST_CASE("tiny instance: trained loss reaches the constant-control optimum") {
  // d=1, N=2: brute-force the best constant fraction on a fixed sample and
  // require the trained dynamic policy to do at least as well (within 1e-3)
  // on that same sample.
  const MarketModel market = tiny_market();
  const double beta = 1.0;

  StrategySpec spec{StrategyKind::kUnconstrained};
  ObjectiveSpec objective;  // mv_direct
  TrainConfig config = small_config(1200, 256, 5e-3, 5e-4, 31);

  const TrainResult result =
      train_point(market, spec, objective, beta, config);
  REQUIRE(result.ok);

  const std::size_t n = 100000;
  const std::uint64_t probe_seed = 555;
  const PathSet paths = simulate(market, n, probe_seed);

  auto const_loss = [&](double w) {
    double mean = 0.0, sq = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      const double xt = (1.0 + w * paths.yield(p, 0, 0)) *
                        (1.0 + w * paths.yield(p, 1, 0));
      mean += xt;
      sq += xt * xt;
    }
    mean /= static_cast<double>(n);
    const double var = sq / static_cast<double>(n) - mean * mean;
    return -mean + beta * var;
  };
  double brute = 1e300;
  for (int i = -2500; i <= 2500; ++i)
    brute = std::min(brute, const_loss(i * 0.002));

  const FrontierPoint point =
      evaluate_policy(result.policy, market, spec, objective, "beta", beta, n,
                      probe_seed, 2);
  const double trained_loss = -point.mean + beta * point.risk;
  CHECK(trained_loss <= brute + 1e-3);
}

TEST_CASE("return-seeking sanity at beta = 0") {
  MarketModel market = preset("bs4-continuous");
  market.grid.n_steps = 13;
  StrategySpec spec{StrategyKind::kSimplex};
  ObjectiveSpec objective;
  TrainConfig config = small_config(400, 128, 5e-3, 1e-3, 3);

  const TrainResult result = train_point(market, spec, objective, 0.0, config);
  REQUIRE(result.ok);
  const FrontierPoint point =
      evaluate_policy(result.policy, market, spec, objective, "beta", 0.0,
                      20000, eval_seed_for(config.seed), 2);
  CHECK(point.mean > market.x0);
}

TEST_CASE("training is bitwise reproducible") {
  const MarketModel market = tiny_market();
  StrategySpec spec{StrategyKind::kUnconstrained};
  ObjectiveSpec objective;
  const TrainConfig config = small_config(150, 64, 2e-3, 1e-3, 11);

  const TrainResult a = train_point(market, spec, objective, 1.0, config);
  const TrainResult b = train_point(market, spec, objective, 1.0, config);
  REQUIRE(a.ok);
  REQUIRE(b.ok);
  for (std::size_t l = 0; l < a.policy.net.weights.size(); ++l)
    CHECK(a.policy.net.weights[l] == b.policy.net.weights[l]);
  CHECK(a.objective_trace == b.objective_trace);

  const FrontierPoint pa = evaluate_policy(a.policy, market, spec, objective,
                                           "beta", 1.0, 10000, 77, 1);
  const FrontierPoint pb = evaluate_policy(b.policy, market, spec, objective,
                                           "beta", 1.0, 10000, 77, 3);
  CHECK(pa.mean == pb.mean);
  CHECK(pa.risk == pb.risk);
}

TEST_CASE("static optimization") {
  SUBCASE("single asset is forced to buy-and-hold") {
    const MarketModel market = tiny_market();
    ObjectiveSpec objective;
    TrainConfig config = small_config(300, 128, 1e-2, 1e-3, 5);
    const TrainResult result = static_optimize(market, objective, 1.0, config);
    REQUIRE(result.ok);
    // d=1 simplex-parameterized weights are identically 1: the frontier
    // point is buy-and-hold regardless of theta.
    const StrategySpec spec{StrategyKind::kConstantMix};
    const FrontierPoint point =
        evaluate_policy(result.policy, market, spec, objective, "beta", 1.0,
                        50000, 123, 2);
    const PathSet paths = simulate(market, 50000, 123);
    double mean = 0.0;
    for (std::size_t p = 0; p < 50000; ++p)
      mean += (1.0 + paths.yield(p, 0, 0)) * (1.0 + paths.yield(p, 1, 0));
    mean /= 50000.0;
    CHECK(point.mean == doctest::Approx(mean).epsilon(1e-12));
  }
  SUBCASE("beta = 0 concentrates on the highest-drift asset") {
    MarketModel market = preset("bs4-continuous");
    market.grid.n_steps = 12;
    ObjectiveSpec objective;
    TrainConfig config = small_config(1500, 64, 5e-2, 1e-2, 7);
    const TrainResult result = static_optimize(market, objective, 0.0, config);
    REQUIRE(result.ok);
    const NumArray w = constant_mix_weights_plain(result.policy.theta_static);
    // mu_4 = 0.0475 dominates; the learned mix should lean there hard.
    CHECK(w[3] > 0.9);
  }
}

TEST_CASE("run_sweep sorts by risk and flags dominated points") {
  SUBCASE("sorted output has non-decreasing risk") {
    const MarketModel market = tiny_market();
    StrategySpec spec{StrategyKind::kUnconstrained};
    ObjectiveSpec objective;
    SweepSpec sweep;
    sweep.labels = {2.0, 0.5, 1.0};
    TrainConfig config = small_config(200, 64, 2e-3, 1e-3, 13);
    config.eval_samples = 4000;
    config.threads = 2;
    const auto points = run_sweep(market, spec, objective, sweep, config);
    REQUIRE(points.size() == 3);
    for (std::size_t i = 1; i < points.size(); ++i)
      CHECK(points[i].risk >= points[i - 1].risk);
  }
  SUBCASE("synthetic oscillating frontier is flagged, not dropped") {
    std::vector<FrontierPoint> points(3);
    points[0].risk = 0.10;
    points[0].mean = 1.50;
    points[0].mean_std_error = 1e-4;
    points[1].risk = 0.20;  // higher risk, much lower mean: dominated
    points[1].mean = 1.20;
    points[1].mean_std_error = 1e-4;
    points[2].risk = 0.30;
    points[2].mean = 1.60;
    points[2].mean_std_error = 1e-4;
    const auto flagged = pareto_violations(points);
    REQUIRE(flagged.size() == 1);
    CHECK(flagged[0] == 1);
  }
  SUBCASE("noisy but consistent points stay unflagged within the band") {
    std::vector<FrontierPoint> points(2);
    points[0].risk = 0.10;
    points[0].mean = 1.5001;
    points[0].mean_std_error = 1e-3;
    points[1].risk = 0.20;
    points[1].mean = 1.4999;  // within 4 sigma of the previous point
    points[1].mean_std_error = 1e-3;
    CHECK(pareto_violations(points).empty());
  }
}

TEST_CASE("K=1 global training works and evaluates like a point") {
  const MarketModel market = tiny_market();
  StrategySpec spec{StrategyKind::kUnconstrained};
  ObjectiveSpec objective;
  objective.mode = ResolutionMode::kGlobalDet;
  SweepSpec sweep;
  sweep.mode = SweepMode::kGlobalDet;
  sweep.labels = {1.0};
  TrainConfig config = small_config(300, 64, 2e-3, 1e-3, 17);
  config.eval_samples = 4000;

  const auto points = run_sweep(market, spec, objective, sweep, config);
  REQUIRE(points.size() == 1);
  CHECK_FALSE(points[0].failed);
  CHECK(points[0].n_samples == 4000);
}

TEST_CASE("global random training with subgroups") {
  const MarketModel market = tiny_market();
  StrategySpec spec{StrategyKind::kUnconstrained};
  ObjectiveSpec objective;
  objective.mode = ResolutionMode::kGlobalRand;
  objective.subgroups = 4;
  objective.sampler.kind = BetaSampler::Kind::kUniform;
  objective.sampler.lower = 0.2;
  objective.sampler.upper = 2.0;
  SweepSpec sweep;
  sweep.mode = SweepMode::kGlobalRand;
  sweep.labels = {0.5, 1.5};
  TrainConfig config = small_config(300, 64, 2e-3, 1e-3, 19);
  config.eval_samples = 4000;

  const auto points = run_sweep(market, spec, objective, sweep, config);
  REQUIRE(points.size() == 2);
  for (const auto& p : points) CHECK_FALSE(p.failed);
}

TEST_CASE("train config validation") {
  TrainConfig config;
  config.eval_samples = 10;  // below batch_size
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  config = TrainConfig{};
  config.lr_final = 0.0;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  CHECK_NOTHROW(TrainConfig{}.validate());
}

TEST_CASE("warm-start chain trains labels sequentially and stays sorted") {
  const MarketModel market = tiny_market();
  StrategySpec spec{StrategyKind::kUnconstrainedAmounts};
  ObjectiveSpec objective;
  SweepSpec sweep;
  sweep.labels = {0.5, 2.0, 1.0};
  TrainConfig config = small_config(150, 64, 2e-3, 1e-3, 29);
  config.eval_samples = 4000;
  config.warm_start_chain = true;
  const auto points = run_sweep(market, spec, objective, sweep, config);
  REQUIRE(points.size() == 3);
  for (const auto& p : points) CHECK_FALSE(p.failed);
  for (std::size_t i = 1; i < points.size(); ++i)
    CHECK(points[i].risk >= points[i - 1].risk);
}

}  // TEST_SUITE
