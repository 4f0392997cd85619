#include <doctest.h>

#include <cmath>
#include <numeric>

#include "frontierlab/objectives.hpp"
#include "frontierlab/rng.hpp"

using namespace frontierlab;

namespace {

NodeId leaf_batch(Tape& tape, std::initializer_list<double> values) {
  return tape.leaf(NumArray::vector(values));
}

}  // namespace

TEST_SUITE("objectives") {

TEST_CASE("mean-variance direct") {
  Tape tape;
  SUBCASE("constant batch has zero variance") {
    const NodeId loss = mv_direct(tape, leaf_batch(tape, {3.0, 3.0, 3.0}), 5.0);
    CHECK(tape.value(loss).value() == doctest::Approx(-3.0));
  }
  SUBCASE("batch {1,3} with beta 1") {
    const NodeId loss = mv_direct(tape, leaf_batch(tape, {1.0, 3.0}), 1.0);
    CHECK(tape.value(loss).value() == doctest::Approx(-1.0));  // -2 + 1*1
  }
  SUBCASE("beta 0 is pure return maximization") {
    const NodeId loss = mv_direct(tape, leaf_batch(tape, {1.0, 3.0}), 0.0);
    CHECK(tape.value(loss).value() == doctest::Approx(-2.0));
  }
  SUBCASE("two-pass reference agrees to 1e-12") {
    rng::Stream stream(4);
    std::vector<double> xs(300);
    for (double& x : xs) x = stream.uniform(0.5, 4.0);
    Tape t2;
    const NodeId loss = mv_direct(t2, t2.leaf(NumArray::vector(xs)), 2.5);
    double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= static_cast<double>(xs.size());
    CHECK(std::fabs(t2.value(loss).value() - (-mean + 2.5 * var)) <= 1e-12);
  }
}

TEST_CASE("auxiliary quadratic criterion") {
  Tape tape;
  SUBCASE("exact target") {
    CHECK(tape.value(mv_aux(tape, leaf_batch(tape, {2.0, 2.0}), 2.0)).value() ==
          0.0);
  }
  SUBCASE("batch {1,3} gamma 2") {
    CHECK(tape.value(mv_aux(tape, leaf_batch(tape, {1.0, 3.0}), 2.0)).value() ==
          doctest::Approx(1.0));
  }
  SUBCASE("as a function of gamma it is a quadratic minimized at the mean") {
    const auto value = [&](double gamma) {
      Tape t;
      return t.value(mv_aux(t, leaf_batch(t, {1.0, 2.0, 6.0}), gamma)).value();
    };
    const double mean = 3.0;
    const double at_mean = value(mean);
    CHECK(value(mean - 0.7) > at_mean);
    CHECK(value(mean + 0.7) > at_mean);
    // Three-point symmetry of a parabola.
    CHECK(value(mean - 0.7) == doctest::Approx(value(mean + 0.7)));
  }
}

TEST_CASE("gamma from beta") {
  CHECK(gamma_from_beta(2.0, 1.077) == doctest::Approx(1.327));
  CHECK(gamma_from_beta(0.2, 1.779) == doctest::Approx(4.279));
  CHECK(gamma_from_beta(1e9, 1.5) == doctest::Approx(1.5).epsilon(1e-6));
  CHECK_THROWS_AS(gamma_from_beta(0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(gamma_from_beta(-1.0, 1.0), std::invalid_argument);
}

TEST_CASE("empirical cvar") {
  Tape tape;
  SUBCASE("tail count rule") {
    CHECK(cvar_tail_count(0.9, 10) == 1);
    CHECK(cvar_tail_count(0.95, 100) == 5);
    CHECK(cvar_tail_count(0.95, 103) == 6);  // ceil(5.15)
    CHECK(cvar_tail_count(0.999, 10) == 1);  // floor at one sample
  }
  SUBCASE("wealth pinned at x0 gives zero") {
    const NodeId cv = cvar_empirical(tape, leaf_batch(tape, {1.0, 1.0, 1.0}),
                                     0.9, 1.0);
    CHECK(tape.value(cv).value() == 0.0);
  }
  SUBCASE("losses 1..10 at alpha 0.9 pick the single worst") {
    // X = x0 - loss with losses 1..10.
    std::vector<double> xs;
    for (int i = 1; i <= 10; ++i) xs.push_back(5.0 - i);
    Tape t;
    const NodeId cv = cvar_empirical(t, t.leaf(NumArray::vector(xs)), 0.9, 5.0);
    CHECK(t.value(cv).value() == doctest::Approx(10.0));
  }
  SUBCASE("losses 1..100 at alpha 0.95 average the top five") {
    std::vector<double> xs;
    for (int i = 1; i <= 100; ++i) xs.push_back(-static_cast<double>(i));
    Tape t;
    const NodeId cv = cvar_empirical(t, t.leaf(NumArray::vector(xs)), 0.95, 0.0);
    CHECK(t.value(cv).value() == doctest::Approx(98.0));  // mean{96..100}
  }
  SUBCASE("sort-based oracle equivalence on random batches") {
    rng::Stream stream(8);
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t n = 20 + stream.below(200);
      std::vector<double> xs(n);
      for (double& x : xs) x = stream.uniform(-2.0, 2.0);
      const double alpha = stream.below(2) == 0 ? 0.9 : 0.95;
      Tape t;
      const double got =
          t.value(cvar_empirical(t, t.leaf(NumArray::vector(xs)), alpha, 1.0))
              .value();
      std::vector<double> losses(n);
      for (std::size_t i = 0; i < n; ++i) losses[i] = 1.0 - xs[i];
      std::sort(losses.begin(), losses.end(), std::greater<double>());
      const std::size_t k = cvar_tail_count(alpha, n);
      double expect = 0.0;
      for (std::size_t i = 0; i < k; ++i) expect += losses[i];
      expect /= static_cast<double>(k);
      REQUIRE(got == doctest::Approx(expect).epsilon(1e-15));
    }
  }
  SUBCASE("translation covariance is exact") {
    rng::Stream stream(9);
    std::vector<double> xs(137);
    for (double& x : xs) x = stream.uniform(-1.0, 3.0);
    std::vector<double> shifted(xs);
    for (double& x : shifted) x += 0.625;  // exact in binary
    Tape t;
    const double base =
        t.value(cvar_empirical(t, t.leaf(NumArray::vector(xs)), 0.9, 1.0))
            .value();
    const double moved =
        t.value(cvar_empirical(t, t.leaf(NumArray::vector(shifted)), 0.9, 1.0))
            .value();
    CHECK(moved == doctest::Approx(base - 0.625).epsilon(1e-15));
  }
  SUBCASE("monotone in alpha") {
    rng::Stream stream(10);
    std::vector<double> xs(500);
    for (double& x : xs) x = stream.uniform(-1.0, 3.0);
    double prev = -1e300;
    for (double alpha : {0.5, 0.8, 0.9, 0.95, 0.99}) {
      Tape t;
      const double cv =
          t.value(cvar_empirical(t, t.leaf(NumArray::vector(xs)), alpha, 1.0))
              .value();
      REQUIRE(cv >= prev);
      prev = cv;
    }
  }
}

TEST_CASE("mean-cvar composite") {
  Tape tape;
  SUBCASE("beta 0 is pure return") {
    const NodeId loss =
        mean_cvar(tape, leaf_batch(tape, {1.0, 2.0}), 0.0, 0.9, 1.0);
    CHECK(tape.value(loss).value() == doctest::Approx(-1.5));
  }
  SUBCASE("constant wealth c > x0") {
    const NodeId loss =
        mean_cvar(tape, leaf_batch(tape, {2.0, 2.0}), 3.0, 0.9, 1.0);
    CHECK(tape.value(loss).value() == doctest::Approx(-2.0 + 3.0 * (1.0 - 2.0)));
  }
  SUBCASE("hand sum on a 4-sample batch") {
    // x0 = 1, losses {0.6, 0.1, -0.2, -1.0}; alpha=0.5 -> k=2 -> (0.6+0.1)/2.
    const NodeId loss = mean_cvar(
        tape, leaf_batch(tape, {0.4, 0.9, 1.2, 2.0}), 2.0, 0.5, 1.0);
    const double mean = (0.4 + 0.9 + 1.2 + 2.0) / 4.0;
    CHECK(tape.value(loss).value() ==
          doctest::Approx(-mean + 2.0 * 0.35).epsilon(1e-14));
  }
}

TEST_CASE("penalties") {
  const double eps = 1e-4;
  SUBCASE("constant weights have zero local penalty") {
    Tape tape;
    std::vector<NodeId> traj{tape.leaf(NumArray(3, 2, 0.5)),
                             tape.leaf(NumArray(3, 2, 0.5))};
    const NodeId p = penalty_local(tape, traj, NumArray(2, 1, 0.05), eps);
    CHECK(tape.value(p).value() == 0.0);
  }
  SUBCASE("single asset, move 0.08 vs eta 0.05 gives 300") {
    Tape tape;
    std::vector<NodeId> traj{tape.leaf(NumArray(1, 1, 0.10)),
                             tape.leaf(NumArray(1, 1, 0.18))};
    const NodeId p = penalty_local(tape, traj, NumArray(1, 1, 0.05), eps);
    CHECK(tape.value(p).value() == doctest::Approx(300.0).epsilon(1e-10));
  }
  SUBCASE("move exactly eta is free") {
    Tape tape;
    std::vector<NodeId> traj{tape.leaf(NumArray(1, 1, 0.10)),
                             tape.leaf(NumArray(1, 1, 0.15))};
    const NodeId p = penalty_local(tape, traj, NumArray(1, 1, 0.05), eps);
    CHECK(tape.value(p).value() == 0.0);
  }
  SUBCASE("box: inside is free, 0.1 above hi costs 1000") {
    Tape tape;
    Bounds bounds{NumArray(1, 1, 0.1), NumArray(1, 1, 0.6)};
    std::vector<NodeId> inside{tape.leaf(NumArray(1, 1, 0.3))};
    CHECK(tape.value(penalty_box(tape, inside, bounds, eps)).value() == 0.0);
    std::vector<NodeId> at_lo{tape.leaf(NumArray(1, 1, 0.1))};
    CHECK(tape.value(penalty_box(tape, at_lo, bounds, eps)).value() == 0.0);
    std::vector<NodeId> above{tape.leaf(NumArray(1, 1, 0.7))};
    CHECK(tape.value(penalty_box(tape, above, bounds, eps)).value() ==
          doctest::Approx(1000.0).epsilon(1e-10));
  }
  SUBCASE("budget: simplex rows are free, gap of 0.1 costs 1000 per date") {
    Tape tape;
    std::vector<NodeId> simplex{tape.leaf(NumArray(2, 2, 0.5))};
    CHECK(tape.value(penalty_budget(tape, simplex, eps)).value() ==
          doctest::Approx(0.0).epsilon(1e-12));
    std::vector<NodeId> off{tape.leaf(NumArray(1, 2, 0.55))};
    CHECK(tape.value(penalty_budget(tape, off, eps)).value() ==
          doctest::Approx(1000.0).epsilon(1e-10));
    // Zero weights: |0 - 1| = 1 per date, so N dates cost N/eps.
    std::vector<NodeId> zeros{tape.leaf(NumArray(1, 2, 0.0)),
                              tape.leaf(NumArray(1, 2, 0.0)),
                              tape.leaf(NumArray(1, 2, 0.0))};
    CHECK(tape.value(penalty_budget(tape, zeros, eps)).value() ==
          doctest::Approx(3.0 / eps).epsilon(1e-10));
  }
}

TEST_CASE("global losses") {
  ObjectiveSpec objective;  // mv_direct, no penalty
  const StrategySpec strategy{StrategyKind::kSimplex};

  SUBCASE("K=1 reduces to the point loss") {
    Tape tape;
    Rollout r;
    r.terminal_wealth = leaf_batch(tape, {1.0, 2.0, 3.0});
    const std::vector<Rollout> rollouts{r};
    const std::vector<double> labels{0.7};
    const NodeId g =
        global_det_loss(tape, rollouts, labels, objective, strategy, 1.0);
    const NodeId p = mv_direct(tape, r.terminal_wealth, 0.7);
    CHECK(tape.value(g).value() == tape.value(p).value());
  }
  SUBCASE("identical batches on a duplicated grid double the loss") {
    Tape tape;
    Rollout r;
    r.terminal_wealth = leaf_batch(tape, {1.0, 2.0});
    const std::vector<Rollout> rollouts{r, r};
    const std::vector<double> labels{1.3, 1.3};
    const NodeId g =
        global_det_loss(tape, rollouts, labels, objective, strategy, 1.0);
    const NodeId p = mv_direct(tape, r.terminal_wealth, 1.3);
    CHECK(tape.value(g).value() ==
          doctest::Approx(2.0 * tape.value(p).value()).epsilon(1e-15));
  }
  SUBCASE("randomized version averages the groups") {
    Tape tape;
    Rollout a, b;
    a.terminal_wealth = leaf_batch(tape, {1.0, 2.0});
    b.terminal_wealth = leaf_batch(tape, {3.0, 1.0});
    const std::vector<Rollout> rollouts{a, b};
    const std::vector<double> drawn{0.5, 2.0};
    const NodeId g =
        global_rand_loss(tape, rollouts, drawn, objective, strategy, 1.0);
    const double pa = tape.value(mv_direct(tape, a.terminal_wealth, 0.5)).value();
    const double pb = tape.value(mv_direct(tape, b.terminal_wealth, 2.0)).value();
    CHECK(tape.value(g).value() == doctest::Approx(0.5 * (pa + pb)));
  }
  SUBCASE("sub-batches of size 1 are rejected") {
    Tape tape;
    Rollout tiny;
    tiny.terminal_wealth = leaf_batch(tape, {1.0});
    const std::vector<Rollout> rollouts{tiny};
    const std::vector<double> drawn{0.5};
    CHECK_THROWS_AS((void)global_rand_loss(tape, rollouts, drawn, objective,
                                           strategy, 1.0),
                    std::invalid_argument);
  }
  SUBCASE("unbiasedness: many draws approach the uniform mixture") {
    // Fixed "strategy": terminal wealth distribution is a fixed list; the
    // randomized estimator in beta should average to the uniform-in-beta
    // mixture of point losses.
    rng::Stream stream(77);
    std::vector<double> base(40);
    for (double& x : base) x = stream.uniform(0.5, 2.0);
    BetaSampler sampler;
    sampler.kind = BetaSampler::Kind::kUniform;
    sampler.lower = 0.0;
    sampler.upper = 2.0;

    double mc = 0.0;
    const int n_draws = 10000;
    rng::Stream draw_stream(78);
    Tape tape;
    const NodeId batch = tape.leaf(NumArray::vector(base));
    for (int i = 0; i < n_draws; ++i) {
      const double beta = sampler.sample(draw_stream);
      mc += tape.value(mv_direct(tape, batch, beta)).value();
    }
    mc /= n_draws;

    // Uniform mixture: E_beta[-mean + beta var] = -mean + E[beta] var.
    double mean = std::accumulate(base.begin(), base.end(), 0.0) / base.size();
    double var = 0.0;
    for (double x : base) var += (x - mean) * (x - mean);
    var /= static_cast<double>(base.size());
    const double expect = -mean + 1.0 * var;
    CHECK(mc == doctest::Approx(expect).epsilon(0.02));
  }
}

TEST_CASE("model assembly selects the right penalty combination") {
  // Feasible constant trajectory: only the base criterion survives.
  StrategySpec m4spec{StrategyKind::kBoxProjected};
  m4spec.bounds = Bounds{NumArray(2, 1, 0.1), NumArray(2, 1, 0.9)};
  m4spec.move_limit = MoveLimit{NumArray(2, 1, 0.05)};
  ObjectiveSpec objective;
  objective.penalty_model = PenaltyModel::kM4;

  Tape tape;
  Rollout r;
  r.terminal_wealth = leaf_batch(tape, {1.0, 2.0});
  r.weights = {tape.leaf(NumArray(2, 2, 0.5)), tape.leaf(NumArray(2, 2, 0.5))};
  const NodeId loss =
      assemble_constrained_loss(tape, r, objective, m4spec, 1.0, 1.0);
  CHECK(tape.value(loss).value() ==
        tape.value(mv_direct(tape, r.terminal_wealth, 1.0)).value());

  // m3 with a budget breach: base + positive penalty.
  StrategySpec m3spec{StrategyKind::kIncrementalClipped};
  m3spec.bounds = Bounds{NumArray(2, 1, 0.0), NumArray(2, 1, 1.0)};
  m3spec.move_limit = MoveLimit{NumArray(2, 1, 0.05)};
  ObjectiveSpec obj3;
  obj3.penalty_model = PenaltyModel::kM3;
  Rollout r3;
  r3.terminal_wealth = leaf_batch(tape, {1.0, 2.0});
  r3.weights = {tape.leaf(NumArray(2, 2, 0.7))};  // sums to 1.4
  const NodeId loss3 =
      assemble_constrained_loss(tape, r3, obj3, m3spec, 1.0, 1.0);
  CHECK(tape.value(loss3).value() >
        tape.value(mv_direct(tape, r3.terminal_wealth, 1.0)).value());
}

TEST_CASE("objective validation") {
  StrategySpec simplex{StrategyKind::kSimplex};
  ObjectiveSpec objective;
  objective.criterion = Criterion::kCvar;
  objective.alpha = 1.5;
  CHECK_THROWS_AS(objective.validate(simplex), std::invalid_argument);
  objective.alpha = 0.95;
  CHECK_NOTHROW(objective.validate(simplex));

  ObjectiveSpec m4;
  m4.penalty_model = PenaltyModel::kM4;
  CHECK_THROWS_AS(m4.validate(simplex), std::invalid_argument);
}

TEST_CASE("beta sampler") {
  BetaSampler squared;
  squared.kind = BetaSampler::Kind::kSquaredUniform;
  squared.label_max = 3.8025;
  rng::Stream stream(5);
  for (int i = 0; i < 1000; ++i) {
    const double b = squared.sample(stream);
    REQUIRE(b >= 0.0);
    REQUIRE(b <= 3.8025);
  }
  CHECK(squared.max_value() == 3.8025);

  BetaSampler uniform;
  uniform.lower = 0.1;
  uniform.upper = 2.0;
  for (int i = 0; i < 1000; ++i) {
    const double b = uniform.sample(stream);
    REQUIRE(b >= 0.1);
    REQUIRE(b <= 2.0);
  }
}

}  // TEST_SUITE
