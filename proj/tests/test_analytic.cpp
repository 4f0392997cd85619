#include <doctest.h>

#include <cmath>

#include "frontierlab/analytic.hpp"
#include "frontierlab/market.hpp"

using namespace frontierlab;

TEST_SUITE("analytic") {

TEST_CASE("single asset closed form: kelly = mu/sigma^2, R = mu^2/sigma^2") {
  const auto model = BlackScholesModel::make(
      NumArray::vector({0.1}), NumArray::vector({0.2}), NumArray(1, 1, {1.0}));
  const AnalyticSolution s = solve_analytic(model);
  CHECK(s.kelly[0] == doctest::Approx(2.5));
  CHECK(s.r_scalar == doctest::Approx(0.25));
}

TEST_CASE("diagonal correlation adds the per-asset ratios") {
  NumArray eye(2, 2);
  eye(0, 0) = eye(1, 1) = 1.0;
  const auto model = BlackScholesModel::make(
      NumArray::vector({0.05, 0.08}), NumArray::vector({0.1, 0.25}), eye);
  const AnalyticSolution s = solve_analytic(model);
  CHECK(s.r_scalar ==
        doctest::Approx(0.05 * 0.05 / 0.01 + 0.08 * 0.08 / 0.0625));
}

TEST_CASE("four-asset growth factor implied by the published frontier") {
  const auto market = preset("bs4-continuous");
  const AnalyticSolution s = solve_analytic(market.bs());
  // Cross-check against the frontier relations: mean - x0 = (e^R - 1)/(2b),
  // var = (e^R - 1)/(4 b^2); the published points imply e^R near 1.312.
  CHECK(std::fabs(std::exp(s.r_scalar) - 1.312) < 0.02);
}

TEST_CASE("optimal control") {
  const auto market = preset("bs4-continuous");
  const AnalyticSolution s = solve_analytic(market.bs());
  const double target = 1.0 + std::exp(s.r_scalar) / (2.0 * 2.0);
  SUBCASE("vanishes at the target wealth") {
    const NumArray a = optimal_control(0.3, target, 2.0, s, 1.0, 1.0);
    for (std::size_t j = 0; j < 4; ++j)
      CHECK(a[j] == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("at x0 it is kelly scaled by e^{RT}/(2 beta)") {
    const NumArray a = optimal_control(0.0, 1.0, 2.0, s, 1.0, 1.0);
    const double scale = std::exp(s.r_scalar) / 4.0;
    for (std::size_t j = 0; j < 4; ++j)
      CHECK(a[j] == doctest::Approx(s.kelly[j] * scale));
  }
  SUBCASE("doubling beta halves the control at x0") {
    const NumArray a = optimal_control(0.0, 1.0, 2.0, s, 1.0, 1.0);
    const NumArray b = optimal_control(0.0, 1.0, 4.0, s, 1.0, 1.0);
    for (std::size_t j = 0; j < 4; ++j)
      CHECK(b[j] == doctest::Approx(0.5 * a[j]));
  }
  SUBCASE("affine in wealth with slope -kelly") {
    const NumArray a = optimal_control(0.5, 1.3, 2.0, s, 1.0, 1.0);
    const NumArray b = optimal_control(0.5, 1.3 + 1.0, 2.0, s, 1.0, 1.0);
    for (std::size_t j = 0; j < 4; ++j)
      CHECK(b[j] - a[j] == doctest::Approx(-s.kelly[j]).epsilon(1e-12));
  }
  SUBCASE("beta must be positive") {
    CHECK_THROWS_AS((void)optimal_control(0.0, 1.0, 0.0, s, 1.0, 1.0),
                    std::invalid_argument);
  }
}

TEST_CASE("closed-form frontier identities") {
  const auto market = preset("bs4-continuous");
  const AnalyticSolution s = solve_analytic(market.bs());
  const double growth = std::exp(s.r_scalar) - 1.0;
  SUBCASE("variance equals (mean - x0)^2 / (e^RT - 1) for every beta") {
    for (double beta : {0.05, 0.2, 1.0, 2.7}) {
      const FrontierMoments m = closed_form_frontier(beta, s, 1.0, 1.0);
      CHECK(m.variance ==
            doctest::Approx((m.mean - 1.0) * (m.mean - 1.0) / growth));
    }
  }
  SUBCASE("beta to infinity collapses to (x0, 0)") {
    const FrontierMoments m = closed_form_frontier(1e12, s, 1.0, 1.0);
    CHECK(m.mean == doctest::Approx(1.0));
    CHECK(m.variance == doctest::Approx(0.0));
  }
  SUBCASE("frontier is Pareto: both mean and variance decrease in beta") {
    double prev_mean = 1e300, prev_var = 1e300;
    for (double beta : {0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 2.7}) {
      const FrontierMoments m = closed_form_frontier(beta, s, 1.0, 1.0);
      CHECK(m.mean < prev_mean);
      CHECK(m.variance < prev_var);
      prev_mean = m.mean;
      prev_var = m.variance;
    }
  }
  SUBCASE("variance is convex in mean along the frontier") {
    // v(m) = (m - x0)^2 / g is a parabola; check the chord inequality.
    const FrontierMoments a = closed_form_frontier(2.0, s, 1.0, 1.0);
    const FrontierMoments b = closed_form_frontier(0.1, s, 1.0, 1.0);
    const double mid_mean = 0.5 * (a.mean + b.mean);
    const double mid_var = (mid_mean - 1.0) * (mid_mean - 1.0) / growth;
    CHECK(mid_var <= 0.5 * (a.variance + b.variance) + 1e-15);
  }
}

TEST_CASE("discretized control reproduces the closed form within MC error") {
  const auto market = preset("bs4-continuous");
  const AnalyticSolution s = solve_analytic(market.bs());
  for (double beta : {2.0, 0.5, 0.2}) {
    const McEstimate est = analytic_frontier_point(
        beta, market.bs(), market.grid, 40000, 4242, 1.0, 2);
    const FrontierMoments cf = closed_form_frontier(beta, s, 1.0, 1.0);
    CHECK(std::fabs(est.mean - cf.mean) <
          4.0 * est.mean_std_error + 0.03 * cf.variance);
    CHECK(std::fabs(est.variance - cf.variance) <
          4.0 * cf.variance * std::sqrt(2.0 / 40000.0) + 0.03 * cf.variance);
  }
}

TEST_CASE("monte carlo estimate is thread-count invariant") {
  const auto market = preset("bs4-continuous");
  const McEstimate a =
      analytic_frontier_point(1.0, market.bs(), market.grid, 20000, 5, 1.0, 1);
  const McEstimate b =
      analytic_frontier_point(1.0, market.bs(), market.grid, 20000, 5, 1.0, 4);
  CHECK(a.mean == b.mean);
  CHECK(a.variance == b.variance);
}

}  // TEST_SUITE
