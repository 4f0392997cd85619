#pragma once

#include <cstdint>

#include "frontierlab/array.hpp"
#include "frontierlab/market.hpp"

namespace frontierlab {

// Continuous-time Mean-Variance solution under Black-Scholes with zero
// risk-free rate.
struct AnalyticSolution {
  NumArray kelly;        // (sigma rho sigma)^{-1} mu
  double r_scalar = 0.0; // mu . kelly, per year
};

AnalyticSolution solve_analytic(const BlackScholesModel& model);

// Optimal monetary allocation: alpha(X) = -kelly (X - x0 - e^{RT}/(2 beta)).
// Affine in wealth; vanishes at the target wealth level.
NumArray optimal_control(double t, double wealth, double beta,
                         const AnalyticSolution& solution, double horizon,
                         double x0);

struct FrontierMoments {
  double mean = 0.0;
  double variance = 0.0;
};

// mean = x0 + (e^{RT} - 1)/(2 beta), variance = (e^{RT} - 1)/(4 beta^2).
FrontierMoments closed_form_frontier(double beta,
                                     const AnalyticSolution& solution,
                                     double horizon, double x0);

struct McEstimate {
  double mean = 0.0;
  double variance = 0.0;  // biased (divisor n)
  std::size_t n_samples = 0;
  double mean_std_error = 0.0;
};

// Monte Carlo estimate of the frontier point obtained by applying the
// continuous optimal control at each rebalancing date of the grid.
McEstimate analytic_frontier_point(double beta, const BlackScholesModel& model,
                                   const TimeGrid& grid, std::size_t n_sims,
                                   std::uint64_t seed, double x0 = 1.0,
                                   std::size_t threads = 1);

}  // namespace frontierlab
