#include "frontierlab/analytic.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "frontierlab/parallel.hpp"

namespace frontierlab {

AnalyticSolution solve_analytic(const BlackScholesModel& model) {
  const std::size_t d = model.dim();
  NumArray cov(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      cov(i, j) = model.sigma[i] * model.rho(i, j) * model.sigma[j];

  AnalyticSolution solution;
  solution.kelly = spd_solve(cov, model.mu);
  double r = 0.0;
  for (std::size_t j = 0; j < d; ++j) r += model.mu[j] * solution.kelly[j];
  solution.r_scalar = r;
  return solution;
}

NumArray optimal_control(double /*t*/, double wealth, double beta,
                         const AnalyticSolution& solution, double horizon,
                         double x0) {
  if (beta <= 0.0) throw std::invalid_argument("optimal_control: beta must be > 0");
  const double target_gap =
      wealth - x0 - std::exp(solution.r_scalar * horizon) / (2.0 * beta);
  NumArray amounts(solution.kelly.rows(), 1);
  for (std::size_t j = 0; j < amounts.rows(); ++j)
    amounts[j] = -solution.kelly[j] * target_gap;
  return amounts;
}

FrontierMoments closed_form_frontier(double beta,
                                     const AnalyticSolution& solution,
                                     double horizon, double x0) {
  if (beta <= 0.0)
    throw std::invalid_argument("closed_form_frontier: beta must be > 0");
  const double growth = std::exp(solution.r_scalar * horizon) - 1.0;
  FrontierMoments out;
  out.mean = x0 + growth / (2.0 * beta);
  out.variance = growth / (4.0 * beta * beta);
  return out;
}

McEstimate analytic_frontier_point(double beta, const BlackScholesModel& model,
                                   const TimeGrid& grid, std::size_t n_sims,
                                   std::uint64_t seed, double x0,
                                   std::size_t threads) {
  if (n_sims < 2)
    throw std::invalid_argument("analytic_frontier_point: need n_sims >= 2");
  const AnalyticSolution solution = solve_analytic(model);
  const double offset = std::exp(solution.r_scalar * grid.horizon) / (2.0 * beta);
  if (beta <= 0.0)
    throw std::invalid_argument("analytic_frontier_point: beta must be > 0");

  const std::size_t d = model.dim();
  constexpr std::size_t kChunk = 8192;
  const std::size_t n_chunks = (n_sims + kChunk - 1) / kChunk;
  std::vector<double> terminal(n_sims);

  parallel_for(n_chunks, threads, [&](std::size_t c) {
    const std::size_t first = c * kChunk;
    const std::size_t count = std::min(kChunk, n_sims - first);
    const PathSet paths = simulate_bs_yields(model, grid, count, seed, first);
    for (std::size_t p = 0; p < count; ++p) {
      double wealth = x0;
      for (std::size_t i = 0; i < grid.n_steps; ++i) {
        const double gap = wealth - x0 - offset;
        double gain = 0.0;
        for (std::size_t j = 0; j < d; ++j)
          gain -= solution.kelly[j] * gap * paths.yield(p, i, j);
        wealth += gain;
      }
      terminal[first + p] = wealth;
    }
  });

  McEstimate est;
  est.n_samples = n_sims;
  double mean = 0.0;
  for (double x : terminal) mean += x;
  mean /= static_cast<double>(n_sims);
  double m2 = 0.0;
  for (double x : terminal) m2 += (x - mean) * (x - mean);
  est.mean = mean;
  est.variance = m2 / static_cast<double>(n_sims);
  est.mean_std_error = std::sqrt(est.variance / static_cast<double>(n_sims));
  return est;
}

}  // namespace frontierlab
