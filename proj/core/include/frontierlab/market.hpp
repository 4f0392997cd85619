#pragma once

#include <cstdint>
#include <string_view>
#include <variant>
#include <vector>

#include "frontierlab/array.hpp"

namespace frontierlab {

struct TimeGrid {
  double horizon = 1.0;   // years
  std::size_t n_steps = 1;
  double dt() const { return horizon / static_cast<double>(n_steps); }
};

// Lower-triangular factor L with L L^T = m. Throws if a pivot drops to 1e-12
// or below (matrix not positive definite).
NumArray cholesky_decompose(const NumArray& m);

// Same, with correlation-matrix validation (symmetry, unit diagonal).
NumArray cholesky_factor(const NumArray& rho);

// Solves m x = b for symmetric positive definite m.
NumArray spd_solve(const NumArray& m, const NumArray& b);

// Risk-free rate is zero throughout: drifts are surpluses over the bond.
struct BlackScholesModel {
  NumArray mu;     // annualized drift per asset
  NumArray sigma;  // annualized volatility per asset (diagonal)
  NumArray rho;    // d x d correlation
  NumArray chol;   // lower factor of rho

  std::size_t dim() const { return mu.rows(); }
  static BlackScholesModel make(NumArray mu, NumArray sigma, NumArray rho);
};

struct HestonModel {
  NumArray mu;
  NumArray kappa;   // mean-reversion speed, 1/years
  NumArray vbar;    // long-run variance
  NumArray sigbar;  // vol-of-variance
  NumArray v0;      // initial variance
  NumArray rho2d;   // 2d x 2d correlation of (asset drivers, variance drivers)
  NumArray chol2d;

  std::size_t dim() const { return mu.rows(); }
  static HestonModel make(NumArray mu, NumArray kappa, NumArray vbar,
                          NumArray sigbar, NumArray v0, NumArray rho2d);
};

// Simulated per-step yields (and, for Heston, the variance at each decision
// date). Path p always consumes the stream derived from (seed, first + p),
// so a path set is identical no matter how it is chunked across calls.
struct PathSet {
  std::size_t n_paths = 0;
  std::size_t n_steps = 0;
  std::size_t dim = 0;
  std::vector<double> yields;     // [path][step][asset]
  std::vector<double> variances;  // same layout; empty for Black-Scholes

  double yield(std::size_t p, std::size_t i, std::size_t j) const {
    return yields[(p * n_steps + i) * dim + j];
  }
  double variance(std::size_t p, std::size_t i, std::size_t j) const {
    return variances[(p * n_steps + i) * dim + j];
  }
  bool has_variances() const { return !variances.empty(); }

  // count x dim matrix of step-i yields for paths [first, first + count).
  NumArray yield_matrix(std::size_t step, std::size_t first,
                        std::size_t count) const;
  NumArray variance_matrix(std::size_t step, std::size_t first,
                           std::size_t count) const;
};

PathSet simulate_bs_yields(const BlackScholesModel& model, const TimeGrid& grid,
                           std::size_t n_paths, std::uint64_t seed,
                           std::size_t first_path = 0);

PathSet simulate_heston_paths(const HestonModel& model, const TimeGrid& grid,
                              std::size_t n_paths, std::uint64_t seed,
                              std::size_t first_path = 0);

// Per-asset indicator of 2 kappa vbar >= sigbar^2, the regime in which the
// variance process stays away from zero. Informational only; the simulation
// floor handles violations.
std::vector<bool> feller_check(const HestonModel& model);

// Random correlation: normalized Gram matrix of a d x d Gaussian draw,
// shrunk toward the identity by `shrink` in [0, 1].
NumArray random_correlation(std::size_t d, std::uint64_t seed, double shrink);

struct MarketModel {
  std::variant<BlackScholesModel, HestonModel> model;
  TimeGrid grid;
  double x0 = 1.0;

  bool is_heston() const {
    return std::holds_alternative<HestonModel>(model);
  }
  std::size_t dim() const;
  const BlackScholesModel& bs() const {
    return std::get<BlackScholesModel>(model);
  }
  const HestonModel& heston() const { return std::get<HestonModel>(model); }
};

// Named parameter sets: bs4-continuous, bs20-continuous, bs4-discrete,
// bs20-discrete, heston4, heston10.
MarketModel preset(std::string_view name);

PathSet simulate(const MarketModel& market, std::size_t n_paths,
                 std::uint64_t seed, std::size_t first_path = 0);

}  // namespace frontierlab
