#include "frontierlab/market.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "frontierlab/rng.hpp"

namespace frontierlab {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

void require_positive(const NumArray& v, const char* what) {
  for (std::size_t i = 0; i < v.size(); ++i)
    require(v[i] > 0.0, std::string(what) + " must be strictly positive");
}

}  // namespace

NumArray cholesky_decompose(const NumArray& m) {
  require(m.rows() == m.cols(), "cholesky: matrix must be square");
  const std::size_t d = m.rows();
  NumArray L(d, d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double acc = m(i, j);
      for (std::size_t k = 0; k < j; ++k) acc -= L(i, k) * L(j, k);
      if (i == j) {
        if (acc <= 1e-12)
          throw std::invalid_argument(
              "cholesky: matrix not positive definite (pivot <= 1e-12)");
        L(i, i) = std::sqrt(acc);
      } else {
        L(i, j) = acc / L(j, j);
      }
    }
  }
  return L;
}

NumArray cholesky_factor(const NumArray& rho) {
  require(rho.rows() == rho.cols(), "correlation must be square");
  const std::size_t d = rho.rows();
  for (std::size_t i = 0; i < d; ++i) {
    require(std::fabs(rho(i, i) - 1.0) < 1e-12,
            "correlation must have unit diagonal");
    for (std::size_t j = 0; j < i; ++j)
      require(std::fabs(rho(i, j) - rho(j, i)) < 1e-12,
              "correlation must be symmetric");
  }
  return cholesky_decompose(rho);
}

NumArray spd_solve(const NumArray& m, const NumArray& b) {
  require(b.cols() == 1 && b.rows() == m.rows(), "spd_solve: bad rhs shape");
  const NumArray L = cholesky_decompose(m);
  const std::size_t d = m.rows();
  NumArray y(d, 1);
  for (std::size_t i = 0; i < d; ++i) {
    double acc = b[i];
    for (std::size_t k = 0; k < i; ++k) acc -= L(i, k) * y[k];
    y[i] = acc / L(i, i);
  }
  NumArray x(d, 1);
  for (std::size_t i = d; i-- > 0;) {
    double acc = y[i];
    for (std::size_t k = i + 1; k < d; ++k) acc -= L(k, i) * x[k];
    x[i] = acc / L(i, i);
  }
  return x;
}

BlackScholesModel BlackScholesModel::make(NumArray mu, NumArray sigma,
                                          NumArray rho) {
  const std::size_t d = mu.rows();
  require(mu.cols() == 1 && sigma.cols() == 1 && sigma.rows() == d,
          "model: mu and sigma must be vectors of equal length");
  require(rho.rows() == d && rho.cols() == d,
          "model: correlation dimension mismatch");
  require_positive(sigma, "sigma");
  BlackScholesModel m;
  m.chol = cholesky_factor(rho);
  m.mu = std::move(mu);
  m.sigma = std::move(sigma);
  m.rho = std::move(rho);
  return m;
}

HestonModel HestonModel::make(NumArray mu, NumArray kappa, NumArray vbar,
                              NumArray sigbar, NumArray v0, NumArray rho2d) {
  const std::size_t d = mu.rows();
  require(kappa.rows() == d && vbar.rows() == d && sigbar.rows() == d &&
              v0.rows() == d,
          "heston: parameter vectors must share the asset dimension");
  require(rho2d.rows() == 2 * d && rho2d.cols() == 2 * d,
          "heston: correlation must be 2d x 2d");
  require_positive(kappa, "kappa");
  require_positive(vbar, "vbar");
  require_positive(sigbar, "sigbar");
  require_positive(v0, "v0");
  HestonModel m;
  m.chol2d = cholesky_factor(rho2d);
  m.mu = std::move(mu);
  m.kappa = std::move(kappa);
  m.vbar = std::move(vbar);
  m.sigbar = std::move(sigbar);
  m.v0 = std::move(v0);
  m.rho2d = std::move(rho2d);
  return m;
}

NumArray PathSet::yield_matrix(std::size_t step, std::size_t first,
                               std::size_t count) const {
  NumArray out(count, dim);
  for (std::size_t p = 0; p < count; ++p)
    for (std::size_t j = 0; j < dim; ++j)
      out(p, j) = yield(first + p, step, j);
  return out;
}

NumArray PathSet::variance_matrix(std::size_t step, std::size_t first,
                                  std::size_t count) const {
  NumArray out(count, dim);
  for (std::size_t p = 0; p < count; ++p)
    for (std::size_t j = 0; j < dim; ++j)
      out(p, j) = variance(first + p, step, j);
  return out;
}

PathSet simulate_bs_yields(const BlackScholesModel& model, const TimeGrid& grid,
                           std::size_t n_paths, std::uint64_t seed,
                           std::size_t first_path) {
  const std::size_t d = model.dim();
  const std::size_t N = grid.n_steps;
  const double dt = grid.dt();
  const double sqdt = std::sqrt(dt);

  PathSet out;
  out.n_paths = n_paths;
  out.n_steps = N;
  out.dim = d;
  out.yields.resize(n_paths * N * d);

  std::vector<double> z(d), e(d), drift(d), vol(d);
  for (std::size_t j = 0; j < d; ++j) {
    drift[j] = (model.mu[j] - 0.5 * model.sigma[j] * model.sigma[j]) * dt;
    vol[j] = model.sigma[j] * sqdt;
  }

  for (std::size_t p = 0; p < n_paths; ++p) {
    rng::Stream stream(rng::derive_stream(seed, rng::StreamTag::kPath,
                                          first_path + p));
    double* path = out.yields.data() + p * N * d;
    for (std::size_t i = 0; i < N; ++i) {
      for (std::size_t j = 0; j < d; ++j) z[j] = stream.normal();
      for (std::size_t j = 0; j < d; ++j) {
        double acc = 0.0;
        for (std::size_t k = 0; k <= j; ++k) acc += model.chol(j, k) * z[k];
        e[j] = acc;
      }
      for (std::size_t j = 0; j < d; ++j)
        path[i * d + j] = std::exp(drift[j] + vol[j] * e[j]) - 1.0;
    }
  }
  return out;
}

PathSet simulate_heston_paths(const HestonModel& model, const TimeGrid& grid,
                              std::size_t n_paths, std::uint64_t seed,
                              std::size_t first_path) {
  constexpr double kVarianceFloor = 1e-12;
  const std::size_t d = model.dim();
  const std::size_t N = grid.n_steps;
  const double dt = grid.dt();
  const double sqdt = std::sqrt(dt);

  PathSet out;
  out.n_paths = n_paths;
  out.n_steps = N;
  out.dim = d;
  out.yields.resize(n_paths * N * d);
  out.variances.resize(n_paths * N * d);

  std::vector<double> z(2 * d), e(2 * d), v(d);

  for (std::size_t p = 0; p < n_paths; ++p) {
    rng::Stream stream(rng::derive_stream(seed, rng::StreamTag::kPath,
                                          first_path + p));
    double* ypath = out.yields.data() + p * N * d;
    double* vpath = out.variances.data() + p * N * d;
    for (std::size_t j = 0; j < d; ++j) v[j] = model.v0[j];

    for (std::size_t i = 0; i < N; ++i) {
      for (std::size_t j = 0; j < d; ++j) vpath[i * d + j] = v[j];
      for (std::size_t j = 0; j < 2 * d; ++j) z[j] = stream.normal();
      for (std::size_t j = 0; j < 2 * d; ++j) {
        double acc = 0.0;
        for (std::size_t k = 0; k <= j; ++k) acc += model.chol2d(j, k) * z[k];
        e[j] = acc;
      }
      for (std::size_t j = 0; j < d; ++j) {
        const double vj = v[j];
        // Log-Euler asset step with the variance frozen at the step start.
        ypath[i * d + j] =
            std::exp((model.mu[j] - 0.5 * vj) * dt + std::sqrt(vj) * sqdt * e[j]) -
            1.0;
        // Implicit Milstein variance step, floored to keep the state positive.
        const double dw2 = sqdt * e[d + j];
        const double sb = model.sigbar[j];
        double next =
            (vj + model.kappa[j] * model.vbar[j] * dt + sb * std::sqrt(vj) * dw2 +
             0.25 * sb * sb * (dw2 * dw2 - dt)) /
            (1.0 + model.kappa[j] * dt);
        v[j] = std::max(next, kVarianceFloor);
      }
    }
  }
  return out;
}

std::vector<bool> feller_check(const HestonModel& model) {
  std::vector<bool> ok(model.dim());
  for (std::size_t j = 0; j < model.dim(); ++j) {
    const double lhs = 2.0 * model.kappa[j] * model.vbar[j];
    const double rhs = model.sigbar[j] * model.sigbar[j];
    // Relative slack so parameter sets on the exact boundary report satisfied.
    ok[j] = lhs >= rhs * (1.0 - 1e-12);
  }
  return ok;
}

NumArray random_correlation(std::size_t d, std::uint64_t seed, double shrink) {
  require(d >= 2, "random_correlation: need d >= 2");
  require(shrink >= 0.0 && shrink <= 1.0,
          "random_correlation: shrink must be in [0, 1]");
  rng::Stream stream(rng::derive_stream(seed, rng::StreamTag::kCorrelation));
  NumArray a(d, d);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = stream.normal();

  NumArray g(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < d; ++k) acc += a(i, k) * a(j, k);
      g(i, j) = acc;
      g(j, i) = acc;
    }

  NumArray rho(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      rho(i, j) = g(i, j) / std::sqrt(g(i, i) * g(j, j));
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      rho(i, j) = (i == j) ? 1.0 : (1.0 - shrink) * rho(i, j);
  return rho;
}

std::size_t MarketModel::dim() const {
  return is_heston() ? heston().dim() : bs().dim();
}

namespace {

NumArray linspace(double first, double last, std::size_t n) {
  NumArray out(n, 1);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = first + (last - first) * static_cast<double>(i) /
                         static_cast<double>(n - 1);
  return out;
}

NumArray rho4_continuous() {
  return NumArray(4, 4, {1.0, 0.26, -0.43, 0.233,     //
                         0.26, 1.0, 0.003, 0.06,      //
                         -0.43, 0.003, 1.0, -0.33,    //
                         0.233, 0.06, -0.33, 1.0});
}

NumArray rho4_discrete() {
  return NumArray(4, 4, {1.0, 0.805, -0.894, 0.59,     //
                         0.805, 1.0, -0.571, 0.473,    //
                         -0.894, -0.571, 1.0, -0.772,  //
                         0.59, 0.473, -0.772, 1.0});
}

NumArray rho8_heston() {
  return NumArray(
      8, 8,
      {1.,     -0.383, 0.378,  -0.324, -0.751, -0.110, 0.272,  0.465,   //
       -0.383, 1.,     -0.938, -0.411, -0.053, 0.276,  -0.226, -0.349,  //
       0.378,  -0.938, 1.,     0.145,  -0.051, -0.398, 0.249,  0.401,   //
       -0.324, -0.411, 0.145,  1.,     0.655,  0.329,  -0.264, -0.048,  //
       -0.751, -0.053, -0.051, 0.655,  1.,     -0.172, -0.464, -0.105,  //
       -0.110, 0.276,  -0.398, 0.329,  -0.172, 1.,     0.044,  -0.348,  //
       0.272,  -0.226, 0.249,  -0.264, -0.464, 0.044,  1.,     -0.580,  //
       0.465,  -0.349, 0.401,  -0.048, -0.105, -0.348, -0.580, 1.});
}

NumArray mu20() {
  NumArray out(20, 1);
  for (std::size_t i = 0; i < 20; ++i)
    out[i] = 0.01 + static_cast<double>(i) / 400.0;
  return out;
}

NumArray sigma20() {
  NumArray out(20, 1);
  for (std::size_t i = 0; i < 20; ++i)
    out[i] = 0.05 + static_cast<double>(i) / 100.0;
  return out;
}

// Fixed generator seeds for the correlation matrices the parameter tables do
// not spell out. Pinned so every build reproduces the same market.
constexpr std::uint64_t kSeedBs20Continuous = 101;
constexpr std::uint64_t kSeedBs20Discrete = 102;
constexpr std::uint64_t kSeedHeston10 = 103;

}  // namespace

MarketModel preset(std::string_view name) {
  const NumArray mu4 =
      NumArray::vector({0.01, 0.0225, 0.035, 0.0475});
  const NumArray sigma4 = NumArray::vector({0.05, 0.1, 0.15, 0.2});

  MarketModel market;
  if (name == "bs4-continuous") {
    market.model = BlackScholesModel::make(mu4, sigma4, rho4_continuous());
    market.grid = {1.0, 104};
  } else if (name == "bs20-continuous") {
    // Moderate shrinkage keeps the random correlations away from +-1.
    market.model = BlackScholesModel::make(
        mu20(), sigma20(), random_correlation(20, kSeedBs20Continuous, 0.5));
    market.grid = {1.0, 104};
  } else if (name == "bs4-discrete") {
    market.model = BlackScholesModel::make(mu4, sigma4, rho4_discrete());
    market.grid = {10.0, 120};
  } else if (name == "bs20-discrete") {
    market.model = BlackScholesModel::make(
        mu20(), sigma20(), random_correlation(20, kSeedBs20Discrete, 0.1));
    market.grid = {10.0, 120};
  } else if (name == "heston4") {
    const NumArray vbar = NumArray::vector({0.0025, 0.01, 0.0225, 0.04});
    market.model = HestonModel::make(mu4, NumArray(4, 1, 0.5), vbar, sigma4,
                                     vbar, rho8_heston());
    market.grid = {10.0, 120};
  } else if (name == "heston10") {
    // Ten-asset variant interpolating the four-asset parameter pattern, with
    // lightly shrunk (high) random correlations.
    const NumArray vbar10 = linspace(0.0025, 0.04, 10);
    market.model = HestonModel::make(
        linspace(0.01, 0.0475, 10), NumArray(10, 1, 0.5), vbar10,
        linspace(0.05, 0.2, 10), vbar10,
        random_correlation(20, kSeedHeston10, 0.1));
    market.grid = {10.0, 120};
  } else {
    throw std::invalid_argument("unknown market preset: " + std::string(name));
  }
  return market;
}

PathSet simulate(const MarketModel& market, std::size_t n_paths,
                 std::uint64_t seed, std::size_t first_path) {
  if (market.is_heston())
    return simulate_heston_paths(market.heston(), market.grid, n_paths, seed,
                                 first_path);
  return simulate_bs_yields(market.bs(), market.grid, n_paths, seed,
                            first_path);
}

}  // namespace frontierlab
