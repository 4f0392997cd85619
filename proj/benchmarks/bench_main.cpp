#include <benchmark/benchmark.h>

#include "frontierlab/market.hpp"
#include "frontierlab/network.hpp"
#include "frontierlab/objectives.hpp"
#include "frontierlab/portfolio.hpp"
#include "frontierlab/strategy.hpp"

using namespace frontierlab;

namespace {

void BM_BsPathSimulation(benchmark::State& state) {
  const MarketModel market = preset("bs4-continuous");
  const std::size_t n_paths = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    const PathSet paths = simulate(market, n_paths, 1);
    benchmark::DoNotOptimize(paths.yields.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(
      state.iterations() * n_paths * market.grid.n_steps));
}
BENCHMARK(BM_BsPathSimulation)->Arg(1000)->Arg(10000);

void BM_HestonPathSimulation(benchmark::State& state) {
  const MarketModel market = preset("heston4");
  const std::size_t n_paths = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    const PathSet paths = simulate(market, n_paths, 1);
    benchmark::DoNotOptimize(paths.yields.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(
      state.iterations() * n_paths * market.grid.n_steps));
}
BENCHMARK(BM_HestonPathSimulation)->Arg(1000);

void BM_RolloutForwardBackward(benchmark::State& state) {
  MarketModel market = preset("bs4-continuous");
  market.grid.n_steps = static_cast<std::size_t>(state.range(0));
  const std::size_t batch = 300;
  const PathSet paths = simulate(market, batch, 7);
  const NetworkParams params =
      init_network({2, 14, 14, 14, 4}, OutputHead::kSigmoid, 3);
  const StrategySpec spec{StrategyKind::kSimplex};

  for (auto _ : state) {
    Tape tape;
    BoundNetwork net = bind_network(tape, params);
    TapePolicy::Inputs pi;
    pi.spec = &spec;
    pi.scaling = {1.0, 1.0, {}, 1.0};
    pi.grid = &market.grid;
    pi.net = &net;
    pi.paths = &paths;
    pi.batch = batch;
    TapePolicy policy(tape, pi);
    const Rollout r = rollout_additive(tape, policy, paths, 0, batch, 1.0);
    const NodeId loss = mv_direct(tape, r.terminal_wealth, 1.0);
    tape.backward(loss);
    benchmark::DoNotOptimize(tape.grad(net.weight_ids[0]).data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(
      state.iterations() * batch * market.grid.n_steps));
}
BENCHMARK(BM_RolloutForwardBackward)->Arg(26)->Arg(104);

void BM_ProjectionLayer(benchmark::State& state) {
  const std::size_t d = static_cast<std::size_t>(state.range(0));
  Bounds bounds{NumArray(d, 1, 0.5 / static_cast<double>(d)),
                NumArray(d, 1, 2.0 / static_cast<double>(d))};
  rng::Stream stream(5);
  NumArray w(512, d);
  for (std::size_t i = 0; i < w.size(); ++i)
    w[i] = stream.uniform(bounds.lo[0], bounds.hi[0]);
  const auto order = natural_order(d);

  for (auto _ : state) {
    NumArray copy = w;
    for (std::size_t p = 0; p < copy.rows(); ++p)
      project_to_budget_plain(
          std::span<double>(copy.data() + p * d, d), bounds, order);
    benchmark::DoNotOptimize(copy.data());
  }
  state.SetItemsProcessed(
      static_cast<std::int64_t>(state.iterations() * w.rows()));
}
BENCHMARK(BM_ProjectionLayer)->Arg(4)->Arg(20);

void BM_NetworkForwardPlain(benchmark::State& state) {
  const NetworkParams params =
      init_network({2, 14, 14, 14, 4}, OutputHead::kSigmoid, 3);
  rng::Stream stream(6);
  NumArray batch(4096, 2);
  for (std::size_t i = 0; i < batch.size(); ++i)
    batch[i] = stream.uniform(-1.0, 1.0);
  for (auto _ : state) {
    const NumArray out = network_forward_plain(params, batch);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(
      static_cast<std::int64_t>(state.iterations() * batch.rows()));
}
BENCHMARK(BM_NetworkForwardPlain);

}  // namespace

BENCHMARK_MAIN();
