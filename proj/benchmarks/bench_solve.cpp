#include <benchmark/benchmark.h>

#include <cmath>

#include "mems/experiment.hpp"
#include "mems/precoder.hpp"
#include "mems/subspace.hpp"

namespace {

using namespace mems;

ChannelSet channels_for(int n, std::uint64_t seed) {
  return sample_channel_set(SystemDims{n, n, n, n, std::max(1, n / 2), 1}, seed);
}

void BM_Solve(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const double snr_db = static_cast<double>(state.range(1));
  const ChannelSet ch = channels_for(n, 7);
  OptimizerConfig cfg;
  cfg.n_streams = std::max(1, n / 2);
  cfg.total_power = std::pow(10.0, snr_db / 10.0);
  cfg.w = Weights{0.5, 0.5};
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve(ch, cfg));
  }
}
BENCHMARK(BM_Solve)
    ->Args({8, 0})
    ->Args({8, 20})
    ->Args({16, 0})
    ->Args({16, 20})
    ->Args({32, 0})
    ->Args({32, 20})
    ->Unit(benchmark::kMillisecond);

void BM_BasisUpdate(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const ChannelSet ch = channels_for(n, 11);
  OptimizerConfig cfg;
  cfg.n_streams = std::max(1, n / 2);
  cfg.total_power = 10.0;
  cfg.w = Weights{0.5, 0.5};
  const RealVector p = RealVector::Constant(cfg.n_streams, cfg.total_power / cfg.n_streams);
  const ComplexMatrix w_prev = random_unitary(n, 12).leftCols(cfg.n_streams);
  for (auto _ : state) {
    benchmark::DoNotOptimize(basis_update(ch, p, cfg, w_prev));
  }
}
BENCHMARK(BM_BasisUpdate)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_PowerAllocation(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const ChannelSet ch = channels_for(n, 13);
  OptimizerConfig cfg;
  cfg.n_streams = std::max(1, n / 2);
  cfg.total_power = 10.0;
  cfg.w = Weights{0.5, 0.5};
  const ComplexMatrix basis = random_unitary(n, 14).leftCols(cfg.n_streams);
  const RealVector p = RealVector::Constant(cfg.n_streams, cfg.total_power / cfg.n_streams);
  for (auto _ : state) {
    benchmark::DoNotOptimize(power_allocation(ch, basis, cfg, p));
  }
}
BENCHMARK(BM_PowerAllocation)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_Decompose(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  LabelDims dims{};
  // spread the transmit dimension over all eight labels
  for (int i = 0; i < n; ++i) dims[static_cast<std::size_t>(i % 8)] += 1;
  const ChannelSet ch = make_structured_channels(dims, 15);
  for (auto _ : state) {
    benchmark::DoNotOptimize(decompose(ch));
  }
}
BENCHMARK(BM_Decompose)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
