#include <benchmark/benchmark.h>

#include "bhd/simulator.hpp"
#include "bhd/statistics.hpp"

using namespace bhd;

namespace {

Exec exec_of(const benchmark::State& st) { return st.range(0) ? Exec::parallel : Exec::serial; }

const std::vector<DetectorRecord>& records() {
  static const auto r = [] {
    SimulationConfig c;
    c.state = Prcs{0.62};
    c.lo.excess_noise_db = 26.0;
    c.seed = 1;
    return simulate(c);
  }();
  return r;
}

void BM_simulate(benchmark::State& st) {
  SimulationConfig c;
  c.state = Prcs{0.62};
  c.lo.excess_noise_db = 26.0;
  c.n_samples = 1'000'000;
  for (auto _ : st) benchmark::DoNotOptimize(simulate(c, exec_of(st)));
  st.SetItemsProcessed(st.iterations() * c.n_samples);
}

void BM_simulate_fock(benchmark::State& st) {
  SimulationConfig c;
  c.state = Fock{2};
  c.n_samples = 1'000'000;
  for (auto _ : st) benchmark::DoNotOptimize(simulate(c, exec_of(st)));
  st.SetItemsProcessed(st.iterations() * c.n_samples);
}

void BM_histogram(benchmark::State& st) {
  const auto d = difference_samples(records());
  for (auto _ : st) benchmark::DoNotOptimize(estimate_density_1d(d, GridDefaults::quadrature(), exec_of(st)));
  st.SetItemsProcessed(st.iterations() * d.size());
}

void BM_joint_histogram(benchmark::State& st) {
  const UniformAxis ax(-140.0, 140.0, 160);
  for (auto _ : st) benchmark::DoNotOptimize(joint_histogram(records(), ax, ax, exec_of(st)));
  st.SetItemsProcessed(st.iterations() * records().size());
}

void BM_reconstruct_w0(benchmark::State& st) {
  const auto p_d = symmetrize(estimate_density_1d(difference_samples(records()), GridDefaults::quadrature())).symmetrized;
  for (auto _ : st) benchmark::DoNotOptimize(reconstruct_w0(p_d, 1.0, GridDefaults::correlation(), {}, exec_of(st)));
}

void BM_convolution(benchmark::State& st) {
  const auto& r = records();
  const auto p_s = estimate_density_1d(sum_samples(r), UniformAxis(-140.0, 140.0, 2800));
  const auto p_d = estimate_density_1d(difference_samples(r), GridDefaults::quadrature());
  const UniformAxis m(-1600.0, 1600.0, 800);
  for (auto _ : st) benchmark::DoNotOptimize(correlation_density_convolution(p_s, p_d, m, 0.02, exec_of(st)));
}

}  // namespace

// Argument 0 = serial reference path, 1 = OpenMP path.
BENCHMARK(BM_simulate)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_simulate_fock)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_histogram)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_joint_histogram)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_reconstruct_w0)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_convolution)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
