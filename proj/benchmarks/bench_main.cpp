#include <benchmark/benchmark.h>

#include "nvgyro/executor.hpp"
#include "nvgyro/noise.hpp"
#include "nvgyro/protocols.hpp"
#include "nvgyro/spin_core.hpp"
#include "nvgyro/units.hpp"

namespace {

using namespace nvgyro;

void BM_BuildHamiltonian(benchmark::State& state) {
  const spin::NVParams params;
  const spin::FieldVector field{239.0, deg_to_rad(1.0), 0.3};
  for (auto _ : state) benchmark::DoNotOptimize(spin::build_hamiltonian(params, field));
}
BENCHMARK(BM_BuildHamiltonian);

void BM_Eigensystem(benchmark::State& state) {
  const auto h = spin::build_hamiltonian(spin::NVParams{}, spin::FieldVector{239.0, deg_to_rad(1.0), 0.3});
  for (auto _ : state) benchmark::DoNotOptimize(spin::eigensystem(h));
}
BENCHMARK(BM_Eigensystem);

void BM_NuclearFrequency(benchmark::State& state) {
  const spin::NVParams params;
  const spin::FieldVector field{239.0, deg_to_rad(2.0), 0.0};
  for (auto _ : state) benchmark::DoNotOptimize(spin::nuclear_transition_frequency(params, field, 0));
}
BENCHMARK(BM_NuclearFrequency);

void BM_ExecutorPrepare(benchmark::State& state) {
  const spin::NVParams params;
  const seq::Executor exec(params, spin::FieldVector{});
  const auto model = noise::NoiseModel::magnetic_from(params);
  std::uint64_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(exec.prepare(noise::sample(model, 1, i++)));
}
BENCHMARK(BM_ExecutorPrepare);

void BM_ExecutorRun(benchmark::State& state) {
  const auto manifold = static_cast<protocols::Manifold>(state.range(0));
  const spin::NVParams params;
  const seq::Executor exec(params, spin::FieldVector{});
  const auto ctx = exec.prepare(noise::sample(noise::NoiseModel::magnetic_from(params), 1, 0));
  const auto& s = protocols::ramsey_sequence(manifold);
  const seq::Bindings b{{"t", 2e-3}, {"phi", 0.4}};
  for (auto _ : state) benchmark::DoNotOptimize(exec.run(s, ctx, b).readout);
}
BENCHMARK(BM_ExecutorRun)->Arg(0)->Arg(1)->Arg(2);

void BM_RamseyEnsemble(benchmark::State& state) {
  protocols::RamseyConfig cfg;
  cfg.noise = noise::NoiseModel::magnetic_from(cfg.params);
  cfg.times_s = {1e-3, 2e-3, 4e-3};
  cfg.draws = static_cast<std::size_t>(state.range(0));
  cfg.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(protocols::ramsey_scan(cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RamseyEnsemble)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
