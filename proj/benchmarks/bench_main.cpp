#include <benchmark/benchmark.h>

#include <random>

#include "app/sweeps.hpp"
#include "qfn/dist.hpp"
#include "qfn/hier.hpp"
#include "qfn/primitives.hpp"

using namespace qfn;

static void BM_CompactMax(benchmark::State& state) {
  const int n_p = static_cast<int>(state.range(0));
  const int t = static_cast<int>(state.range(1));
  std::mt19937_64 rng(1);
  std::vector<double> w(std::size_t{1} << n_p);
  double s = 0;
  for (double& x : w) s += (x = std::uniform_real_distribution<double>(0, 1)(rng));
  for (double& x : w) x /= s;
  for (auto _ : state) benchmark::DoNotOptimize(compact_max(w, n_p, t));
}
BENCHMARK(BM_CompactMax)->Args({1, 4})->Args({3, 4})->Args({3, 8})->Args({6, 4});

static void BM_GateLevelUMax(benchmark::State& state) {
  UMaxSpec spec;
  spec.n_bits = static_cast<int>(state.range(0));
  spec.n_p = 2;
  spec.t = 2;
  spec.f = [](std::uint64_t, std::uint64_t y) { return static_cast<double>(y % 7) / 7.0; };
  RegisterLayout lay;
  add_umax_registers(lay, spec);
  Circuit c = u_max_circuit(spec);
  for (auto _ : state) {
    QuantumState s(lay);
    c.apply(s);
    benchmark::DoNotOptimize(s.norm());
  }
}
BENCHMARK(BM_GateLevelUMax)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

static void BM_ADist(benchmark::State& state) {
  StarInstance inst = star_boundary_instance(static_cast<int>(state.range(0)), 4, 2, 1);
  PrecisionParams p;
  p.t_max = 16;
  DistRunConfig cfg = star_config(inst, p, TopologyKind::line);
  cfg.readout = Readout::correct;
  cfg.mode = state.range(1) ? SimMode::faithful : SimMode::compact;
  if (cfg.mode == SimMode::faithful) {
    inst = star_boundary_instance(1, 2, 1, 1);
    cfg = star_config(inst, p, TopologyKind::line);
    cfg.mode = SimMode::faithful;
  }
  for (auto _ : state) benchmark::DoNotOptimize(a_dist(cfg));
}
BENCHMARK(BM_ADist)->Args({2, 0})->Args({6, 0})->Args({1, 1})->Unit(benchmark::kMillisecond);

static void BM_QueryPoint(benchmark::State& state) {
  auto pts = app::query_sweep_points({static_cast<int>(state.range(0))});
  for (auto _ : state) benchmark::DoNotOptimize(app::run_query_point(pts[0], app::query_sweep_params(), 1, true));
}
BENCHMARK(BM_QueryPoint)->Arg(10)->Arg(16)->Unit(benchmark::kMillisecond);

static void BM_PolicyPoint(benchmark::State& state) {
  const auto pt = policy_family_path().at(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(policy_sweep_point(pt, policy_sweep_params(), state.range(1) != 0));
}
BENCHMARK(BM_PolicyPoint)->Args({0, 1})->Args({12, 0})->Args({12, 1})->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
