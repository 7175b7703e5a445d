#include <benchmark/benchmark.h>

#include "ttrb/fom.hpp"
#include "ttrb/hyper.hpp"
#include "ttrb/problems.hpp"
#include "ttrb/reduce.hpp"
#include "ttrb/rom.hpp"

#include <memory>

namespace {

using namespace ttrb;

struct Fixture {
  std::unique_ptr<FullOrderModel> fom;
  SnapshotSet snaps;
  Parameter online;
};

const Fixture& poisson2d() {
  static const Fixture f = [] {
    Fixture x;
    x.fom = std::make_unique<FullOrderModel>(poisson_problem(2, 30));
    x.snaps = generate_snapshots(*x.fom, halton_points(20, x.fom->spec().box), 20);
    x.online = uniform_points(1, x.fom->spec().box, 7).front();
    return x;
  }();
  return f;
}

double eps_of(const benchmark::State& s) {
  return s.range(0) == 2 ? 1e-2 : s.range(0) == 3 ? 1e-3 : 1e-4;
}

void BM_XkTtSvd(benchmark::State& state) {
  const auto& f = poisson2d();
  for (auto _ : state) benchmark::DoNotOptimize(xk_tt_svd(f.snaps.solutions, f.fom->norm(), eps_of(state)));
}

void BM_Tpod(benchmark::State& state) {
  const auto& f = poisson2d();
  const auto x = f.fom->norm().expand();
  for (auto _ : state) benchmark::DoNotOptimize(tpod(f.snaps.solutions, 2, x, eps_of(state)));
}

void BM_TtMdeimResidual(benchmark::State& state) {
  const auto& f = poisson2d();
  for (auto _ : state) benchmark::DoNotOptimize(tt_mdeim(f.snaps.residuals, eps_of(state)));
}

void BM_FomSolve(benchmark::State& state) {
  const auto& f = poisson2d();
  for (auto _ : state) benchmark::DoNotOptimize(f.fom->solve(f.online));
}

void BM_OnlineSolve(benchmark::State& state) {
  const auto& f = poisson2d();
  const auto m = state.range(1) == 0 ? Method::TT : Method::ST;
  const auto rom = build_rom(m, *f.fom, f.snaps, RomOptions{eps_of(state), true});
  for (auto _ : state) benchmark::DoNotOptimize(online_solve(rom, *f.fom, f.online));
  state.counters["dim"] = static_cast<double>(rom.dimension());
}

}  // namespace

BENCHMARK(BM_XkTtSvd)->DenseRange(2, 4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Tpod)->DenseRange(2, 4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TtMdeimResidual)->DenseRange(2, 4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FomSolve)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_OnlineSolve)->ArgsProduct({{2, 3, 4}, {0, 1}})->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
