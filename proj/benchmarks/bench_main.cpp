#include <benchmark/benchmark.h>

#include "smcflow/diffgeo.hpp"
#include "smcflow/filament.hpp"
#include "smcflow/immersion.hpp"
#include "smcflow/membrane.hpp"
#include "smcflow/sphereprod.hpp"

namespace {

using namespace smc;

// range(0): grid size, range(1): stencil order
void BM_ShapeField(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  const GridImmersion imm = build_immersion(PerturbedTorusSpec{}, {n, n});
  const GeometryOptions g{.order = static_cast<int>(st.range(1))};
  for (auto _ : st) benchmark::DoNotOptimize(shape_field(imm, g));
  st.SetItemsProcessed(st.iterations() * n * n);
}
BENCHMARK(BM_ShapeField)->ArgsProduct({{32, 64, 128}, {2, 4}})->Unit(benchmark::kMillisecond);

// one RHS evaluation of the membrane flow = one quarter of an RK4 step
void BM_SmcRhs(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  const GridImmersion imm = build_immersion(TorusSpec{1.0, 2.0}, {n, n});
  for (auto _ : st) benchmark::DoNotOptimize(smc_rhs(imm));
  st.SetItemsProcessed(st.iterations() * n * n);
}
BENCHMARK(BM_SmcRhs)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_WillmoreGradient(benchmark::State& st) {
  const ShapeField s = shape_field(build_immersion(PerturbedTorusSpec{}, {64, 64}));
  for (auto _ : st) benchmark::DoNotOptimize(willmore_gradient(s));
}
BENCHMARK(BM_WillmoreGradient)->Unit(benchmark::kMillisecond);

void BM_TorsionForm(benchmark::State& st) {
  const ShapeField s = shape_field(build_immersion(PerturbedTorusSpec{}, {64, 64}));
  for (auto _ : st) benchmark::DoNotOptimize(torsion_form(s));
}
BENCHMARK(BM_TorsionForm)->Unit(benchmark::kMillisecond);

void BM_BinormalRhs(benchmark::State& st) {
  const auto c = filament::perturbed_circle(1.0, 0.05, 2, static_cast<int>(st.range(0)));
  const auto stencil = st.range(1) ? filament::Stencil::Spectral : filament::Stencil::FourthOrder;
  for (auto _ : st) benchmark::DoNotOptimize(filament::binormal_rhs(c, stencil));
}
BENCHMARK(BM_BinormalRhs)->ArgsProduct({{256, 1024}, {0, 1}});

void BM_ResampleArclength(benchmark::State& st) {
  const auto c = filament::perturbed_circle(1.0, 0.05, 2, 256);
  for (auto _ : st) benchmark::DoNotOptimize(filament::resample_arclength(c));
}
BENCHMARK(BM_ResampleArclength);

// 100 split steps
void BM_NlsSteps(benchmark::State& st) {
  const int m = static_cast<int>(st.range(0));
  filament::WaveField w;
  w.psi.assign(m, filament::cplx(1.0, 0.0));
  for (auto _ : st) benchmark::DoNotOptimize(filament::nls_evolve(w, 1e-3, 0.1, 100));
}
BENCHMARK(BM_NlsSteps)->Arg(256)->Arg(4096);

void BM_SphereToCollapse(benchmark::State& st) {
  const sphere::EvolveOptions o{.mode = sphere::StopMode::Collapse, .a_stop = 1e-10, .halving_factor = 100.0};
  for (auto _ : st) benchmark::DoNotOptimize(sphere::evolve_numeric({1, 2, 1.0, 1.0}, 1e-3, 0.0, o));
}
BENCHMARK(BM_SphereToCollapse)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
