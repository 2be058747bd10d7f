#include <benchmark/benchmark.h>

#include <cmath>

#include "skewlab/circle_maps.hpp"
#include "skewlab/classify.hpp"
#include "skewlab/hhu.hpp"
#include "skewlab/holonomy.hpp"
#include "skewlab/plante.hpp"

using namespace skewlab;

namespace {

SkewProductSystem accessible() {
    const auto proto = make_prototype(IntegerMatrix::from_rows({{2, 1}, {1, 1}}), IntegerMatrix::identity(2));
    return perturb(proto, Perturbation::fiber_shear({TrigTerm{0.05, {1, 0, 0}, 0, Phase::Sin}}));
}

void BM_ForwardStep(benchmark::State& state) {
    const auto sys = accessible();
    SkewPoint p = random_point(1, 0, 2);
    for (auto _ : state) {
        sys.forward(p);
        benchmark::DoNotOptimize(p.z);
    }
}
BENCHMARK(BM_ForwardStep);

void BM_SuLoopMap(benchmark::State& state) {
    const auto sys = accessible();
    const auto loops = generator_loops(sys.base());
    const SuLoopMap g(sys, loops[0], static_cast<int>(state.range(0)));
    double z = 0.1;
    for (auto _ : state) {
        z = g(z) - std::floor(g(z));
        benchmark::DoNotOptimize(z);
    }
}
BENCHMARK(BM_SuLoopMap)->Arg(40)->Arg(80)->Arg(120);

void BM_DetectCompactClasses(benchmark::State& state) {
    const auto sys = accessible();
    const auto loops = generator_loops(sys.base());
    for (auto _ : state) benchmark::DoNotOptimize(detect_compact_classes(sys, loops, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_DetectCompactClasses)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_RotationNumber(benchmark::State& state) {
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    const auto lift = MonotoneCircleLift::from_function([g](double x) { return x + g + 0.05 * std::sin(6.283185307179586 * x); });
    for (auto _ : state) benchmark::DoNotOptimize(rotation_number(lift, state.range(0)));
}
BENCHMARK(BM_RotationNumber)->Arg(100'000)->Arg(1'000'000)->Unit(benchmark::kMillisecond);

void BM_BirkhoffStats(benchmark::State& state) {
    const auto sys = accessible();
    const auto tests = default_test_functions(2);
    for (auto _ : state) benchmark::DoNotOptimize(birkhoff_stats(sys, tests, random_point(3, 0, 2), state.range(0)));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BirkhoffStats)->Arg(100'000)->Unit(benchmark::kMillisecond);

void BM_HhuGraphs(benchmark::State& state) {
    const HhuParameters p;
    for (auto _ : state) {
        benchmark::DoNotOptimize(build_unstable_graph(p, static_cast<int>(state.range(0))));
        benchmark::DoNotOptimize(build_stable_graph(p, static_cast<int>(state.range(0))));
    }
}
BENCHMARK(BM_HhuGraphs)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_MasterSemiconjugacy(benchmark::State& state) {
    LineAction a;
    a.chart = Chart{ChartKind::SinBump, 0.3, 4.0};
    a.generators = {{1.0, 1.0}, {1.0, std::sqrt(2.0)}};
    a.conjugator = {2.0, 0.5};
    for (auto _ : state) benchmark::DoNotOptimize(master_semiconjugacy(a, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_MasterSemiconjugacy)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
