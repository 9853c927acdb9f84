// Serial vs OpenMP timings for the parallel kernels. Arg 0 = serial, 1 = parallel.

#include <benchmark/benchmark.h>

#include "alarmrisk/bayes_net.hpp"
#include "alarmrisk/logistic.hpp"
#include "alarmrisk/pipeline.hpp"
#include "alarmrisk/synthetic.hpp"

using namespace alarmrisk;

namespace {

Execution exec_of(const benchmark::State& s) { return s.range(0) ? Execution::Parallel : Execution::Serial; }

const std::vector<FeatureVector>& rows() {
    static const auto r = synthetic_features(20, 11);
    return r;
}

void BM_EvaluateTan(benchmark::State& state) {
    RunConfig cfg;
    cfg.folds = 200;
    cfg.exec = exec_of(state);
    for (auto _ : state) benchmark::DoNotOptimize(evaluate_family(rows(), ModelFamily::Tan, cfg));
}

void BM_EvaluateLr(benchmark::State& state) {
    RunConfig cfg;
    cfg.folds = 200;
    cfg.exec = exec_of(state);
    for (auto _ : state) benchmark::DoNotOptimize(evaluate_family(rows(), ModelFamily::Logistic, cfg));
}

void BM_CmiMatrix(benchmark::State& state) {
    const auto inputs = family_features(ModelFamily::Tan, FeatureSet::BehaviouralSubjective);
    const auto m = train_bn(rows(), ModelFamily::NaiveBayes, inputs, 1.0);
    const auto data = m.discretization.apply(make_table(rows(), inputs), inputs);
    for (auto _ : state) benchmark::DoNotOptimize(cmi_matrix(data, exec_of(state)));
}

void BM_Stepwise(benchmark::State& state) {
    const auto s = synthetic_logistic(5000, 12, -0.5, 1.0, 2);
    NumericTable t;
    for (int j = 0; j < 12; ++j) t.features.push_back("x" + std::to_string(j));
    t.x = s.x;
    t.y = s.y;
    t.group.assign(s.y.size(), Group::G1);
    t.scenario.assign(s.y.size(), Scenario::S1);
    for (auto _ : state) benchmark::DoNotOptimize(stepwise(t, t.features, Criterion::Bic, {}, exec_of(state)));
}

}  // namespace

BENCHMARK(BM_EvaluateTan)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EvaluateLr)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CmiMatrix)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Stepwise)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
