#include <benchmark/benchmark.h>

#include "ctxmem/search.hpp"

using namespace ctxmem;

// serial reference vs OpenMP kernels on the heaviest inner loops

static void BM_degree_doily(benchmark::State& state, ExecMode mode) {
    IncidenceStructure s = build_structure("doily");
    for (auto _ : state) {
        DegreeResult d = contextuality_degree(s, mode);
        benchmark::DoNotOptimize(d.degree);
    }
}
BENCHMARK_CAPTURE(BM_degree_doily, serial, ExecMode::serial);
BENCHMARK_CAPTURE(BM_degree_doily, parallel, ExecMode::parallel);

static void BM_minimal_sets_doily(benchmark::State& state, ExecMode mode) {
    IncidenceStructure s = build_structure("doily");
    for (auto _ : state) {
        auto sets = minimal_contradiction_sets(s, mode);
        benchmark::DoNotOptimize(sets.size());
    }
}
BENCHMARK_CAPTURE(BM_minimal_sets_doily, serial, ExecMode::serial);
BENCHMARK_CAPTURE(BM_minimal_sets_doily, parallel, ExecMode::parallel);

static void BM_oracle_pentagram_5(benchmark::State& state, ExecMode mode) {
    IncidenceStructure s = build_structure("pentagram");
    MealyMachine m = fixture("pentagram_5");
    for (auto _ : state) {
        OracleResult r = sequence_oracle(m, s, PredictionSet::Ia_II, 8, UINT64_MAX, mode);
        benchmark::DoNotOptimize(r.status);
    }
}
BENCHMARK_CAPTURE(BM_oracle_pentagram_5, serial, ExecMode::serial);
BENCHMARK_CAPTURE(BM_oracle_pentagram_5, parallel, ExecMode::parallel);

static void BM_search_square_3(benchmark::State& state, int threads) {
    IncidenceStructure s = build_structure("square");
    for (auto _ : state) {
        SearchBudget budget;
        budget.threads = threads;
        SearchOutcome r = find_machine(s, PredictionSet::Ia_II, 3, budget);
        benchmark::DoNotOptimize(r.status);
    }
}
BENCHMARK_CAPTURE(BM_search_square_3, serial, 1);
BENCHMARK_CAPTURE(BM_search_square_3, parallel, 0);

BENCHMARK_MAIN();
