// Parallel kernels against their serial references.

#include "kgreason/dataset.hpp"
#include "kgreason/evaluator.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace kgr;

namespace {

std::vector<SourceRecord> make_records(std::size_t n) {
    std::mt19937_64 rng(42);
    std::vector<SourceRecord> out;
    for (std::size_t i = 0; i < n; ++i) {
        const auto k = std::to_string(i);
        const auto b = std::to_string(rng() % (n / 8 + 1));
        SourceRecord r;
        r.id = k;
        r.e1 = Entity{"Work " + k};
        r.r1 = Relation{"composer"};
        r.e2 = Entity{"Person " + b};
        r.r2 = Relation{"spouse"};
        r.e3 = Entity{"Partner of " + b + " " + k};
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<JudgeInput> make_inputs(std::size_t n) {
    const auto records = make_records(n);
    std::vector<JudgeInput> out;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto chain = records[i].to_instance();
        CompletionResult r;
        // a third of completions name a wrong final entity
        r.text = i % 3 == 0 ? wrap_answer_envelope(render(chain, RepresentationTag::json).body,
                                                   RepresentationTag::json, Entity{"Nobody"})
                            : render(chain, RepresentationTag::json).envelope;
        out.push_back({records[i].id, chain, std::move(r)});
    }
    return out;
}

void BM_judge_all(benchmark::State& state) {
    const auto inputs = make_inputs(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(judge_all(inputs, RepresentationTag::json));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_judge_all_serial(benchmark::State& state) {
    const auto inputs = make_inputs(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(judge_all_serial(inputs, RepresentationTag::json));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_finetune_corpus(benchmark::State& state) {
    const auto records = make_records(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state)
        benchmark::DoNotOptimize(build_finetune_corpus(records, RepresentationTag::python_dynamic, DatasetStyle::statement));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_finetune_corpus_serial(benchmark::State& state) {
    const auto records = make_records(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state)
        benchmark::DoNotOptimize(
            build_finetune_corpus_serial(records, RepresentationTag::python_dynamic, DatasetStyle::statement));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_judge_all)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_judge_all_serial)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_finetune_corpus)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_finetune_corpus_serial)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
