#include <benchmark/benchmark.h>

#include <string>
#include <unordered_map>
#include <vector>

#include "cmtsketch/corpus.hpp"
#include "cmtsketch/eval.hpp"
#include "cmtsketch/sketch.hpp"

namespace {

using namespace cmt;

const TokenSequence& stream() {
    static const TokenSequence seq = zipf_stream(100000, 1.0, 1 << 20, 7);
    return seq;
}

std::vector<KeyDigest> digests(std::uint64_t seed) {
    const auto& seq = stream();
    std::vector<KeyDigest> out;
    out.reserve(seq.size());
    for (std::size_t i = 0; i < seq.size(); ++i) out.push_back({hash_bytes(seq.token(i), seed)});
    return out;
}

template <class S, Preset P>
void BM_Increment(benchmark::State& state) {
    const auto keys = digests(1);
    // roughly the ideal size of 10^5 distinct keys
    S sketch(*config_for_bytes(P, 4, 1, 400000.0 * state.range(0) / 100));
    std::size_t i = 0;
    for (auto _ : state) {
        sketch.increment(keys[i]);
        i = (i + 1) & (keys.size() - 1);
    }
    state.SetItemsProcessed(state.iterations());
}

template <class S, Preset P>
void BM_Estimate(benchmark::State& state) {
    const auto keys = digests(1);
    S sketch(*config_for_bytes(P, 4, 1, 400000.0));
    for (const auto& k : keys) sketch.increment(k);
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(sketch.estimate(keys[i]));
        i = (i + 1) & (keys.size() - 1);
    }
    state.SetItemsProcessed(state.iterations());
}

void BM_UnorderedMap(benchmark::State& state) {
    const auto& seq = stream();
    std::unordered_map<std::string, std::uint32_t> counts;
    std::size_t i = 0;
    for (auto _ : state) {
        ++counts[std::string(seq.token(i))];
        i = (i + 1) & (seq.size() - 1);
    }
    state.SetItemsProcessed(state.iterations());
}

void BM_HashBytes(benchmark::State& state) {
    const auto& seq = stream();
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(hash_bytes(seq.token(i), 42));
        i = (i + 1) & (seq.size() - 1);
    }
    state.SetItemsProcessed(state.iterations());
}

void BM_CmtsMerge(benchmark::State& state) {
    const auto keys = digests(1);
    const SketchConfig c = cmts_cu_config(4, 128 * 512, 1);
    CountMinTreeSketch a(c);
    CountMinTreeSketch b(c);
    for (std::size_t i = 0; i < keys.size(); ++i) (i % 2 ? a : b).increment(keys[i]);
    for (auto _ : state) benchmark::DoNotOptimize(CountMinTreeSketch::merge(a, b));
    state.SetItemsProcessed(state.iterations() * c.width * c.depth);
}

}  // namespace

BENCHMARK_TEMPLATE(BM_Increment, CountMinSketch, Preset::CmsCu)->Arg(100)->Arg(800);
BENCHMARK_TEMPLATE(BM_Increment, CountMinLogSketch, Preset::Cmls16Cu)->Arg(100)->Arg(800);
BENCHMARK_TEMPLATE(BM_Increment, CountMinLogSketch, Preset::Cmls8Cu)->Arg(100)->Arg(800);
BENCHMARK_TEMPLATE(BM_Increment, CountMinTreeSketch, Preset::CmtsCu)->Arg(100)->Arg(800);
BENCHMARK_TEMPLATE(BM_Estimate, CountMinSketch, Preset::CmsCu);
BENCHMARK_TEMPLATE(BM_Estimate, CountMinTreeSketch, Preset::CmtsCu);
BENCHMARK(BM_UnorderedMap);
BENCHMARK(BM_HashBytes);
BENCHMARK(BM_CmtsMerge);

BENCHMARK_MAIN();
