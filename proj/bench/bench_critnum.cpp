#include "critnum/critical_number.hpp"
#include "critnum/proof_tracer.hpp"
#include "critnum/random.hpp"
#include "critnum/sumset.hpp"
#include "critnum/theorem_lab.hpp"

#include <benchmark/benchmark.h>
#include <omp.h>

using namespace critnum;

namespace {

// Group order and a size at which every subset spans, so the whole range is scanned.
void scan_args(benchmark::internal::Benchmark * b)
{
    b->Args({19, 8})->Args({20, 10})->Args({22, 11});
}

void BM_SpanScanReference(benchmark::State & state)
{
    const auto g = make_cyclic(static_cast<std::uint32_t>(state.range(0)));
    const auto l = static_cast<std::uint32_t>(state.range(1));
    std::uint64_t subsets = 0;
    for (auto _ : state) {
        auto scan = spanning_all_of_size_reference(g, l);
        subsets += scan.total;
        benchmark::DoNotOptimize(scan);
    }
    state.counters["subsets/s"] = benchmark::Counter(static_cast<double>(subsets), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_SpanScanReference)->Apply(scan_args)->Unit(benchmark::kMillisecond);

void BM_SpanScanParallel(benchmark::State & state)
{
    const auto g = make_cyclic(static_cast<std::uint32_t>(state.range(0)));
    const auto l = static_cast<std::uint32_t>(state.range(1));
    std::uint64_t subsets = 0;
    for (auto _ : state) {
        auto scan = spanning_all_of_size(g, l);
        subsets += scan.total;
        benchmark::DoNotOptimize(scan);
    }
    state.counters["subsets/s"] = benchmark::Counter(static_cast<double>(subsets), benchmark::Counter::kIsRate);
    state.counters["threads"] = omp_get_max_threads();
}
BENCHMARK(BM_SpanScanParallel)->Apply(scan_args)->Unit(benchmark::kMillisecond);

void BM_Sigma(benchmark::State & state)
{
    const auto g = make_cyclic(static_cast<std::uint32_t>(state.range(0)));
    std::vector<GroupSubset> sets;
    for (std::uint64_t i = 0; i < 64; ++i) {
        auto rng = stream_rng(3, i);
        const auto e = sample_distinct(rng, 1, g->order(), static_cast<std::uint32_t>(state.range(1)));
        sets.emplace_back(g, std::vector<Element>(e.begin(), e.end()));
    }
    std::size_t i = 0;
    for (auto _ : state)
        benchmark::DoNotOptimize(sigma(sets[i++ % sets.size()]));
}
BENCHMARK(BM_Sigma)->Args({91, 18})->Args({209, 28})->Args({1024, 40});

void certify_sets(std::uint32_t n, std::vector<GroupSubset> & sets)
{
    const auto g = make_cyclic(n);
    const auto w = tracer::window_primes(*g).value();
    for (std::uint64_t i = 0; i < 16; ++i) {
        auto rng = stream_rng(11, i);
        const auto e = sample_distinct(rng, 1, n, w.p + w.q - 2);
        sets.emplace_back(g, std::vector<Element>(e.begin(), e.end()));
    }
}

void BM_CertifyTracer(benchmark::State & state)
{
    std::vector<GroupSubset> sets;
    certify_sets(static_cast<std::uint32_t>(state.range(0)), sets);
    std::size_t i = 0;
    for (auto _ : state)
        benchmark::DoNotOptimize(tracer::certify_span(sets[i++ % sets.size()]));
}
BENCHMARK(BM_CertifyTracer)->Arg(91)->Arg(209)->Arg(493)->Unit(benchmark::kMicrosecond);

void BM_CertifyDirect(benchmark::State & state)
{
    std::vector<GroupSubset> sets;
    certify_sets(static_cast<std::uint32_t>(state.range(0)), sets);
    std::size_t i = 0;
    for (auto _ : state)
        benchmark::DoNotOptimize(tracer::certify_direct(sets[i++ % sets.size()]));
}
BENCHMARK(BM_CertifyDirect)->Arg(91)->Arg(209)->Arg(493)->Unit(benchmark::kMicrosecond);

void BM_CauchyDavenportExhaustive(benchmark::State & state)
{
    const auto p = static_cast<std::uint32_t>(state.range(0));
    std::uint64_t instances = 0;
    for (auto _ : state) {
        auto r = lab::verify_cauchy_davenport(p, 2, {});
        instances += r.instances;
        benchmark::DoNotOptimize(r);
    }
    state.counters["instances/s"] = benchmark::Counter(static_cast<double>(instances), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_CauchyDavenportExhaustive)->Arg(7)->Arg(11)->Unit(benchmark::kMillisecond);

void BM_DiderrichSampled(benchmark::State & state)
{
    lab::Options opt;
    opt.mode = lab::Mode::sampled;
    opt.samples = 20000;
    for (auto _ : state)
        benchmark::DoNotOptimize(lab::verify_diderrich(static_cast<std::uint32_t>(state.range(0)), 4, opt));
}
BENCHMARK(BM_DiderrichSampled)->Arg(23)->Arg(61)->Unit(benchmark::kMillisecond);

void BM_DdshExhaustive(benchmark::State & state)
{
    for (auto _ : state)
        benchmark::DoNotOptimize(lab::verify_ddsh(static_cast<std::uint32_t>(state.range(0)), {}));
}
BENCHMARK(BM_DdshExhaustive)->Arg(11)->Arg(13)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
