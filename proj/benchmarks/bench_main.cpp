// Microbenchmarks for the hot paths: mesh simulation, flow execution,
// header codec, and causal ranking. Numbers are per-operation; the harness
// cost model is whatever these report times scenario counts.
#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "havoc/crawler.hpp"
#include "havoc/fault.hpp"
#include "havoc/rca.hpp"
#include "havoc/simmesh.hpp"
#include "havoc/topology.hpp"

namespace {

using namespace havoc;

std::string data_path(const std::string& rel) {
    return std::string(HAVOC_DATA_DIR) + "/" + rel;
}

const Topology& ride_city() {
    static const Topology t = load_topology_file(data_path("topologies/ride-city.json"));
    return t;
}

const FlowDefinition& core_trip() {
    static const FlowDefinition f = load_flow_file(data_path("flows/core-trip.json"));
    return f;
}

HavocHeaders headers_with(const std::vector<std::string>& faults) {
    HavocHeaders h;
    h.tenancy = Tenancy::test;
    h.run_id = "bench";
    for (const std::string& f : faults) {
        h.faults.push_back(FaultSpec::parse(f));
    }
    return h;
}

void BM_ExecuteRequest(benchmark::State& state) {
    const HavocHeaders h = headers_with({});
    std::uint64_t seed = 1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(execute_request(ride_city(), "core-trip", h, seed++));
    }
}
BENCHMARK(BM_ExecuteRequest);

void BM_ExecuteRequest_Faulted(benchmark::State& state) {
    const HavocHeaders h =
        headers_with({"latency(250);tier>=2;p=0.5", "abort(503);svc=promo;all"});
    std::uint64_t seed = 1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(execute_request(ride_city(), "core-trip", h, seed++));
    }
}
BENCHMARK(BM_ExecuteRequest_Faulted);

void BM_RunFlow(benchmark::State& state) {
    DefaultPolicy policy;
    const HavocHeaders h = headers_with({});
    std::uint64_t seed = 1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(run_flow(ride_city(), core_trip(), policy, h, seed++));
    }
}
BENCHMARK(BM_RunFlow);

void BM_HeaderRoundTrip(benchmark::State& state) {
    const HavocHeaders h = headers_with(
        {"abort(503);ep=pricing:/pricing/quote;all", "timeout;svc=maps;p=0.25",
         "latency(2000);tier>=4;p=0.9"});
    for (auto _ : state) {
        benchmark::DoNotOptimize(decode_headers(encode_headers(h)));
    }
}
BENCHMARK(BM_HeaderRoundTrip);

void BM_ParseFaultSpec(benchmark::State& state) {
    const std::string spec = "latency(2000);ep=pricing:/pricing/quote;p=0.33";
    for (auto _ : state) {
        benchmark::DoNotOptimize(FaultSpec::parse(spec));
    }
}
BENCHMARK(BM_ParseFaultSpec);

void BM_ScoreRequest(benchmark::State& state) {
    BaselineStats stats;
    stats.patterns[{"pricing", "/pricing/quote"}] = PatternStats{40, 2};
    RpcRecord r;
    r.caller = "trip";
    r.callee = "pricing";
    r.endpoint = "/pricing/quote";
    r.status_code = 503;
    const ScoreWeights weights;
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            score_request(r, stats, 2, RelevanceCategory::direct, weights));
    }
}
BENCHMARK(BM_ScoreRequest);

void BM_RankCauses(benchmark::State& state) {
    // Fixture built once: three passing baselines plus one failing chaos run
    // against the planted pricing violation.
    static const Topology planted =
        plant_violation(ride_city(), {"trip", "pricing", "/pricing/quote"});
    DefaultPolicy policy;
    const HavocHeaders clean = headers_with({});
    const HavocHeaders chaos_headers =
        headers_with({"abort(503);ep=pricing:/pricing/quote;all"});
    std::vector<RunSample> samples;
    for (int i = 0; i < 3; ++i) {
        RunResult run = run_flow(planted, core_trip(), policy, clean, 100 + i);
        samples.push_back(RunSample{run.passed, std::move(run.merged_log)});
    }
    const BaselineStats stats = compute_baseline_stats(samples);
    const RunResult chaos = run_flow(planted, core_trip(), policy, chaos_headers, 7);
    DefaultErrorScreenClassifier screen_classifier;
    const ErrorDetection detection =
        detect_errors(chaos.transitions, chaos.screens_mosaic, &screen_classifier);
    OracleCategorizer categorizer(planted);

    for (auto _ : state) {
        benchmark::DoNotOptimize(rank_causes(chaos.merged_log, detection.findings,
                                             stats, planted, categorizer,
                                             core_trip().flow_id));
    }
    state.counters["log_records"] = static_cast<double>(chaos.merged_log.size());
}
BENCHMARK(BM_RankCauses);

}  // namespace

BENCHMARK_MAIN();
