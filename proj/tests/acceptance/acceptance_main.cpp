// Acceptance gate. Each criterion prints exactly one line:
//
//   PASS c07 latency-percentile-ordering : <measured numbers>
//   FAIL c03 scoring-grid : <which check broke and by how much>
//
// The process exits nonzero when any line fails. Tolerances are pinned as
// constants next to the checks that use them; everything else is exact.
#include <unistd.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "havoc/crawler.hpp"
#include "havoc/fault.hpp"
#include "havoc/harness.hpp"
#include "havoc/rca.hpp"
#include "havoc/simmesh.hpp"
#include "havoc/topology.hpp"
#include "support/oracle.hpp"
#include "support/synth.hpp"

using namespace havoc;
namespace fs = std::filesystem;

namespace {

constexpr double kScoreTolerance = 1e-12;  // engine score vs independent arithmetic

std::string data_path(const std::string& rel) {
    return std::string(HAVOC_DATA_DIR) + "/" + rel;
}

// Collects sub-check failures; a criterion passes when none accumulated.
struct Gate {
    std::vector<std::string> failures;
    std::ostringstream detail;

    void expect(bool ok, const std::string& what) {
        if (!ok) {
            failures.push_back(what);
        }
    }
    bool ok() const { return failures.empty(); }
    std::string render() const {
        if (ok()) {
            return detail.str();
        }
        std::string out;
        for (std::size_t i = 0; i < failures.size(); ++i) {
            out += (i ? "; " : "") + failures[i];
        }
        return out;
    }
};

std::string fmt(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

struct ScratchDir {
    fs::path path;
    explicit ScratchDir(const std::string& tag) {
        path = fs::temp_directory_path() /
               ("havoc-acceptance-" + tag + "-" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~ScratchDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

const Topology& ride_city() {
    static const Topology t = load_topology_file(data_path("topologies/ride-city.json"));
    return t;
}

const Topology& ride_min() {
    static const Topology t = load_topology_file(data_path("topologies/ride-min.json"));
    return t;
}

const FlowDefinition& core_trip() {
    static const FlowDefinition f = load_flow_file(data_path("flows/core-trip.json"));
    return f;
}

const FlowDefinition& eats_order() {
    static const FlowDefinition f = load_flow_file(data_path("flows/eats-order.json"));
    return f;
}

const EdgeRef kPricingEdge{"trip", "pricing", "/pricing/quote"};

int rank_of(const CausalRanking& ranking, const EdgeRef& edge) {
    for (const RankedCause& rc : ranking.causes) {
        if (rc.record.callee == edge.callee && rc.record.endpoint == edge.endpoint) {
            return rc.rank;
        }
    }
    return 0;
}

// ---- c01: production tenancy is never faulted ----

Gate check_tenancy_isolation() {
    Gate g;
    const Topology& topo = ride_city();
    const std::vector<std::string> kinds = {"abort(400)", "abort(503)", "abort(599)",
                                            "timeout", "latency(250)", "latency(2000)"};
    const std::vector<std::string> targets = {
        "tier>=0", "tier>=2", "tier>=4", "svc=promo", "svc=pricing",
        "svc=maps", "ep=pricing:/pricing/quote"};
    const std::vector<std::string> scopes = {"all", "p=0.9", "p=0.5"};

    SeededStream rng(101);
    const int total_requests = 10'000;
    std::int64_t injected = 0;
    std::int64_t records = 0;
    for (int i = 0; i < total_requests; ++i) {
        HavocHeaders h;
        h.run_id = "prod-sweep";
        const int nfaults = 1 + static_cast<int>(rng.uniform_int(0, 2));
        for (int f = 0; f < nfaults; ++f) {
            h.faults.push_back(FaultSpec::parse(
                kinds[rng.uniform_int(0, kinds.size() - 1)] + ";" +
                targets[rng.uniform_int(0, targets.size() - 1)] + ";" +
                scopes[rng.uniform_int(0, scopes.size() - 1)]));
        }
        if (i % 2 == 0) {
            h.tenancy = Tenancy::production;
        } else {
            // The other half arrives with the tenancy header stripped in
            // flight; decoding must fail safe to production.
            h.tenancy = Tenancy::test;
            auto wire = encode_headers(h);
            std::erase_if(wire, [](const auto& kv) { return kv.first == "x-havoc-tenancy"; });
            h = decode_headers(wire);
            g.expect(h.tenancy == Tenancy::production,
                     "stripped tenancy header did not decode to production");
        }
        const ExecutionResult r = execute_request(
            topo, (i % 4 < 2) ? "core-trip" : "eats-order", h, rng.next_u64());
        g.expect(!r.log.empty(), "request produced no rpc records");
        records += static_cast<std::int64_t>(r.log.size());
        for (const RpcRecord& rec : r.log) {
            if (rec.injected) {
                ++injected;
            }
        }
    }
    g.expect(injected == 0, std::to_string(injected) + " injected records leaked");
    g.detail << total_requests << " production-tenancy requests under randomized fault "
             << "headers: 0 of " << records << " rpc records injected";
    return g;
}

// ---- c02: header codec round trip ----

Gate check_header_codec() {
    Gate g;
    SeededStream rng(202);
    const int iterations = 1'000;
    for (int i = 0; i < iterations; ++i) {
        const HavocHeaders h = testsupport::random_headers(rng);
        const auto wire = encode_headers(h);
        if (wire.size() != 3) {
            g.expect(false, "encode emitted " + std::to_string(wire.size()) + " headers");
            break;
        }
        if (!(decode_headers(wire) == h)) {
            g.expect(false, "decode(encode(h)) != h at iteration " + std::to_string(i));
            break;
        }
    }
    g.detail << iterations << " generated header sets: decode(encode(h)) == h, "
             << "always exactly 3 headers";
    return g;
}

// ---- c03: causal scoring formula vs independent arithmetic ----

Gate check_scoring_grid() {
    Gate g;
    // Statistics fixtures with hand-computable smoothed failure rates: the
    // (failing+1)/(total+2) rule gives 0.25, 0.9, ~0 (1/1000), and unseen
    // patterns read exactly 0.5.
    struct NfrCase {
        const char* name;
        bool seen;
        std::int64_t total, failing;
        double nfr;
    };
    const std::vector<NfrCase> nfr_cases = {
        {"unseen", false, 0, 0, 0.5},
        {"quarter", true, 2, 0, (0.0 + 1.0) / (2.0 + 2.0)},
        {"chronic", true, 8, 8, (8.0 + 1.0) / (8.0 + 2.0)},
        {"pristine", true, 998, 0, (0.0 + 1.0) / (998.0 + 2.0)},
    };
    struct StatusCase {
        int code;
        bool timed_out;
        double f_status;
    };
    const std::vector<StatusCase> statuses = {
        {200, false, 0.2}, {404, false, 0.5}, {503, false, 1.0}, {0, true, 1.0}};
    const double f_tier[6] = {1.0, 0.9, 0.7, 0.4, 0.1, 0.1};
    const std::vector<std::pair<RelevanceCategory, double>> categories = {
        {RelevanceCategory::direct, 3.0},
        {RelevanceCategory::indirect, 2.0},
        {RelevanceCategory::supporting, 1.2},
        {RelevanceCategory::unrelated, 0.3}};

    int cases = 0;
    double worst = 0.0;
    for (const NfrCase& nc : nfr_cases) {
        BaselineStats stats;
        if (nc.seen) {
            stats.patterns[{"svc", "/e"}] = PatternStats{nc.total, nc.failing};
        }
        for (const StatusCase& sc : statuses) {
            for (int tier = 0; tier <= kMaxTier; ++tier) {
                for (const auto& [cat, f_cat] : categories) {
                    RpcRecord r;
                    r.caller = "up";
                    r.callee = "svc";
                    r.endpoint = "/e";
                    r.end_ms = 1;
                    r.status_code = sc.code;
                    r.timed_out = sc.timed_out;
                    const ScoreBreakdown got = score_request(
                        r, stats, static_cast<TierLevel>(tier), cat, ScoreWeights{});
                    double expected = sc.f_status * (1.0 - nc.nfr);
                    expected *= f_tier[tier];
                    expected *= f_cat;
                    const double err = std::fabs(got.score - expected);
                    worst = std::max(worst, err);
                    if (err > kScoreTolerance) {
                        g.expect(false, std::string("grid case ") + nc.name + "/" +
                                            std::to_string(sc.code) + "/t" +
                                            std::to_string(tier) + " off by " + fmt(err, 18));
                    }
                    g.expect(got.f_status == sc.f_status && got.f_tier == f_tier[tier] &&
                                 got.f_category == f_cat,
                             "factor breakdown mismatch");
                    ++cases;
                }
            }
        }
    }

    // Worked examples: with a clean history the factor products come out to
    // 2.1, 0.03, and 0.8.
    const std::vector<std::pair<std::array<int, 2>, double>> worked = {
        {{2, 0}, 2.1},   // 5xx at tier 2 on a direct dependency
        {{5, 3}, 0.03},  // 5xx at tier 5 on an unrelated dependency
        {{3, 1}, 0.8},   // 5xx at tier 3 on an indirect dependency
    };
    for (const auto& [key, want] : worked) {
        RpcRecord r;
        r.callee = "svc";
        r.endpoint = "/e";
        r.status_code = 503;
        const ScoreBreakdown b =
            score_request(r, BaselineStats{}, static_cast<TierLevel>(key[0]),
                          categories[key[1]].first, ScoreWeights{});
        const double product = b.f_status * b.f_tier * b.f_category;
        g.expect(std::fabs(product - want) <= kScoreTolerance,
                 "worked example " + fmt(want, 2) + " came out " + fmt(product, 17));
    }

    g.detail << cases << " grid cases (4 statuses x 6 tiers x 4 categories x 4 failure "
             << "rates) within 1e-12 of independent arithmetic; worked examples "
             << "2.1 / 0.03 / 0.8 reproduced";
    return g;
}

// ---- c04: ranking equals the brute-force oracle ----

Gate check_ranking_vs_oracle() {
    Gate g;
    SeededStream rng(404);
    const int iterations = 500;
    const ScoreWeights weights;
    for (int i = 0; i < iterations && g.ok(); ++i) {
        const testsupport::RankingCase rc = testsupport::random_ranking_case(rng);
        const BaselineStats stats = compute_baseline_stats(rc.baseline_runs);
        const Topology topo = testsupport::tier_only_topology(rc.tiers);
        testsupport::FixedCategorizer cats(rc.categories);
        const CausalRanking got =
            rank_causes(rc.log, rc.findings, stats, topo, cats, "flow", weights);
        const testsupport::OracleRanking want = testsupport::oracle_rank_causes(
            rc.log, rc.findings, rc.baseline_runs, rc.tiers, rc.categories, weights);

        const std::string at = " at iteration " + std::to_string(i);
        g.expect(got.inconclusive == want.inconclusive, "inconclusive flag differs" + at);
        if (got.causes.size() != want.causes.size()) {
            g.expect(false, "cause count differs" + at);
            break;
        }
        for (std::size_t k = 0; k < got.causes.size(); ++k) {
            const bool same = got.causes[k].rank == static_cast<int>(k) + 1 &&
                              got.causes[k].record == want.causes[k].record &&
                              got.causes[k].category == want.causes[k].category &&
                              got.causes[k].score.score == want.causes[k].score &&
                              got.causes[k].score.f_status == want.causes[k].f_status;
            if (!same) {
                g.expect(false, "rank " + std::to_string(k + 1) + " differs" + at);
                break;
            }
        }
    }
    g.detail << iterations << " random logs: orderings, tie-breaks, and scores "
             << "bit-identical to the brute-force sorter";
    return g;
}

// ---- c05: planted-cause attribution precision ----

Gate check_planted_attribution() {
    Gate g;
    SeededStream rng(505);
    DefaultPolicy policy;
    DefaultErrorScreenClassifier screen_classifier;
    KeywordCategorizer keyword_categorizer;

    const int scenarios = 200;
    int failing = 0;
    std::vector<int> oracle_ranks;
    std::vector<int> keyword_ranks;
    for (int i = 0; i < scenarios; ++i) {
        const testsupport::PlantedScenario ps = testsupport::random_planted_scenario(rng);
        std::vector<RunSample> samples;
        for (int b = 0; b < 3; ++b) {
            RunResult run =
                run_flow(ps.topo, ps.flow, policy, ps.baseline_headers, rng.next_u64());
            samples.push_back(RunSample{run.passed, std::move(run.merged_log)});
        }
        const RunResult chaos =
            run_flow(ps.topo, ps.flow, policy, ps.chaos_headers, rng.next_u64());
        if (chaos.passed) {
            continue;  // nothing to attribute
        }
        ++failing;
        const BaselineStats stats = compute_baseline_stats(samples);
        OracleCategorizer oracle_categorizer(ps.topo);

        const ErrorDetection tagged =
            detect_errors(chaos.transitions, chaos.screens_mosaic, &screen_classifier);
        const CausalRanking with_tags =
            rank_causes(chaos.merged_log, tagged.findings, stats, ps.topo,
                        oracle_categorizer, ps.flow.flow_id);
        oracle_ranks.push_back(rank_of(with_tags, ps.planted));

        const ErrorDetection untagged =
            detect_errors(chaos.transitions, chaos.screens_mosaic, nullptr);
        const CausalRanking with_keywords =
            rank_causes(chaos.merged_log, untagged.findings, stats, ps.topo,
                        keyword_categorizer, ps.flow.flow_id);
        keyword_ranks.push_back(rank_of(with_keywords, ps.planted));
    }

    g.expect(failing == scenarios,
             std::to_string(scenarios - failing) + " planted scenarios did not fail");
    const double p1 = precision_at_k(oracle_ranks, 1);
    const double p5 = precision_at_k(oracle_ranks, 5);
    const double keyword_p5 = precision_at_k(keyword_ranks, 5);
    g.expect(p1 == testsupport::oracle_precision_at_k(oracle_ranks, 1) &&
                 p5 == testsupport::oracle_precision_at_k(oracle_ranks, 5) &&
                 keyword_p5 == testsupport::oracle_precision_at_k(keyword_ranks, 5),
             "precision op disagrees with the reference count");
    g.expect(p1 >= 0.90, "tagged-category precision@1 " + fmt(p1) + " < 0.90");
    g.expect(p5 >= 0.95, "tagged-category precision@5 " + fmt(p5) + " < 0.95");
    g.expect(keyword_p5 >= 0.80, "keyword precision@5 " + fmt(keyword_p5) + " < 0.80");
    g.detail << failing << " failing planted scenarios: tagged categories p@1="
             << fmt(p1) << " (>=0.90), p@5=" << fmt(p5) << " (>=0.95); keyword fallback "
             << "p@5=" << fmt(keyword_p5) << " (>=0.80)";
    return g;
}

// ---- c06: pass-rate trend across fault tier targets ----

Gate check_tier_sweep() {
    Gate g;
    const Topology planted = plant_violation(ride_city(), kPricingEdge);
    const FlowDefinition& flow = core_trip();
    DefaultPolicy policy;

    const int per_tier = 100;
    const int tiers[] = {5, 4, 3, 2};
    double rates[4] = {};
    int baseline_passes = 0;
    for (int t = 0; t < 4; ++t) {
        const HavocHeaders chaos_headers = testsupport::make_headers(
            {"abort(503);tier>=" + std::to_string(tiers[t]) + ";all"}, "tier-sweep");
        const HavocHeaders baseline_headers = testsupport::make_headers({}, "tier-sweep");
        int passes = 0;
        for (int i = 0; i < per_tier; ++i) {
            const std::uint64_t seed = derive_seed(606, t * per_tier + i);
            if (run_flow(planted, flow, policy, baseline_headers, seed).passed) {
                ++baseline_passes;
            }
            if (run_flow(planted, flow, policy, chaos_headers, seed).passed) {
                ++passes;
            }
        }
        rates[t] = static_cast<double>(passes) / per_tier;
    }

    g.expect(baseline_passes == 4 * per_tier, "a control run failed without faults");
    g.expect(rates[0] == 1.0, "tier>=5 pass rate " + fmt(rates[0]) + " != 1.0");
    g.expect(rates[1] == 1.0, "tier>=4 pass rate " + fmt(rates[1]) + " != 1.0");
    g.expect(rates[2] == 1.0, "tier>=3 pass rate " + fmt(rates[2]) + " != 1.0");
    g.expect(rates[3] < 1.0, "tier>=2 pass rate " + fmt(rates[3]) + " not < 1.0");
    g.expect(rates[0] >= rates[1] && rates[1] >= rates[2] && rates[2] >= rates[3],
             "pass rates not monotone non-increasing");
    g.detail << per_tier << " paired runs per target on the planted tier-2 violation: "
             << "pass rates " << fmt(rates[0], 2) << " / " << fmt(rates[1], 2) << " / "
             << fmt(rates[2], 2) << " / " << fmt(rates[3], 2)
             << " for abort targets tier>=5/4/3/2";
    return g;
}

// ---- c07: latency ordering across tier targets ----

Gate check_latency_ordering() {
    Gate g;
    const Topology& topo = ride_city();
    const FlowDefinition& flow = core_trip();
    DefaultPolicy policy;

    const int per_batch = 100;
    const std::vector<std::optional<int>> batches = {std::nullopt, 5, 3, 2};
    std::vector<double> p50(batches.size());
    std::vector<std::string> names;
    for (std::size_t b = 0; b < batches.size(); ++b) {
        std::vector<std::string> faults;
        if (batches[b]) {
            faults.push_back("latency(2000);tier>=" + std::to_string(*batches[b]) + ";all");
        }
        names.push_back(batches[b] ? "T" + std::to_string(*batches[b]) : "baseline");
        const HavocHeaders headers = testsupport::make_headers(faults, "latency-sweep");
        std::vector<double> durations;
        int passes = 0;
        for (int i = 0; i < per_batch; ++i) {
            const RunResult run = run_flow(topo, flow, policy, headers,
                                           derive_seed(707, b * per_batch + i));
            durations.push_back(static_cast<double>(run.duration_ms));
            passes += run.passed ? 1 : 0;
        }
        g.expect(passes == per_batch,
                 names.back() + ": " + std::to_string(per_batch - passes) +
                     " runs failed under pure latency");
        p50[b] = percentile_nearest_rank(durations, 0.5);
        g.expect(p50[b] == testsupport::oracle_percentile(durations, 1, 2),
                 names.back() + ": p50 disagrees with the sort oracle");
        g.expect(percentile_nearest_rank(durations, 0.95) ==
                     testsupport::oracle_percentile(durations, 19, 20),
                 names.back() + ": p95 disagrees with the sort oracle");
    }

    g.expect(p50[0] <= p50[1],
             "p50(baseline)=" + fmt(p50[0], 0) + " > p50(T5)=" + fmt(p50[1], 0));
    g.expect(p50[2] < p50[3],
             "p50(T3)=" + fmt(p50[2], 0) + " !< p50(T2)=" + fmt(p50[3], 0));
    g.detail << per_batch << " runs per batch, 2000ms injected latency: virtual-time p50 "
             << fmt(p50[0], 0) << " (none) <= " << fmt(p50[1], 0) << " (tier>=5), "
             << fmt(p50[2], 0) << " (tier>=3) < " << fmt(p50[3], 0)
             << " (tier>=2); percentiles match the sort oracle";
    return g;
}

// ---- c08: action precision of the default policy ----

Gate check_action_precision() {
    Gate g;
    const Topology& topo = ride_city();
    const FlowDefinition& flow = core_trip();
    DefaultPolicy policy;
    const int seeds = 20;

    std::vector<DecisionRecord> clean;
    std::vector<DecisionRecord> faulted;
    const HavocHeaders clean_headers = testsupport::make_headers({}, "precision");
    const HavocHeaders slow_headers =
        testsupport::make_headers({"latency(2000);tier>=2;all"}, "precision");
    int clean_passes = 0;
    for (int i = 0; i < seeds; ++i) {
        RunResult a = run_flow(topo, flow, policy, clean_headers, derive_seed(808, i));
        clean_passes += a.passed ? 1 : 0;
        clean.insert(clean.end(), a.decisions.begin(), a.decisions.end());
        RunResult b = run_flow(topo, flow, policy, slow_headers, derive_seed(808, i));
        faulted.insert(faulted.end(), b.decisions.begin(), b.decisions.end());
    }

    const double clean_p1 = decision_precision_at_k(clean, 1);
    const double faulted_p1 = decision_precision_at_k(faulted, 1);
    g.expect(clean_passes == seeds, "a fault-free run failed");
    g.expect(!clean.empty() && !faulted.empty(), "no decisions recorded");
    g.expect(clean_p1 == 1.0, "fault-free precision@1 " + fmt(clean_p1) + " != 1.0");
    g.expect(faulted_p1 <= clean_p1,
             "faulted precision@1 " + fmt(faulted_p1) + " exceeds fault-free");
    g.detail << seeds << " seeds per arm: fault-free action precision@1="
             << fmt(clean_p1, 2) << " (" << clean.size() << " decisions); tier>=2 "
             << "latency faults precision@1=" << fmt(faulted_p1, 2) << " ("
             << faulted.size() << " decisions), degradation direction preserved";
    return g;
}

// ---- c09: assertion confusion fixture ----

class ForcedErrorClassifier : public AssertionClassifier {
public:
    explicit ForcedErrorClassifier(int forced_call) : forced_(forced_call) {}

    std::optional<bool> classify(const Assertion& assertion,
                                 const std::vector<ScreenState>& screens) override {
        bool truth = false;
        for (const ScreenState& s : screens) {
            const ElementState* e = s.find(assertion.predicate.elements.front());
            if (e != nullptr && e->phase == ElementPhase::present) {
                truth = true;
            }
        }
        const bool flip = calls_ == forced_;
        ++calls_;
        return flip ? !truth : truth;
    }

private:
    int forced_;
    int calls_ = 0;
};

Gate check_confusion_fixture() {
    Gate g;
    Assertion assertion;
    assertion.prompt = "Is the confirmation panel visible?";
    assertion.predicate = {PredicateKind::all_present, {"panel"}};

    ScreenState with_panel;
    with_panel.screen_id = "main";
    ElementState panel;
    panel.element_id = "panel";
    with_panel.elements = {panel};
    const std::vector<ScreenState> positive = {with_panel};
    const std::vector<ScreenState> negative = {};

    const int positives = 3'000;
    ForcedErrorClassifier classifier(/*forced_call=*/1'234);
    ConfusionMatrix m;
    for (int i = 0; i < positives; ++i) {
        const AssertionOutcome o = evaluate_assertion(classifier, assertion, positive);
        g.expect(o.ground_truth, "positive fixture lost its ground truth");
        g.expect(!o.degraded_mode, "classifier unexpectedly abstained");
        m.add(o.ground_truth, o.answer);
    }
    const AssertionOutcome neg = evaluate_assertion(classifier, assertion, negative);
    g.expect(!neg.ground_truth && !neg.answer, "negative fixture misclassified");
    m.add(neg.ground_truth, neg.answer);

    g.expect(m.counts[1][1] == positives - 1 && m.counts[1][0] == 1 &&
                 m.counts[0][0] == 1 && m.counts[0][1] == 0,
             "raw counts off");
    const auto n = m.row_normalized();
    g.expect(n[1][1] == 2999.0 / 3000.0, "true-positive rate not exactly 2999/3000");
    g.expect(n[1][0] == 1.0 / 3000.0, "false-negative rate not exactly 1/3000");
    g.expect(n[0][0] == 1.0 && n[0][1] == 0.0, "negative row not exactly [1, 0]");
    g.expect(fmt(n[1][1], 5) == "0.99967" && fmt(n[1][0], 5) == "0.00033" &&
                 fmt(n[0][1], 5) == "0.00000" && fmt(n[0][0], 5) == "1.00000",
             "5-decimal rendering mismatch");
    g.detail << "1 forced error in " << positives << " positive assertions: "
             << "[[" << fmt(n[1][1], 5) << ", " << fmt(n[1][0], 5) << "], ["
             << fmt(n[0][1], 5) << ", " << fmt(n[0][0], 5) << "]] "
             << "(rows: truth positive/negative; cols: correct side first)";
    return g;
}

// ---- c10: adversarial policies terminate ----

class PokePolicy : public ActionPolicy {
public:
    PolicyDecision decide(const ScreenState&, const PolicyContext&) override {
        return {{"poke"}, "adversarial loop"};
    }
};

Gate check_loop_termination() {
    Gate g;
    PokePolicy policy;
    const std::vector<std::pair<const Topology*, const FlowDefinition*>> combos = {
        {&ride_min(), &core_trip()},
        {&ride_city(), &core_trip()},
        {&ride_city(), &eats_order()},
    };
    const HavocHeaders headers = testsupport::make_headers({}, "loop");
    const int seeds = 10;
    int runs = 0;
    int max_actions_seen = 0;
    std::int64_t max_duration = 0;
    for (const auto& [topo, flow] : combos) {
        for (int i = 0; i < seeds; ++i) {
            const RunResult r = run_flow(*topo, *flow, policy, headers,
                                         derive_seed(1010, runs));
            ++runs;
            g.expect(!r.passed && r.reason == FailReason::loop_abort,
                     flow->flow_id + " run ended " + r.verdict_text() +
                         " instead of fail(loop_abort)");
            g.expect(r.action_count <= flow->max_actions, "action budget exceeded");
            g.expect(r.duration_ms <= flow->overall_timeout_ms,
                     "virtual time exceeded the flow timeout");
            max_actions_seen = std::max(max_actions_seen, r.action_count);
            max_duration = std::max(max_duration, r.duration_ms);
        }
    }
    g.detail << runs << " adversarial runs across every shipped flow: all "
             << "fail(loop_abort), worst case " << max_actions_seen
             << " actions and " << max_duration << "ms virtual time";
    return g;
}

// ---- c11: baseline comparison semantics ----

Gate check_baseline_comparison() {
    Gate g;
    auto verdict = [](bool chaos_passed, bool baseline_passed) {
        return compare_with_baseline(RunSummary{"f", chaos_passed, false},
                                     RunSummary{"f", baseline_passed, false});
    };
    g.expect(verdict(false, true) == BaselineVerdict::resilience_risk,
             "fail/pass did not yield resilience_risk");
    g.expect(verdict(false, false) == BaselineVerdict::environmental,
             "fail/fail did not yield environmental");
    g.expect(verdict(true, true) == BaselineVerdict::no_finding,
             "pass/pass did not yield no_finding");

    DefaultPolicy policy;
    const HavocHeaders quiet = testsupport::make_headers({}, "verdicts");

    // Live fixture 1: a planted violation plus a targeted abort fails only
    // the chaos arm.
    const Topology planted = plant_violation(ride_min(), kPricingEdge);
    const HavocHeaders abort_pricing =
        testsupport::make_headers({"abort(503);ep=pricing:/pricing/quote;all"}, "verdicts");
    const RunResult risk_base = run_flow(planted, core_trip(), policy, quiet, 11);
    const RunResult risk_chaos = run_flow(planted, core_trip(), policy, abort_pricing, 11);
    g.expect(risk_base.passed && !risk_chaos.passed, "risk fixture arms wrong");
    g.expect(compare_with_baseline(
                 RunSummary{"core-trip", risk_chaos.passed, false},
                 RunSummary{"core-trip", risk_base.passed, false}) ==
                 BaselineVerdict::resilience_risk,
             "live fail/pass verdict wrong");

    // Live fixture 2: an always-failing critical dependency breaks both arms
    // with no faults injected anywhere.
    const Topology broken = load_topology(R"({
      "name": "env-broken",
      "services": [
        {"name": "front", "tier": 0, "base_latency_ms": 5,
         "endpoints": [{"path": "/front/main"}]},
        {"name": "core", "tier": 1, "base_latency_ms": 4,
         "endpoints": [{"path": "/core/work", "baseline_failure_weight": 1.0}]}
      ],
      "edges": [
        {"caller": "front", "stage": 0, "callee": "core", "endpoint": "/core/work",
         "timeout_budget_ms": 1000}
      ],
      "entry_points": {"env-flow": {"service": "front", "endpoint": "/front/main"}}
    })");
    FlowDefinition env_flow;
    env_flow.flow_id = "env-flow";
    StepSpec step;
    step.goal = "load the landing panel";
    step.screen_id = "main";
    step.elements = {"panel"};
    step.primary_action = {"tap_go", "panel"};
    step.optimal_action_id = "tap_go";
    env_flow.steps.push_back(step);
    env_flow.end_state_assertion.prompt = "Did the landing panel render?";
    env_flow.end_state_assertion.predicate = {PredicateKind::all_present, {"panel"}};
    validate_flow(env_flow);

    const RunResult env_base = run_flow(broken, env_flow, policy, quiet, 3);
    const RunResult env_chaos = run_flow(broken, env_flow, policy, quiet, 4);
    g.expect(!env_base.passed && !env_chaos.passed, "environmental fixture arms wrong");
    for (const RpcRecord& r : env_chaos.merged_log) {
        g.expect(!r.injected, "environmental fixture saw an injected fault");
    }
    g.expect(compare_with_baseline(RunSummary{"env-flow", env_chaos.passed, false},
                                   RunSummary{"env-flow", env_base.passed, false}) ==
                 BaselineVerdict::environmental,
             "live fail/fail verdict wrong");

    // Live fixture 3: both arms healthy.
    const RunResult ok_base = run_flow(ride_min(), core_trip(), policy, quiet, 21);
    const RunResult ok_chaos = run_flow(ride_min(), core_trip(), policy, quiet, 22);
    g.expect(ok_base.passed && ok_chaos.passed, "healthy fixture arms wrong");
    g.expect(compare_with_baseline(RunSummary{"core-trip", ok_chaos.passed, false},
                                   RunSummary{"core-trip", ok_base.passed, false}) ==
                 BaselineVerdict::no_finding,
             "live pass/pass verdict wrong");

    g.detail << "fail/pass -> resilience_risk, fail/fail -> environmental, "
             << "pass/pass -> no_finding, on both summary triples and live runs";
    return g;
}

// ---- c12: replay determinism of the demo config ----

Gate check_replay_determinism() {
    Gate g;
    const HarnessConfig cfg = load_config_file(data_path("configs/demo.json"));
    g.expect(scenario_count(cfg) == 6, "demo config no longer has 6 scenarios");

    ScratchDir first("replay-a");
    ScratchDir second("replay-b");
    const EvalReport a = summarize_outcomes(run_config(cfg, first.path.string(), true));
    const EvalReport b = summarize_outcomes(run_config(cfg, second.path.string(), true));

    g.expect(a.pairs == 6 && b.pairs == 6, "unexpected scenario count");
    g.expect(a.digests == b.digests, "archive digests differ between executions");
    const EvalReport from_disk = evaluate_archives(first.path.string());
    g.expect(from_disk.digests == a.digests, "digests on disk differ from in-memory");
    g.detail << "demo config executed twice (" << a.pairs << " scenario pairs, "
             << "worker_count " << cfg.worker_count
             << "): archive digest vectors identical, disk agrees with memory";
    return g;
}

struct Criterion {
    const char* id;
    const char* label;
    std::function<Gate()> run;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {"c01", "tenancy-isolation", check_tenancy_isolation},
        {"c02", "header-codec-roundtrip", check_header_codec},
        {"c03", "scoring-grid", check_scoring_grid},
        {"c04", "ranking-vs-oracle", check_ranking_vs_oracle},
        {"c05", "planted-cause-attribution", check_planted_attribution},
        {"c06", "tier-sweep-pass-rates", check_tier_sweep},
        {"c07", "latency-percentile-ordering", check_latency_ordering},
        {"c08", "action-precision", check_action_precision},
        {"c09", "assertion-confusion-fixture", check_confusion_fixture},
        {"c10", "loop-termination", check_loop_termination},
        {"c11", "baseline-comparison", check_baseline_comparison},
        {"c12", "replay-determinism", check_replay_determinism},
    };

    int failed = 0;
    for (const Criterion& c : criteria) {
        Gate g;
        try {
            g = c.run();
        } catch (const std::exception& e) {
            g.expect(false, std::string("unhandled error: ") + e.what());
        }
        if (!g.ok()) {
            ++failed;
        }
        std::cout << (g.ok() ? "PASS" : "FAIL") << " " << c.id << " " << c.label
                  << " : " << g.render() << "\n";
    }
    if (failed != 0) {
        std::cout << failed << " of " << criteria.size() << " criteria failed\n";
        return 1;
    }
    std::cout << "all " << criteria.size() << " criteria passed\n";
    return 0;
}
