// Scenario harness: expands a config into a deterministic scenario grid,
// runs paired (baseline, chaos) flow executions, performs root-cause
// analysis on failures, writes append-only archives, and aggregates
// metrics across archives.
//
// CRITICAL INVARIANTS
//  - The scenario grid is the cross product topologies x flows x fault
//    templates x repeats, in that nesting order; scenario seeds derive
//    from the master seed and the scenario index only. Counting scenarios
//    never loads any referenced file.
//  - Baseline and chaos runs of a pair share one scenario seed; they
//    differ only in the injected fault set.
//  - Archive digests cover only replay-stable bytes (logs, screens,
//    ranking, verdicts). run_id and wall-clock metadata stay out, so
//    re-running a config reproduces every digest.
//  - precision_at_k is non-decreasing in k; percentiles use the
//    nearest-rank method; confusion matrices row-normalize over ground
//    truth.
#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "havoc/common.hpp"
#include "havoc/crawler.hpp"
#include "havoc/rca.hpp"
#include "havoc/simmesh.hpp"
#include "havoc/topology.hpp"

namespace havoc {

// ---- Configuration ----

struct FaultTemplate {
    std::string name;
    std::vector<std::string> faults;  // header grammar, validated at load

    bool operator==(const FaultTemplate&) const = default;
};

// Requests a dependency violation to be planted into a topology before
// runs: the named declared-non_critical edge is flipped to actually
// critical. `topology` matches the topology file stem, or "*" for all.
struct PlantSpec {
    std::string topology;
    std::string caller;
    std::string callee;
    std::string endpoint;

    bool operator==(const PlantSpec&) const = default;
};

enum class ClassifierMode : std::uint8_t { oracle, degraded, external };

std::string to_string(ClassifierMode m);
ClassifierMode classifier_mode_from_string(const std::string& s);

struct HarnessConfig {
    std::vector<std::string> topologies;  // file paths
    std::vector<std::string> flows;       // file paths
    std::vector<FaultTemplate> fault_templates;
    std::uint64_t master_seed = 1;
    int repeat_count = 1;
    int worker_count = 1;
    ClassifierMode classifier_mode = ClassifierMode::oracle;
    std::string classifier_url;  // external mode; HAVOC_CLASSIFIER_URL overrides
    std::string policy_url;      // non-empty: actions come from /v1/decide

    std::vector<PlantSpec> plants;

    bool operator==(const HarnessConfig&) const = default;
};

// Relative paths inside the config resolve against the config file's
// directory.
HarnessConfig load_config(const std::string& document, const std::string& origin = "<inline>");
HarnessConfig load_config_file(const std::string& path);

// Grid size without touching any referenced file.
std::uint64_t scenario_count(const HarnessConfig& cfg);

// ---- Scenario grid ----

struct Scenario {
    std::uint64_t index = 0;  // position in the grid; seeds derive from this
    std::string label;        // filesystem-safe, unique within the config
    std::string topology_path;
    std::string flow_path;
    std::string template_name;
    std::vector<std::string> faults;
    int repeat = 0;
    std::uint64_t seed = 0;
};

std::vector<Scenario> generate_scenarios(const HarnessConfig& cfg);

// ---- Run logs on disk ----

// rpc and transition records merged into one chronological JSONL stream.
std::string run_log_to_jsonl(const RunResult& r);

struct ParsedRunLog {
    std::vector<RpcRecord> rpcs;
    std::vector<ScreenTransition> transitions;
};

ParsedRunLog run_log_from_jsonl(const std::string& text);

// ---- Pair execution and archiving ----

struct PairOutcome {
    Scenario scenario;
    std::string run_id;
    RunResult baseline;
    RunResult chaos;
    BaselineVerdict comparison = BaselineVerdict::inconclusive;
    ErrorDetection detection;        // over the chaos run's screens
    CausalRanking ranking;           // empty when the chaos run passed
    std::vector<AssertionOutcome> baseline_assertions;
    std::vector<AssertionOutcome> chaos_assertions;
    std::optional<EdgeRef> planted;  // violation planted into this topology
    std::string ticket_md;
    std::string digest;              // fnv1a-64 over replay-stable bytes
    std::string archive_dir;         // empty when archiving was disabled
};

// Runs one scenario end to end. When out_dir is non-empty the archive is
// written under <out_dir>/<scenario.label>/<run_id>/.
PairOutcome run_scenario(const HarnessConfig& cfg, const Scenario& scenario,
                         const std::string& out_dir);

// Runs every scenario on cfg.worker_count threads. Results come back in
// scenario order regardless of completion order.
std::vector<PairOutcome> run_config(const HarnessConfig& cfg, const std::string& out_dir,
                                    bool quiet = true);

// ---- Metrics ----

// Fraction of entries with 1 <= rank <= k. rank < 1 means "not found".
double precision_at_k(const std::vector<int>& true_ranks, int k);

// Fraction of decisions whose ground-truth action sits in the first k
// ranked actions.
double decision_precision_at_k(const std::vector<DecisionRecord>& decisions, int k);

// Nearest-rank percentile: sorted ascending, element ceil(q * n), 1-based.
// q in (0, 1]. Throws ValidationError on an empty sample.
double percentile_nearest_rank(std::vector<double> values, double q);

struct ConfusionMatrix {
    // counts[truth][answer], 0 = false, 1 = true.
    std::array<std::array<std::int64_t, 2>, 2> counts{};

    void add(bool truth, bool answer);
    std::int64_t total() const;
    // Rows summing to 1; an empty row stays all-zero.
    std::array<std::array<double, 2>, 2> row_normalized() const;
};

// ---- Archive evaluation ----

struct EvalReport {
    int pairs = 0;
    int baseline_passed = 0;
    int chaos_passed = 0;
    std::map<std::string, int> comparisons;  // verdict name -> count
    std::vector<int> planted_ranks;          // per failing chaos run with a plant
    std::vector<double> baseline_durations_ms;
    std::vector<double> chaos_durations_ms;
    std::vector<DecisionRecord> decisions;   // chaos-run policy decisions
    ConfusionMatrix vqa;                     // assertion answers vs ground truth
    std::vector<std::string> digests;        // scenario label -> digest, sorted

    std::string render() const;
};

// Scans <out_dir>/*/*/archive.json.
EvalReport evaluate_archives(const std::string& out_dir);
EvalReport summarize_outcomes(const std::vector<PairOutcome>& outcomes);

}  // namespace havoc
