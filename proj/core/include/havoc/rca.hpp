// Root-cause analysis over run logs: error-screen detection, baseline
// failure statistics, causal scoring of backend RPCs, ranking, baseline
// comparison, and ticket rendering.
//
// Scoring formula (fixed evaluation order, so results are recomputable
// bit for bit):
//   score = f_status * (1 - normal_failure_rate) * f_tier * f_category
// with defaults
//   f_status:   5xx/timeout 1.0, 4xx 0.5, 2xx 0.2
//   f_tier:     tier 0..5 -> 1.0, 0.9, 0.7, 0.4, 0.1, 0.1
//   f_category: direct 3.0, indirect 2.0, supporting 1.2, unrelated 0.3
//
// CRITICAL INVARIANTS
//  - normal_failure_rate is Laplace smoothed: (failing + 1) / (total + 2);
//    a pattern never seen in passing baseline runs gets exactly 0.5.
//  - Only PASSING baseline runs contribute to baseline statistics.
//  - Candidates are requests started at or before the first error finding;
//    failures explained by a failed child RPC are dropped (symptom chains
//    must not outrank their root cause).
//  - A resilience_risk verdict requires chaos failure AND baseline pass.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "havoc/common.hpp"
#include "havoc/crawler.hpp"
#include "havoc/simmesh.hpp"
#include "havoc/topology.hpp"

namespace havoc {

// ---- Error detection ----

// Case-insensitive patterns scanned over each screen's text.
const std::vector<std::string>& error_text_patterns();

enum class FindingSource : std::uint8_t { regex, classifier };

struct ErrorFinding {
    std::int64_t at_ms = 0;
    std::string screen_id;
    FindingSource source = FindingSource::regex;
    std::string detail;  // matched pattern or classifier note

    bool operator==(const ErrorFinding&) const = default;
};

// Flags screens that show an error without error text (second detection
// phase). The default implementation flags any screen with a missing
// element.
class ErrorScreenClassifier {
public:
    virtual ~ErrorScreenClassifier() = default;
    virtual std::optional<std::string> flag(const ScreenState& screen) = 0;
};

class DefaultErrorScreenClassifier : public ErrorScreenClassifier {
public:
    std::optional<std::string> flag(const ScreenState& screen) override;
};

struct ErrorDetection {
    std::vector<ErrorFinding> findings;  // ascending at_ms
    bool degraded_mode = false;          // classifier unavailable; regex only
};

// Phase 1: regex scan of every screen. Phase 2: the classifier examines only
// screens with no regex hit. Pass nullptr to run regex-only (degraded).
ErrorDetection detect_errors(const std::vector<ScreenTransition>& transitions,
                             const std::vector<ScreenState>& screens,
                             ErrorScreenClassifier* classifier);

// ---- Baseline statistics ----

struct RunSample {
    bool passed = false;
    std::vector<RpcRecord> log;
};

struct PatternStats {
    std::int64_t total = 0;
    std::int64_t failing = 0;
};

struct BaselineStats {
    // (callee, endpoint) -> occurrence counts in passing baseline runs.
    std::map<std::pair<std::string, std::string>, PatternStats> patterns;
    bool low_confidence = false;  // no passing baseline runs contributed

    // Laplace-smoothed failure rate; 0.5 for unseen patterns.
    double normal_failure_rate(const std::string& callee,
                               const std::string& endpoint) const;
};

BaselineStats compute_baseline_stats(const std::vector<RunSample>& baseline_runs);

// ---- Categorization ----

struct CategoryResult {
    RelevanceCategory category = RelevanceCategory::supporting;
    bool degraded = false;  // categorizer fell back
};

class EndpointCategorizer {
public:
    virtual ~EndpointCategorizer() = default;
    virtual CategoryResult categorize(const std::string& callee,
                                      const std::string& endpoint,
                                      const std::string& flow_id) = 0;
};

// Reads relevance_tags straight from the topology (ground truth). Untagged
// endpoints fall back to keyword rules.
class OracleCategorizer : public EndpointCategorizer {
public:
    explicit OracleCategorizer(const Topology& topo) : topo_(topo) {}
    CategoryResult categorize(const std::string& callee, const std::string& endpoint,
                              const std::string& flow_id) override;

private:
    const Topology& topo_;
};

// Keyword rules over path tokens, used when no ground truth is available:
// flow-id token -> direct; cosmetic vocabulary -> unrelated; shared-infra
// vocabulary -> supporting; anything else -> indirect.
class KeywordCategorizer : public EndpointCategorizer {
public:
    CategoryResult categorize(const std::string& callee, const std::string& endpoint,
                              const std::string& flow_id) override;
};

RelevanceCategory keyword_categorize(const std::string& endpoint,
                                     const std::string& flow_id);

// ---- Scoring and ranking ----

enum class StatusClass : std::uint8_t { s2xx, s4xx, s5xx };

StatusClass status_class(const RpcRecord& r);
std::string to_string(StatusClass c);

struct ScoreWeights {
    double f_status_2xx = 0.2;
    double f_status_4xx = 0.5;
    double f_status_5xx = 1.0;
    double f_tier[kMaxTier + 1] = {1.0, 0.9, 0.7, 0.4, 0.1, 0.1};
    double f_category_direct = 3.0;
    double f_category_indirect = 2.0;
    double f_category_supporting = 1.2;
    double f_category_unrelated = 0.3;

    double f_status(StatusClass c) const;
    double f_cat(RelevanceCategory c) const;

    std::string to_json() const;
    static ScoreWeights from_json(const std::string& text);
};

struct ScoreBreakdown {
    double score = 0.0;
    double f_status = 0.0;
    double one_minus_nfr = 0.0;
    double f_tier = 0.0;
    double f_category = 0.0;
};

// Scores one request. Unknown callees score at the outermost tier.
ScoreBreakdown score_request(const RpcRecord& record, const BaselineStats& stats,
                             TierLevel callee_tier, RelevanceCategory category,
                             const ScoreWeights& weights);

struct RankedCause {
    int rank = 0;  // 1-based
    RpcRecord record;
    RelevanceCategory category = RelevanceCategory::supporting;
    ScoreBreakdown score;
};

struct CausalRanking {
    std::vector<RankedCause> causes;
    bool inconclusive = false;        // no error findings to anchor the window
    bool categorizer_degraded = false;
};

// Candidate window, propagation filter, dedup by (callee, endpoint, status
// class) keeping the highest-scoring earliest occurrence, then ordering by
// (score desc, f_status desc, start_ms asc, callee, endpoint, status).
CausalRanking rank_causes(const std::vector<RpcRecord>& log,
                          const std::vector<ErrorFinding>& findings,
                          const BaselineStats& stats, const Topology& topo,
                          EndpointCategorizer& categorizer, const std::string& flow_id,
                          const ScoreWeights& weights = {});

// One ranking entry per line, self-describing JSON.
std::string ranking_to_lines(const CausalRanking& ranking);
CausalRanking ranking_from_lines(const std::string& text);

// ---- Baseline comparison ----

enum class BaselineVerdict : std::uint8_t {
    resilience_risk,  // chaos failed, baseline passed
    environmental,    // both failed: not caused by injected faults
    no_finding,       // chaos passed
    inconclusive,     // baseline itself errored
};

std::string to_string(BaselineVerdict v);

struct RunSummary {
    std::string flow_id;
    bool passed = false;
    bool errored = false;  // run could not be executed at all
};

// Throws ValidationError when the two runs belong to different flows.
BaselineVerdict compare_with_baseline(const RunSummary& chaos_run,
                                      const RunSummary& baseline_run);

// ---- Tickets ----

struct TicketContext {
    std::string run_id;
    std::string flow_id;
    std::string chaos_verdict;     // e.g. "fail(end_state_not_reached)"
    std::string baseline_verdict;  // e.g. "pass"
    BaselineVerdict comparison = BaselineVerdict::inconclusive;
    CausalRanking ranking;
    std::vector<ErrorFinding> findings;
    std::vector<ScreenTransition> transitions;
    ScoreWeights weights;
    std::vector<std::string> notes;
};

// Renders the markdown ticket. Enforces that resilience_risk is only
// claimed for (chaos fail, baseline pass).
std::string emit_ticket(const TicketContext& ctx);

}  // namespace havoc
