#include "havoc/rca.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include <json.hpp>

namespace havoc {

using nlohmann::json;
using nlohmann::ordered_json;

// ---- Error detection ----

const std::vector<std::string>& error_text_patterns() {
    static const std::vector<std::string> kPatterns = {
        "error", "something went wrong", "try again", "unable to", "failed",
    };
    return kPatterns;
}

std::optional<std::string> DefaultErrorScreenClassifier::flag(const ScreenState& screen) {
    for (const ElementState& el : screen.elements) {
        if (el.phase == ElementPhase::missing) {
            return "missing ui component: " + el.element_id;
        }
    }
    return std::nullopt;
}

ErrorDetection detect_errors(const std::vector<ScreenTransition>& transitions,
                             const std::vector<ScreenState>& screens,
                             ErrorScreenClassifier* classifier) {
    (void)transitions;  // screens carry their own timestamps
    ErrorDetection out;
    out.degraded_mode = classifier == nullptr;
    for (const ScreenState& screen : screens) {
        const std::string text = to_lower(screen_text(screen));
        bool hit = false;
        for (const std::string& pattern : error_text_patterns()) {
            if (text.find(pattern) != std::string::npos) {
                ErrorFinding f;
                f.at_ms = screen.rendered_at_ms;
                f.screen_id = screen.screen_id;
                f.source = FindingSource::regex;
                f.detail = pattern;
                out.findings.push_back(std::move(f));
                hit = true;
                break;
            }
        }
        if (hit || classifier == nullptr) {
            continue;
        }
        if (auto note = classifier->flag(screen)) {
            ErrorFinding f;
            f.at_ms = screen.rendered_at_ms;
            f.screen_id = screen.screen_id;
            f.source = FindingSource::classifier;
            f.detail = *note;
            out.findings.push_back(std::move(f));
        }
    }
    std::stable_sort(out.findings.begin(), out.findings.end(),
                     [](const ErrorFinding& a, const ErrorFinding& b) {
                         return a.at_ms < b.at_ms;
                     });
    return out;
}

// ---- Baseline statistics ----

double BaselineStats::normal_failure_rate(const std::string& callee,
                                          const std::string& endpoint) const {
    auto it = patterns.find({callee, endpoint});
    const std::int64_t total = it == patterns.end() ? 0 : it->second.total;
    const std::int64_t failing = it == patterns.end() ? 0 : it->second.failing;
    // Laplace smoothing; the empty pattern lands on exactly 0.5.
    return static_cast<double>(failing + 1) / static_cast<double>(total + 2);
}

BaselineStats compute_baseline_stats(const std::vector<RunSample>& baseline_runs) {
    BaselineStats stats;
    std::size_t passing = 0;
    for (const RunSample& run : baseline_runs) {
        if (!run.passed) {
            continue;  // only passing runs define "normal"
        }
        ++passing;
        for (const RpcRecord& r : run.log) {
            PatternStats& p = stats.patterns[{r.callee, r.endpoint}];
            ++p.total;
            if (r.failed()) {
                ++p.failing;
            }
        }
    }
    stats.low_confidence = passing == 0;
    return stats;
}

// ---- Categorization ----

namespace {

const std::set<std::string>& cosmetic_tokens() {
    static const std::set<std::string> kSet = {
        "promo",   "promos", "ads",     "ad",       "banner", "banners",
        "survey",  "social", "news",    "loyalty",  "recs",   "recommend",
        "recommendations", "analytics", "feedback", "tips",   "marketing",
    };
    return kSet;
}

const std::set<std::string>& infra_tokens() {
    static const std::set<std::string> kSet = {
        "auth",    "session", "config",   "profile", "locale",  "translate",
        "i18n",    "wallet",  "receipts", "receipt", "notify",  "comms",
        "identity", "settings",
    };
    return kSet;
}

std::vector<std::string> path_tokens(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == '/' || c == '-' || c == '_') {
            if (!cur.empty()) {
                out.push_back(to_lower(cur));
                cur.clear();
            }
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) {
        out.push_back(to_lower(cur));
    }
    return out;
}

}  // namespace

RelevanceCategory keyword_categorize(const std::string& endpoint,
                                     const std::string& flow_id) {
    std::set<std::string> flow_words;
    for (const std::string& w : path_tokens(flow_id)) {
        if (w != "core" && w != "flow") {
            flow_words.insert(w);
        }
    }
    const std::vector<std::string> tokens = path_tokens(endpoint);
    for (const std::string& t : tokens) {
        if (flow_words.count(t)) {
            return RelevanceCategory::direct;
        }
    }
    for (const std::string& t : tokens) {
        if (cosmetic_tokens().count(t)) {
            return RelevanceCategory::unrelated;
        }
    }
    for (const std::string& t : tokens) {
        if (infra_tokens().count(t)) {
            return RelevanceCategory::supporting;
        }
    }
    return RelevanceCategory::indirect;
}

CategoryResult OracleCategorizer::categorize(const std::string& callee,
                                             const std::string& endpoint,
                                             const std::string& flow_id) {
    const ServiceSpec* svc = topo_.find_service(callee);
    if (svc != nullptr) {
        const EndpointSpec* ep = svc->find_endpoint(endpoint);
        if (ep != nullptr) {
            auto it = ep->relevance_tags.find(flow_id);
            if (it != ep->relevance_tags.end()) {
                return {it->second, false};
            }
        }
    }
    return {keyword_categorize(endpoint, flow_id), false};
}

CategoryResult KeywordCategorizer::categorize(const std::string& /*callee*/,
                                              const std::string& endpoint,
                                              const std::string& flow_id) {
    return {keyword_categorize(endpoint, flow_id), false};
}

// ---- Scoring and ranking ----

StatusClass status_class(const RpcRecord& r) {
    if (r.timed_out || r.status_code >= 500) {
        return StatusClass::s5xx;
    }
    if (r.status_code >= 400) {
        return StatusClass::s4xx;
    }
    return StatusClass::s2xx;
}

std::string to_string(StatusClass c) {
    switch (c) {
        case StatusClass::s2xx: return "2xx";
        case StatusClass::s4xx: return "4xx";
        case StatusClass::s5xx: return "5xx";
    }
    return "?";
}

double ScoreWeights::f_status(StatusClass c) const {
    switch (c) {
        case StatusClass::s2xx: return f_status_2xx;
        case StatusClass::s4xx: return f_status_4xx;
        case StatusClass::s5xx: return f_status_5xx;
    }
    return f_status_2xx;
}

double ScoreWeights::f_cat(RelevanceCategory c) const {
    switch (c) {
        case RelevanceCategory::direct: return f_category_direct;
        case RelevanceCategory::indirect: return f_category_indirect;
        case RelevanceCategory::supporting: return f_category_supporting;
        case RelevanceCategory::unrelated: return f_category_unrelated;
    }
    return f_category_supporting;
}

std::string ScoreWeights::to_json() const {
    ordered_json j;
    j["f_status"] = {{"2xx", f_status_2xx}, {"4xx", f_status_4xx}, {"5xx", f_status_5xx}};
    j["f_tier"] = std::vector<double>(f_tier, f_tier + kMaxTier + 1);
    j["f_category"] = {{"direct", f_category_direct},
                       {"indirect", f_category_indirect},
                       {"supporting", f_category_supporting},
                       {"unrelated", f_category_unrelated}};
    return j.dump();
}

ScoreWeights ScoreWeights::from_json(const std::string& text) {
    ScoreWeights w;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("score weights: ") + e.what());
    }
    if (j.contains("f_status")) {
        const json& s = j.at("f_status");
        if (s.contains("2xx")) w.f_status_2xx = s.at("2xx").get<double>();
        if (s.contains("4xx")) w.f_status_4xx = s.at("4xx").get<double>();
        if (s.contains("5xx")) w.f_status_5xx = s.at("5xx").get<double>();
    }
    if (j.contains("f_tier")) {
        const json& t = j.at("f_tier");
        if (!t.is_array() || t.size() != kMaxTier + 1) {
            throw ParseError("score weights: f_tier must list one weight per tier");
        }
        for (std::size_t i = 0; i < t.size(); ++i) {
            w.f_tier[i] = t[i].get<double>();
        }
    }
    if (j.contains("f_category")) {
        const json& c = j.at("f_category");
        if (c.contains("direct")) w.f_category_direct = c.at("direct").get<double>();
        if (c.contains("indirect")) w.f_category_indirect = c.at("indirect").get<double>();
        if (c.contains("supporting")) w.f_category_supporting = c.at("supporting").get<double>();
        if (c.contains("unrelated")) w.f_category_unrelated = c.at("unrelated").get<double>();
    }
    return w;
}

ScoreBreakdown score_request(const RpcRecord& record, const BaselineStats& stats,
                             TierLevel callee_tier, RelevanceCategory category,
                             const ScoreWeights& weights) {
    if (callee_tier > kMaxTier) {
        throw ValidationError("score_request: tier out of range");
    }
    ScoreBreakdown b;
    b.f_status = weights.f_status(status_class(record));
    b.one_minus_nfr = 1.0 - stats.normal_failure_rate(record.callee, record.endpoint);
    b.f_tier = weights.f_tier[callee_tier];
    b.f_category = weights.f_cat(category);
    // Fixed left-to-right order; recomputations must match bit for bit.
    b.score = b.f_status * b.one_minus_nfr * b.f_tier * b.f_category;
    return b;
}

namespace {

// True when some other record in the log is a failed child of `r`: the
// failure visibly propagated, so `r` is a symptom, not a root cause. Steps
// run serially and child spans nest inside their parent span, so matching
// on (caller == r.callee, same app, nested interval) is unambiguous.
bool has_failed_child(const RpcRecord& r, const std::vector<RpcRecord>& log,
                      std::size_t self_index) {
    for (std::size_t i = 0; i < log.size(); ++i) {
        if (i == self_index) {
            continue;
        }
        const RpcRecord& c = log[i];
        if (c.caller == r.callee && c.app_instance == r.app_instance && c.failed() &&
            c.start_ms >= r.start_ms && c.end_ms <= r.end_ms) {
            return true;
        }
    }
    return false;
}

}  // namespace

CausalRanking rank_causes(const std::vector<RpcRecord>& log,
                          const std::vector<ErrorFinding>& findings,
                          const BaselineStats& stats, const Topology& topo,
                          EndpointCategorizer& categorizer, const std::string& flow_id,
                          const ScoreWeights& weights) {
    CausalRanking out;

    std::optional<std::int64_t> cutoff;
    for (const ErrorFinding& f : findings) {
        if (!cutoff || f.at_ms < *cutoff) {
            cutoff = f.at_ms;
        }
    }
    out.inconclusive = !cutoff.has_value();

    std::vector<RankedCause> scored;
    for (std::size_t i = 0; i < log.size(); ++i) {
        const RpcRecord& r = log[i];
        if (cutoff && r.start_ms > *cutoff) {
            continue;  // started after the error surfaced
        }
        if (r.failed() && has_failed_child(r, log, i)) {
            continue;  // propagated symptom
        }
        const ServiceSpec* svc = topo.find_service(r.callee);
        const TierLevel tier = svc != nullptr ? svc->tier : kMaxTier;
        const CategoryResult cat = categorizer.categorize(r.callee, r.endpoint, flow_id);
        out.categorizer_degraded = out.categorizer_degraded || cat.degraded;

        RankedCause rc;
        rc.record = r;
        rc.category = cat.category;
        rc.score = score_request(r, stats, tier, cat.category, weights);
        scored.push_back(std::move(rc));
    }

    // Dedup by (callee, endpoint, status class): keep the highest score,
    // breaking ties toward the earliest occurrence.
    std::map<std::tuple<std::string, std::string, StatusClass>, std::size_t> best;
    std::vector<RankedCause> dedup;
    for (RankedCause& rc : scored) {
        const auto key = std::make_tuple(rc.record.callee, rc.record.endpoint,
                                         status_class(rc.record));
        auto it = best.find(key);
        if (it == best.end()) {
            best.emplace(key, dedup.size());
            dedup.push_back(std::move(rc));
            continue;
        }
        RankedCause& cur = dedup[it->second];
        const bool better = rc.score.score > cur.score.score ||
                            (rc.score.score == cur.score.score &&
                             rc.record.start_ms < cur.record.start_ms);
        if (better) {
            cur = std::move(rc);
        }
    }

    std::sort(dedup.begin(), dedup.end(), [](const RankedCause& a, const RankedCause& b) {
        if (a.score.score != b.score.score) return a.score.score > b.score.score;
        if (a.score.f_status != b.score.f_status) return a.score.f_status > b.score.f_status;
        if (a.record.start_ms != b.record.start_ms) return a.record.start_ms < b.record.start_ms;
        if (a.record.callee != b.record.callee) return a.record.callee < b.record.callee;
        if (a.record.endpoint != b.record.endpoint) return a.record.endpoint < b.record.endpoint;
        return a.record.status_text() < b.record.status_text();
    });
    for (std::size_t i = 0; i < dedup.size(); ++i) {
        dedup[i].rank = static_cast<int>(i) + 1;
    }
    out.causes = std::move(dedup);
    return out;
}

std::string ranking_to_lines(const CausalRanking& ranking) {
    std::ostringstream os;
    for (const RankedCause& rc : ranking.causes) {
        ordered_json j;
        j["rank"] = rc.rank;
        j["caller"] = rc.record.caller;
        j["callee"] = rc.record.callee;
        j["endpoint"] = rc.record.endpoint;
        if (rc.record.timed_out) {
            j["status"] = "timed_out";
        } else {
            j["status"] = rc.record.status_code;
        }
        j["start_ms"] = rc.record.start_ms;
        j["end_ms"] = rc.record.end_ms;
        j["injected"] = rc.record.injected;
        j["app"] = to_string(rc.record.app_instance);
        j["category"] = to_string(rc.category);
        j["score"] = rc.score.score;
        j["f_status"] = rc.score.f_status;
        j["one_minus_nfr"] = rc.score.one_minus_nfr;
        j["f_tier"] = rc.score.f_tier;
        j["f_category"] = rc.score.f_category;
        if (ranking.inconclusive) {
            j["inconclusive"] = true;
        }
        os << j.dump() << "\n";
    }
    return os.str();
}

CausalRanking ranking_from_lines(const std::string& text) {
    CausalRanking out;
    for (const std::string& line : split(text, '\n')) {
        if (line.empty()) {
            continue;
        }
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError(std::string("ranking line: ") + e.what());
        }
        RankedCause rc;
        rc.rank = j.at("rank").get<int>();
        rc.record.caller = j.at("caller").get<std::string>();
        rc.record.callee = j.at("callee").get<std::string>();
        rc.record.endpoint = j.at("endpoint").get<std::string>();
        const json& status = j.at("status");
        if (status.is_string()) {
            if (status.get<std::string>() != "timed_out") {
                throw ParseError("ranking line: unknown status " + status.dump());
            }
            rc.record.timed_out = true;
        } else {
            rc.record.status_code = status.get<int>();
        }
        rc.record.start_ms = j.at("start_ms").get<std::int64_t>();
        rc.record.end_ms = j.at("end_ms").get<std::int64_t>();
        rc.record.injected = j.at("injected").get<bool>();
        rc.record.app_instance = app_instance_from_string(j.at("app").get<std::string>());
        rc.category = relevance_from_string(j.at("category").get<std::string>());
        rc.score.score = j.at("score").get<double>();
        rc.score.f_status = j.at("f_status").get<double>();
        rc.score.one_minus_nfr = j.at("one_minus_nfr").get<double>();
        rc.score.f_tier = j.at("f_tier").get<double>();
        rc.score.f_category = j.at("f_category").get<double>();
        if (j.value("inconclusive", false)) {
            out.inconclusive = true;
        }
        out.causes.push_back(std::move(rc));
    }
    return out;
}

// ---- Baseline comparison ----

std::string to_string(BaselineVerdict v) {
    switch (v) {
        case BaselineVerdict::resilience_risk: return "resilience_risk";
        case BaselineVerdict::environmental: return "environmental";
        case BaselineVerdict::no_finding: return "no_finding";
        case BaselineVerdict::inconclusive: return "inconclusive";
    }
    return "?";
}

BaselineVerdict compare_with_baseline(const RunSummary& chaos_run,
                                      const RunSummary& baseline_run) {
    if (chaos_run.flow_id != baseline_run.flow_id) {
        throw ValidationError("compare_with_baseline: flow mismatch (" +
                              chaos_run.flow_id + " vs " + baseline_run.flow_id + ")");
    }
    if (baseline_run.errored) {
        return BaselineVerdict::inconclusive;
    }
    if (chaos_run.passed || chaos_run.errored) {
        return BaselineVerdict::no_finding;
    }
    return baseline_run.passed ? BaselineVerdict::resilience_risk
                               : BaselineVerdict::environmental;
}

// ---- Tickets ----

std::string emit_ticket(const TicketContext& ctx) {
    if (ctx.comparison == BaselineVerdict::resilience_risk) {
        const bool chaos_failed = ctx.chaos_verdict.rfind("fail", 0) == 0;
        const bool baseline_passed = ctx.baseline_verdict == "pass";
        if (!chaos_failed || !baseline_passed) {
            throw ValidationError(
                "emit_ticket: resilience_risk requires a failing run and a "
                "passing baseline");
        }
    }

    std::ostringstream os;
    os << "# Resilience finding: " << ctx.flow_id << "\n\n";
    os << "- run: `" << ctx.run_id << "`\n";
    os << "- flow: `" << ctx.flow_id << "`\n";
    os << "- verdict: " << ctx.chaos_verdict << "\n";
    os << "- baseline: " << ctx.baseline_verdict << "\n";
    os << "- classification: **" << to_string(ctx.comparison) << "**\n\n";

    os << "## Suspected causes\n\n";
    if (ctx.ranking.causes.empty()) {
        os << "_No candidate requests in the analysis window._\n\n";
    } else {
        os << "| rank | request | status | tier weight | category | score |\n";
        os << "|-----:|---------|--------|------------:|----------|------:|\n";
        for (const RankedCause& rc : ctx.ranking.causes) {
            if (rc.rank > 5) {
                break;
            }
            os << "| " << rc.rank << " | `" << rc.record.callee << " "
               << rc.record.endpoint << "` | " << rc.record.status_text() << " | "
               << format_double(rc.score.f_tier) << " | " << to_string(rc.category)
               << " | " << format_double(rc.score.score) << " |\n";
        }
        os << "\n";
    }
    if (ctx.ranking.inconclusive) {
        os << "_No error finding anchored the analysis window; the whole log "
              "was considered._\n\n";
    }
    if (ctx.ranking.categorizer_degraded) {
        os << "_Endpoint categorization ran in degraded mode._\n\n";
    }

    os << "## Error findings\n\n";
    if (ctx.findings.empty()) {
        os << "_None._\n\n";
    } else {
        for (const ErrorFinding& f : ctx.findings) {
            os << "- t=" << f.at_ms << "ms `" << f.screen_id << "` ("
               << (f.source == FindingSource::regex ? "text match" : "screen classifier")
               << "): " << f.detail << "\n";
        }
        os << "\n";
    }

    os << "## Flow trace\n\n";
    for (const ScreenTransition& t : ctx.transitions) {
        os << "- t=" << t.at_ms << "ms `" << t.from_screen << "` --" << t.action_taken
           << "--> `" << t.to_screen << "` (" << t.policy_reason << ")\n";
    }
    os << "\n";

    if (!ctx.notes.empty()) {
        os << "## Notes\n\n";
        for (const std::string& n : ctx.notes) {
            os << "- " << n << "\n";
        }
        os << "\n";
    }

    os << "## Scoring weights\n\n```json\n" << ctx.weights.to_json() << "\n```\n";
    return os.str();
}

}  // namespace havoc
