#include "havoc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <iostream>
#include <memory>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "havoc/external.hpp"
#include "havoc/fault.hpp"

namespace havoc {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

// ---- Configuration ----

std::string to_string(ClassifierMode m) {
    switch (m) {
        case ClassifierMode::oracle: return "oracle";
        case ClassifierMode::degraded: return "degraded";
        case ClassifierMode::external: return "external";
    }
    return "?";
}

ClassifierMode classifier_mode_from_string(const std::string& s) {
    if (s == "oracle") return ClassifierMode::oracle;
    if (s == "degraded") return ClassifierMode::degraded;
    if (s == "external") return ClassifierMode::external;
    throw ParseError("unknown classifier mode '" + s + "'");
}

namespace {

std::string path_stem(const std::string& p) { return fs::path(p).stem().string(); }

// Lowercase alphanumerics and dashes only, so labels double as directory
// names everywhere.
std::string sanitize_label_part(const std::string& s) {
    std::string out;
    for (char c : s) {
        if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) {
            out.push_back(c);
        } else if (c >= 'A' && c <= 'Z') {
            out.push_back(static_cast<char>(c - 'A' + 'a'));
        } else {
            out.push_back('-');
        }
    }
    return out;
}

std::string pad_index(std::uint64_t index, std::uint64_t total) {
    std::size_t width = 4;
    std::uint64_t probe = 10'000;
    while (total > probe) {
        ++width;
        probe *= 10;
    }
    std::string digits = std::to_string(index);
    while (digits.size() < width) {
        digits.insert(digits.begin(), '0');
    }
    return digits;
}

}  // namespace

HarnessConfig load_config(const std::string& document, const std::string& origin) {
    json doc;
    try {
        doc = json::parse(document);
    } catch (const json::exception& e) {
        throw ParseError(origin + ": " + e.what());
    }
    HarnessConfig cfg;
    try {
        cfg.topologies = doc.at("topologies").get<std::vector<std::string>>();
        cfg.flows = doc.at("flows").get<std::vector<std::string>>();
        for (const json& jt : doc.at("fault_templates")) {
            FaultTemplate t;
            t.name = jt.at("name").get<std::string>();
            for (const json& jf : jt.at("faults")) {
                t.faults.push_back(jf.get<std::string>());
            }
            cfg.fault_templates.push_back(std::move(t));
        }
        cfg.master_seed = doc.value("master_seed", std::uint64_t{1});
        cfg.repeat_count = doc.value("repeat_count", 1);
        cfg.worker_count = doc.value("worker_count", 1);
        cfg.classifier_mode =
            classifier_mode_from_string(doc.value("classifier_mode", "oracle"));
        cfg.classifier_url = doc.value("classifier_url", "");
        cfg.policy_url = doc.value("policy_url", "");
        if (doc.contains("plants")) {
            for (const json& jp : doc.at("plants")) {
                PlantSpec p;
                p.topology = jp.value("topology", "*");
                p.caller = jp.at("caller").get<std::string>();
                p.callee = jp.at("callee").get<std::string>();
                p.endpoint = jp.at("endpoint").get<std::string>();
                cfg.plants.push_back(std::move(p));
            }
        }
    } catch (const json::exception& e) {
        throw ParseError(origin + ": " + e.what());
    }

    if (cfg.repeat_count < 1) {
        throw ValidationError(origin + ": repeat_count must be >= 1");
    }
    if (cfg.worker_count < 1) {
        throw ValidationError(origin + ": worker_count must be >= 1");
    }
    std::set<std::string> template_names;
    for (const FaultTemplate& t : cfg.fault_templates) {
        if (t.name.empty()) {
            throw ValidationError(origin + ": fault template with empty name");
        }
        if (!template_names.insert(t.name).second) {
            throw ValidationError(origin + ": duplicate fault template '" + t.name + "'");
        }
        for (const std::string& f : t.faults) {
            FaultSpec::parse(f);  // throws DecodeError naming the clause
        }
    }
    if (cfg.classifier_mode == ClassifierMode::external &&
        classifier_url_from_env(cfg.classifier_url).empty()) {
        throw ValidationError(origin + ": external classifier mode needs classifier_url");
    }
    return cfg;
}

HarnessConfig load_config_file(const std::string& path) {
    HarnessConfig cfg = load_config(read_file(path), path);
    const fs::path base = fs::path(path).parent_path();
    auto resolve = [&](std::string& p) {
        if (!p.empty() && !fs::path(p).is_absolute()) {
            p = (base / p).string();
        }
    };
    for (std::string& p : cfg.topologies) resolve(p);
    for (std::string& p : cfg.flows) resolve(p);
    return cfg;
}

std::uint64_t scenario_count(const HarnessConfig& cfg) {
    return static_cast<std::uint64_t>(cfg.topologies.size()) * cfg.flows.size() *
           cfg.fault_templates.size() * static_cast<std::uint64_t>(cfg.repeat_count);
}

std::vector<Scenario> generate_scenarios(const HarnessConfig& cfg) {
    std::vector<Scenario> out;
    const std::uint64_t total = scenario_count(cfg);
    std::uint64_t index = 0;
    for (const std::string& topo : cfg.topologies) {
        for (const std::string& flow : cfg.flows) {
            for (const FaultTemplate& tpl : cfg.fault_templates) {
                for (int rep = 0; rep < cfg.repeat_count; ++rep) {
                    Scenario s;
                    s.index = index;
                    s.topology_path = topo;
                    s.flow_path = flow;
                    s.template_name = tpl.name;
                    s.faults = tpl.faults;
                    s.repeat = rep;
                    s.seed = derive_seed(cfg.master_seed, index);
                    s.label = "s" + pad_index(index, total) + "-" +
                              sanitize_label_part(path_stem(topo)) + "-" +
                              sanitize_label_part(path_stem(flow)) + "-" +
                              sanitize_label_part(tpl.name) + "-r" + std::to_string(rep);
                    out.push_back(std::move(s));
                    ++index;
                }
            }
        }
    }
    return out;
}

// ---- Run logs on disk ----

std::string run_log_to_jsonl(const RunResult& r) {
    std::ostringstream os;
    std::size_t i = 0;
    std::size_t j = 0;
    // Both inputs are already chronological; merge with rpc records first
    // on equal timestamps.
    while (i < r.merged_log.size() || j < r.transitions.size()) {
        const bool take_rpc =
            j >= r.transitions.size() ||
            (i < r.merged_log.size() && r.merged_log[i].start_ms <= r.transitions[j].at_ms);
        if (take_rpc) {
            os << rpc_to_log_line(r.merged_log[i++]) << "\n";
        } else {
            os << transition_to_log_line(r.transitions[j++]) << "\n";
        }
    }
    return os.str();
}

ParsedRunLog run_log_from_jsonl(const std::string& text) {
    ParsedRunLog out;
    for (const std::string& line : split(text, '\n')) {
        if (line.empty()) {
            continue;
        }
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError(std::string("run log line: ") + e.what());
        }
        const std::string kind = j.value("kind", "");
        if (kind == "rpc") {
            out.rpcs.push_back(rpc_from_log_line(line));
        } else if (kind == "transition") {
            out.transitions.push_back(transition_from_log_line(line));
        } else {
            throw ParseError("run log line with unknown kind '" + kind + "'");
        }
    }
    return out;
}

// ---- Pair execution ----

namespace {

std::string new_run_id() {
    static std::atomic<std::uint64_t> counter{0};
    const auto now = std::chrono::system_clock::now().time_since_epoch();
    const auto ns = std::chrono::duration_cast<std::chrono::nanoseconds>(now).count();
    std::ostringstream os;
    os << "r" << std::hex << static_cast<std::uint64_t>(ns) << "-"
       << counter.fetch_add(1);
    return os.str();
}

class AbstainingClassifier : public AssertionClassifier {
public:
    std::optional<bool> classify(const Assertion&,
                                 const std::vector<ScreenState>&) override {
        return std::nullopt;
    }
};

std::vector<AssertionOutcome> run_assertions(const FlowDefinition& flow,
                                             AssertionClassifier& classifier,
                                             const RunResult& run) {
    std::vector<AssertionOutcome> out;
    out.push_back(evaluate_assertion(classifier, flow.end_state_assertion, run.screens_mosaic));
    for (const Assertion& a : flow.mid_state_assertions) {
        out.push_back(evaluate_assertion(classifier, a, run.screens_mosaic));
    }
    return out;
}

std::string screens_to_jsonl(const std::vector<ScreenState>& screens) {
    std::ostringstream os;
    for (const ScreenState& s : screens) {
        os << screen_to_log_line(s) << "\n";
    }
    return os.str();
}

ordered_json decision_to_json(const DecisionRecord& d) {
    ordered_json j;
    j["step"] = d.step_index;
    j["ranked"] = d.ranked_actions;
    j["chosen"] = d.chosen;
    j["ground_truth"] = d.ground_truth;
    return j;
}

DecisionRecord decision_from_json(const json& j) {
    DecisionRecord d;
    d.step_index = j.at("step").get<int>();
    d.ranked_actions = j.at("ranked").get<std::vector<std::string>>();
    d.chosen = j.at("chosen").get<std::string>();
    d.ground_truth = j.at("ground_truth").get<std::string>();
    return d;
}

}  // namespace

PairOutcome run_scenario(const HarnessConfig& cfg, const Scenario& scenario,
                         const std::string& out_dir) {
    PairOutcome out;
    out.scenario = scenario;
    out.run_id = new_run_id();

    Topology topo = load_topology_file(scenario.topology_path);
    const std::string topo_stem = path_stem(scenario.topology_path);
    for (const PlantSpec& plant : cfg.plants) {
        if (plant.topology != "*" && plant.topology != topo_stem) {
            continue;
        }
        const EdgeRef edge{plant.caller, plant.callee, plant.endpoint};
        topo = plant_violation(topo, edge);
        if (!out.planted) {
            out.planted = edge;
        }
    }

    const FlowDefinition flow = load_flow_file(scenario.flow_path);

    HavocHeaders baseline_headers;
    baseline_headers.tenancy = Tenancy::test;
    baseline_headers.run_id = out.run_id + "/baseline";

    HavocHeaders chaos_headers;
    chaos_headers.tenancy = Tenancy::test;
    chaos_headers.run_id = out.run_id + "/chaos";
    chaos_headers.faults = flow.fault_configuration;
    for (const std::string& f : scenario.faults) {
        chaos_headers.faults.push_back(FaultSpec::parse(f));
    }

    std::unique_ptr<ActionPolicy> policy;
    if (cfg.policy_url.empty()) {
        policy = std::make_unique<DefaultPolicy>();
    } else {
        policy = std::make_unique<HttpActionPolicy>(cfg.policy_url);
    }
    out.baseline = run_flow(topo, flow, *policy, baseline_headers, scenario.seed);
    out.chaos = run_flow(topo, flow, *policy, chaos_headers, scenario.seed);

    // Mode-specific components.
    std::unique_ptr<AssertionClassifier> assertion_cls;
    std::unique_ptr<ErrorScreenClassifier> error_cls;
    std::unique_ptr<EndpointCategorizer> categorizer;
    const std::string url = classifier_url_from_env(cfg.classifier_url);
    switch (cfg.classifier_mode) {
        case ClassifierMode::oracle:
            assertion_cls = std::make_unique<DefaultAssertionClassifier>();
            error_cls = std::make_unique<DefaultErrorScreenClassifier>();
            categorizer = std::make_unique<OracleCategorizer>(topo);
            break;
        case ClassifierMode::degraded:
            assertion_cls = std::make_unique<AbstainingClassifier>();
            error_cls = nullptr;  // regex-only detection
            categorizer = std::make_unique<KeywordCategorizer>();
            break;
        case ClassifierMode::external:
            assertion_cls = std::make_unique<HttpAssertionClassifier>(url);
            error_cls = std::make_unique<DefaultErrorScreenClassifier>();
            categorizer = std::make_unique<HttpCategorizer>(url);
            break;
    }

    out.baseline_assertions = run_assertions(flow, *assertion_cls, out.baseline);
    out.chaos_assertions = run_assertions(flow, *assertion_cls, out.chaos);
    out.detection = detect_errors(out.chaos.transitions, out.chaos.screens_mosaic,
                                  error_cls.get());

    const BaselineStats stats =
        compute_baseline_stats({RunSample{out.baseline.passed, out.baseline.merged_log}});
    if (!out.chaos.passed) {
        out.ranking = rank_causes(out.chaos.merged_log, out.detection.findings, stats,
                                  topo, *categorizer, flow.flow_id, ScoreWeights{});
    }

    out.comparison =
        compare_with_baseline(RunSummary{flow.flow_id, out.chaos.passed, false},
                              RunSummary{flow.flow_id, out.baseline.passed, false});

    TicketContext ticket;
    ticket.run_id = out.run_id;
    ticket.flow_id = flow.flow_id;
    ticket.chaos_verdict = out.chaos.verdict_text();
    ticket.baseline_verdict = out.baseline.verdict_text();
    ticket.comparison = out.comparison;
    ticket.ranking = out.ranking;
    ticket.findings = out.detection.findings;
    ticket.transitions = out.chaos.transitions;
    ticket.notes.push_back("topology: " + topo_stem);
    ticket.notes.push_back("flow: " + path_stem(scenario.flow_path));
    ticket.notes.push_back("fault template: " + scenario.template_name);
    for (const std::string& f : scenario.faults) {
        ticket.notes.push_back("injected fault: " + f);
    }
    if (out.planted) {
        ticket.notes.push_back("planted violation: " + out.planted->to_string());
    }
    ticket.notes.push_back("classifier mode: " + to_string(cfg.classifier_mode));
    out.ticket_md = emit_ticket(ticket);

    // Digest over replay-stable bytes only; run ids and timestamps stay out.
    const std::string baseline_log = run_log_to_jsonl(out.baseline);
    const std::string chaos_log = run_log_to_jsonl(out.chaos);
    const std::string screens = screens_to_jsonl(out.chaos.screens_mosaic);
    const std::string ranking_lines = ranking_to_lines(out.ranking);
    const std::string verdicts = "baseline=" + out.baseline.verdict_text() +
                                 " chaos=" + out.chaos.verdict_text() +
                                 " comparison=" + to_string(out.comparison) + "\n";
    Fnv1a64 h;
    h.update("[baseline-log]\n");
    h.update(baseline_log);
    h.update("[chaos-log]\n");
    h.update(chaos_log);
    h.update("[screens]\n");
    h.update(screens);
    h.update("[ranking]\n");
    h.update(ranking_lines);
    h.update("[verdicts]\n");
    h.update(verdicts);
    out.digest = h.hex();

    if (!out_dir.empty()) {
        const fs::path dir = fs::path(out_dir) / scenario.label / out.run_id;
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec) {
            throw IoError("cannot create archive dir " + dir.string() + ": " + ec.message());
        }
        write_file((dir / "baseline.log.jsonl").string(), baseline_log);
        write_file((dir / "chaos.log.jsonl").string(), chaos_log);
        write_file((dir / "screens.jsonl").string(), screens);
        write_file((dir / "ranking.jsonl").string(), ranking_lines);
        write_file((dir / "ticket.md").string(), out.ticket_md);

        ordered_json a;
        a["run_id"] = out.run_id;
        a["scenario"] = {{"index", scenario.index},
                         {"label", scenario.label},
                         {"topology", scenario.topology_path},
                         {"flow", scenario.flow_path},
                         {"template", scenario.template_name},
                         {"faults", scenario.faults},
                         {"repeat", scenario.repeat},
                         {"seed", scenario.seed}};
        if (out.planted) {
            a["planted"] = {{"caller", out.planted->caller},
                            {"callee", out.planted->callee},
                            {"endpoint", out.planted->endpoint}};
        }
        a["classifier_mode"] = to_string(cfg.classifier_mode);
        a["verdicts"] = {{"baseline", out.baseline.verdict_text()},
                         {"chaos", out.chaos.verdict_text()},
                         {"comparison", to_string(out.comparison)}};
        a["baseline"] = {{"passed", out.baseline.passed},
                         {"duration_ms", out.baseline.duration_ms},
                         {"action_count", out.baseline.action_count}};
        a["chaos"] = {{"passed", out.chaos.passed},
                      {"duration_ms", out.chaos.duration_ms},
                      {"action_count", out.chaos.action_count}};
        ordered_json decisions = ordered_json::array();
        for (const DecisionRecord& d : out.chaos.decisions) {
            decisions.push_back(decision_to_json(d));
        }
        a["decisions"] = std::move(decisions);
        ordered_json assertions = ordered_json::array();
        auto push_assertions = [&](const char* which,
                                   const std::vector<AssertionOutcome>& v) {
            for (const AssertionOutcome& o : v) {
                ordered_json jo;
                jo["run"] = which;
                jo["prompt"] = o.prompt;
                jo["answer"] = o.answer;
                jo["ground_truth"] = o.ground_truth;
                jo["degraded"] = o.degraded_mode;
                assertions.push_back(std::move(jo));
            }
        };
        push_assertions("baseline", out.baseline_assertions);
        push_assertions("chaos", out.chaos_assertions);
        a["assertions"] = std::move(assertions);
        ordered_json findings = ordered_json::array();
        for (const ErrorFinding& f : out.detection.findings) {
            findings.push_back({{"at_ms", f.at_ms},
                                {"screen_id", f.screen_id},
                                {"source", f.source == FindingSource::regex
                                               ? "regex"
                                               : "classifier"},
                                {"detail", f.detail}});
        }
        a["findings"] = std::move(findings);
        a["digest"] = out.digest;
        a["digest_inputs"] = {"baseline.log.jsonl", "chaos.log.jsonl", "screens.jsonl",
                              "ranking.jsonl", "verdicts"};
        write_file((dir / "archive.json").string(), a.dump(2) + "\n");
        out.archive_dir = dir.string();
    }
    return out;
}

std::vector<PairOutcome> run_config(const HarnessConfig& cfg, const std::string& out_dir,
                                    bool quiet) {
    const std::vector<Scenario> scenarios = generate_scenarios(cfg);
    std::vector<PairOutcome> results(scenarios.size());

    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> done{0};
    std::mutex io_mutex;
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= scenarios.size()) {
                return;
            }
            {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (first_error) {
                    return;
                }
            }
            try {
                results[i] = run_scenario(cfg, scenarios[i], out_dir);
                const std::size_t finished = done.fetch_add(1) + 1;
                if (!quiet) {
                    std::lock_guard<std::mutex> lock(io_mutex);
                    std::cout << "[" << finished << "/" << scenarios.size() << "] "
                              << scenarios[i].label << " baseline="
                              << results[i].baseline.verdict_text() << " chaos="
                              << results[i].chaos.verdict_text() << " ("
                              << to_string(results[i].comparison) << ")\n";
                }
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) {
                    first_error = std::current_exception();
                }
                return;
            }
        }
    };

    const int workers = std::max(1, std::min<int>(cfg.worker_count,
                                                  static_cast<int>(scenarios.size())));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back(worker);
    }
    for (std::thread& t : pool) {
        t.join();
    }
    if (first_error) {
        std::rethrow_exception(first_error);
    }
    return results;
}

// ---- Metrics ----

double precision_at_k(const std::vector<int>& true_ranks, int k) {
    if (true_ranks.empty()) {
        return 0.0;
    }
    std::size_t hits = 0;
    for (int r : true_ranks) {
        if (r >= 1 && r <= k) {
            ++hits;
        }
    }
    return static_cast<double>(hits) / static_cast<double>(true_ranks.size());
}

double decision_precision_at_k(const std::vector<DecisionRecord>& decisions, int k) {
    if (decisions.empty()) {
        return 0.0;
    }
    std::size_t hits = 0;
    for (const DecisionRecord& d : decisions) {
        const std::size_t limit =
            std::min<std::size_t>(d.ranked_actions.size(), static_cast<std::size_t>(k));
        for (std::size_t i = 0; i < limit; ++i) {
            if (d.ranked_actions[i] == d.ground_truth) {
                ++hits;
                break;
            }
        }
    }
    return static_cast<double>(hits) / static_cast<double>(decisions.size());
}

double percentile_nearest_rank(std::vector<double> values, double q) {
    if (values.empty()) {
        throw ValidationError("percentile of an empty sample");
    }
    if (!(q > 0.0 && q <= 1.0)) {
        throw ValidationError("percentile quantile must be in (0, 1]");
    }
    std::sort(values.begin(), values.end());
    const double n = static_cast<double>(values.size());
    // Small epsilon so q*n that is an exact integer does not round up on
    // floating-point noise.
    auto idx = static_cast<std::size_t>(std::ceil(q * n - 1e-9));
    if (idx < 1) idx = 1;
    if (idx > values.size()) idx = values.size();
    return values[idx - 1];
}

void ConfusionMatrix::add(bool truth, bool answer) {
    ++counts[truth ? 1 : 0][answer ? 1 : 0];
}

std::int64_t ConfusionMatrix::total() const {
    return counts[0][0] + counts[0][1] + counts[1][0] + counts[1][1];
}

std::array<std::array<double, 2>, 2> ConfusionMatrix::row_normalized() const {
    std::array<std::array<double, 2>, 2> out{};
    for (int t = 0; t < 2; ++t) {
        const std::int64_t row = counts[t][0] + counts[t][1];
        if (row == 0) {
            continue;
        }
        for (int a = 0; a < 2; ++a) {
            out[t][a] = static_cast<double>(counts[t][a]) / static_cast<double>(row);
        }
    }
    return out;
}

// ---- Archive evaluation ----

namespace {

int planted_rank_in(const CausalRanking& ranking, const EdgeRef& planted) {
    for (const RankedCause& rc : ranking.causes) {
        if (rc.record.callee == planted.callee && rc.record.endpoint == planted.endpoint) {
            return rc.rank;
        }
    }
    return 0;
}

}  // namespace

EvalReport summarize_outcomes(const std::vector<PairOutcome>& outcomes) {
    EvalReport rep;
    for (const PairOutcome& o : outcomes) {
        ++rep.pairs;
        if (o.baseline.passed) ++rep.baseline_passed;
        if (o.chaos.passed) ++rep.chaos_passed;
        ++rep.comparisons[to_string(o.comparison)];
        rep.baseline_durations_ms.push_back(static_cast<double>(o.baseline.duration_ms));
        rep.chaos_durations_ms.push_back(static_cast<double>(o.chaos.duration_ms));
        rep.decisions.insert(rep.decisions.end(), o.chaos.decisions.begin(),
                             o.chaos.decisions.end());
        for (const AssertionOutcome& a : o.baseline_assertions) {
            rep.vqa.add(a.ground_truth, a.answer);
        }
        for (const AssertionOutcome& a : o.chaos_assertions) {
            rep.vqa.add(a.ground_truth, a.answer);
        }
        if (o.planted && !o.chaos.passed) {
            rep.planted_ranks.push_back(planted_rank_in(o.ranking, *o.planted));
        }
        rep.digests.push_back(o.scenario.label + ":" + o.digest);
    }
    std::sort(rep.digests.begin(), rep.digests.end());
    return rep;
}

EvalReport evaluate_archives(const std::string& out_dir) {
    std::vector<fs::path> archives;
    std::error_code ec;
    for (fs::directory_iterator scen(out_dir, ec); !ec && scen != fs::directory_iterator();
         scen.increment(ec)) {
        if (!scen->is_directory()) {
            continue;
        }
        std::error_code ec2;
        for (fs::directory_iterator run(scen->path(), ec2);
             !ec2 && run != fs::directory_iterator(); run.increment(ec2)) {
            const fs::path meta = run->path() / "archive.json";
            if (fs::exists(meta)) {
                archives.push_back(meta);
            }
        }
    }
    if (ec) {
        throw IoError("cannot scan archive dir " + out_dir + ": " + ec.message());
    }
    std::sort(archives.begin(), archives.end());

    EvalReport rep;
    for (const fs::path& meta : archives) {
        json a;
        try {
            a = json::parse(read_file(meta.string()));
        } catch (const json::exception& e) {
            throw ParseError(meta.string() + ": " + e.what());
        }
        ++rep.pairs;
        const bool baseline_passed = a.at("baseline").at("passed").get<bool>();
        const bool chaos_passed = a.at("chaos").at("passed").get<bool>();
        if (baseline_passed) ++rep.baseline_passed;
        if (chaos_passed) ++rep.chaos_passed;
        ++rep.comparisons[a.at("verdicts").at("comparison").get<std::string>()];
        rep.baseline_durations_ms.push_back(a.at("baseline").at("duration_ms").get<double>());
        rep.chaos_durations_ms.push_back(a.at("chaos").at("duration_ms").get<double>());
        for (const json& jd : a.at("decisions")) {
            rep.decisions.push_back(decision_from_json(jd));
        }
        for (const json& ja : a.at("assertions")) {
            rep.vqa.add(ja.at("ground_truth").get<bool>(), ja.at("answer").get<bool>());
        }
        if (a.contains("planted") && !chaos_passed) {
            EdgeRef planted;
            planted.caller = a.at("planted").at("caller").get<std::string>();
            planted.callee = a.at("planted").at("callee").get<std::string>();
            planted.endpoint = a.at("planted").at("endpoint").get<std::string>();
            const CausalRanking ranking =
                ranking_from_lines(read_file((meta.parent_path() / "ranking.jsonl").string()));
            rep.planted_ranks.push_back(planted_rank_in(ranking, planted));
        }
        rep.digests.push_back(a.at("scenario").at("label").get<std::string>() + ":" +
                              a.at("digest").get<std::string>());
    }
    std::sort(rep.digests.begin(), rep.digests.end());
    return rep;
}

std::string EvalReport::render() const {
    std::ostringstream os;
    os << "pairs: " << pairs << "\n";
    if (pairs == 0) {
        return os.str();
    }
    os << "baseline pass rate: "
       << format_double(static_cast<double>(baseline_passed) / pairs) << " ("
       << baseline_passed << "/" << pairs << ")\n";
    os << "chaos pass rate: " << format_double(static_cast<double>(chaos_passed) / pairs)
       << " (" << chaos_passed << "/" << pairs << ")\n";
    os << "comparisons:";
    for (const auto& [name, count] : comparisons) {
        os << " " << name << "=" << count;
    }
    os << "\n";
    if (!decisions.empty()) {
        os << "action precision: p@1=" << format_double(decision_precision_at_k(decisions, 1))
           << " p@3=" << format_double(decision_precision_at_k(decisions, 3)) << " ("
           << decisions.size() << " decisions)\n";
    }
    if (!planted_ranks.empty()) {
        os << "planted-cause precision: p@1="
           << format_double(precision_at_k(planted_ranks, 1))
           << " p@3=" << format_double(precision_at_k(planted_ranks, 3))
           << " p@5=" << format_double(precision_at_k(planted_ranks, 5)) << " ("
           << planted_ranks.size() << " failing runs)\n";
    }
    if (!chaos_durations_ms.empty()) {
        os << "chaos duration ms: p50="
           << format_double(percentile_nearest_rank(chaos_durations_ms, 0.5))
           << " p95=" << format_double(percentile_nearest_rank(chaos_durations_ms, 0.95))
           << "\n";
    }
    if (vqa.total() > 0) {
        const auto n = vqa.row_normalized();
        os << "assertion confusion (rows = ground truth false/true):\n";
        for (int t = 0; t < 2; ++t) {
            os << "  [" << format_double(n[t][0]) << ", " << format_double(n[t][1])
               << "]  counts [" << vqa.counts[t][0] << ", " << vqa.counts[t][1] << "]\n";
        }
    }
    std::set<std::string> distinct;
    for (const std::string& d : digests) {
        distinct.insert(d);
    }
    os << "archive digests: " << distinct.size() << " distinct over " << digests.size()
       << " pairs\n";
    return os.str();
}

}  // namespace havoc
