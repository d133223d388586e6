// havoc command line: scenario running, standalone root-cause analysis,
// archive evaluation, scenario-grid inspection, topology checking.
#include <exception>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "havoc/common.hpp"
#include "havoc/crawler.hpp"
#include "havoc/external.hpp"
#include "havoc/fault.hpp"
#include "havoc/harness.hpp"
#include "havoc/rca.hpp"
#include "havoc/simmesh.hpp"
#include "havoc/topology.hpp"

namespace {

struct RunArgs {
    std::string config;
    std::string out_dir = "out";
    bool verbose = false;
};

struct RcaArgs {
    std::string log_path;
    std::string screens_path;
    std::string topology_path;
    std::string flow_id;
    std::vector<std::string> baseline_paths;
    std::string mode = "oracle";
    std::string weights_path;
    std::string ranking_out;
    std::string ticket_out;
};

struct EvalArgs {
    std::string archive_dir;
};

struct GenArgs {
    std::string config;
    bool list = false;
};

struct TopoCheckArgs {
    std::string path;
    std::string plant;  // caller:callee:endpoint
};

int do_run(const RunArgs& args) {
    const havoc::HarnessConfig cfg = havoc::load_config_file(args.config);
    const auto outcomes = havoc::run_config(cfg, args.out_dir, !args.verbose);
    std::cout << havoc::summarize_outcomes(outcomes).render();
    std::cout << "archives: " << args.out_dir << "\n";
    return 0;
}

std::vector<havoc::ScreenState> load_screens(const std::string& path) {
    std::vector<havoc::ScreenState> out;
    for (const std::string& line : havoc::split(havoc::read_file(path), '\n')) {
        if (!line.empty()) {
            out.push_back(havoc::screen_from_log_line(line));
        }
    }
    return out;
}

int do_rca(const RcaArgs& args) {
    const havoc::Topology topo = havoc::load_topology_file(args.topology_path);
    const havoc::ParsedRunLog log = havoc::run_log_from_jsonl(havoc::read_file(args.log_path));

    std::vector<havoc::ScreenState> screens;
    if (!args.screens_path.empty()) {
        screens = load_screens(args.screens_path);
    }

    // Baseline logs handed to the CLI are reference runs; they count as
    // passing for the failure-rate statistics.
    std::vector<havoc::RunSample> baselines;
    for (const std::string& p : args.baseline_paths) {
        havoc::ParsedRunLog bl = havoc::run_log_from_jsonl(havoc::read_file(p));
        baselines.push_back(havoc::RunSample{true, std::move(bl.rpcs)});
    }
    const havoc::BaselineStats stats = havoc::compute_baseline_stats(baselines);

    std::unique_ptr<havoc::ErrorScreenClassifier> error_cls;
    std::unique_ptr<havoc::EndpointCategorizer> categorizer;
    if (args.mode == "oracle") {
        error_cls = std::make_unique<havoc::DefaultErrorScreenClassifier>();
        categorizer = std::make_unique<havoc::OracleCategorizer>(topo);
    } else if (args.mode == "degraded") {
        error_cls = nullptr;
        categorizer = std::make_unique<havoc::KeywordCategorizer>();
    } else if (args.mode == "external") {
        const std::string url = havoc::classifier_url_from_env("");
        if (url.empty()) {
            throw havoc::ValidationError("external mode needs HAVOC_CLASSIFIER_URL");
        }
        error_cls = std::make_unique<havoc::DefaultErrorScreenClassifier>();
        categorizer = std::make_unique<havoc::HttpCategorizer>(url);
    } else {
        throw havoc::ValidationError("unknown mode '" + args.mode + "'");
    }

    havoc::ScoreWeights weights;
    if (!args.weights_path.empty()) {
        weights = havoc::ScoreWeights::from_json(havoc::read_file(args.weights_path));
    }

    const havoc::ErrorDetection detection =
        havoc::detect_errors(log.transitions, screens, error_cls.get());
    const havoc::CausalRanking ranking = havoc::rank_causes(
        log.rpcs, detection.findings, stats, topo, *categorizer, args.flow_id, weights);

    if (ranking.inconclusive) {
        std::cout << "inconclusive: no error findings; ranked the whole log\n";
    }
    for (const havoc::RankedCause& rc : ranking.causes) {
        std::cout << rc.rank << ". " << rc.record.callee << " " << rc.record.endpoint
                  << " status=" << rc.record.status_text()
                  << " category=" << havoc::to_string(rc.category)
                  << " score=" << havoc::format_double(rc.score.score) << "\n";
    }
    if (!args.ranking_out.empty()) {
        havoc::write_file(args.ranking_out, havoc::ranking_to_lines(ranking));
    }
    if (!args.ticket_out.empty()) {
        havoc::TicketContext ctx;
        ctx.run_id = args.log_path;
        ctx.flow_id = args.flow_id;
        ctx.chaos_verdict = "fail(unknown)";
        ctx.baseline_verdict = baselines.empty() ? "unknown" : "pass";
        ctx.comparison = havoc::BaselineVerdict::inconclusive;
        ctx.ranking = ranking;
        ctx.findings = detection.findings;
        ctx.transitions = log.transitions;
        ctx.weights = weights;
        ctx.notes.push_back("generated by `havoc rca` from " + args.log_path);
        havoc::write_file(args.ticket_out, havoc::emit_ticket(ctx));
    }
    return 0;
}

int do_eval(const EvalArgs& args) {
    std::cout << havoc::evaluate_archives(args.archive_dir).render();
    return 0;
}

int do_gen(const GenArgs& args) {
    const havoc::HarnessConfig cfg = havoc::load_config_file(args.config);
    std::cout << "scenarios: " << havoc::scenario_count(cfg) << "\n";
    if (args.list) {
        for (const havoc::Scenario& s : havoc::generate_scenarios(cfg)) {
            std::cout << s.label << " seed=" << s.seed << "\n";
        }
    }
    return 0;
}

int do_topo_check(const TopoCheckArgs& args) {
    havoc::Topology topo = havoc::load_topology_file(args.path);
    if (!args.plant.empty()) {
        const std::vector<std::string> parts = havoc::split(args.plant, ':');
        if (parts.size() != 3) {
            throw havoc::ValidationError("--plant wants caller:callee:endpoint");
        }
        topo = havoc::plant_violation(topo, havoc::EdgeRef{parts[0], parts[1], parts[2]});
        std::cout << "planted violation on " << args.plant << "\n";
    }

    std::size_t edges = 0;
    int tier_counts[havoc::kMaxTier + 1] = {};
    for (const auto& [name, svc] : topo.services) {
        ++tier_counts[svc.tier];
        for (const auto& stage : svc.call_plan) {
            edges += stage.parallel_calls.size();
        }
    }
    std::cout << "topology: " << topo.name << "\n";
    std::cout << "services: " << topo.services.size() << " (tiers";
    for (int t = 0; t <= havoc::kMaxTier; ++t) {
        std::cout << " " << t << ":" << tier_counts[t];
    }
    std::cout << ")\n";
    std::cout << "edges: " << edges << "\n";
    std::cout << "entry points: " << topo.entry_points.size() << "\n";
    std::cout << "declared non-critical edges: " << topo.declared_non_critical_edges().size()
              << "\n";
    const auto violations = topo.violations();
    std::cout << "dependency violations: " << violations.size() << "\n";
    for (const havoc::EdgeRef& v : violations) {
        std::cout << "  " << v.to_string() << "\n";
    }
    std::cout << "ok\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"chaos testing for a simulated microservice mesh: fault injection, "
                 "flow execution, root-cause analysis"};
    app.require_subcommand(1);

    RunArgs run_args;
    CLI::App* run = app.add_subcommand("run", "run every scenario of a config and archive results");
    run->add_option("--config", run_args.config, "harness config JSON")->required();
    run->add_option("--out", run_args.out_dir, "archive directory (default: out)");
    run->add_flag("--verbose", run_args.verbose, "per-scenario progress lines");

    RcaArgs rca_args;
    CLI::App* rca = app.add_subcommand("rca", "rank suspected causes for a failed run log");
    rca->add_option("--log", rca_args.log_path, "chaos run log (JSONL)")->required();
    rca->add_option("--screens", rca_args.screens_path, "screen states (JSONL)");
    rca->add_option("--topology", rca_args.topology_path, "topology JSON")->required();
    rca->add_option("--flow-id", rca_args.flow_id, "flow the run executed")->required();
    rca->add_option("--baseline", rca_args.baseline_paths,
                    "passing baseline log (repeatable)");
    rca->add_option("--mode", rca_args.mode, "oracle | degraded | external");
    rca->add_option("--weights", rca_args.weights_path, "scoring weight overrides JSON");
    rca->add_option("--ranking-out", rca_args.ranking_out, "write ranking JSONL here");
    rca->add_option("--ticket-out", rca_args.ticket_out, "write markdown ticket here");

    EvalArgs eval_args;
    CLI::App* eval = app.add_subcommand("eval", "aggregate metrics over an archive directory");
    eval->add_option("--archive", eval_args.archive_dir, "directory written by `havoc run`")
        ->required();

    GenArgs gen_args;
    CLI::App* gen = app.add_subcommand("gen", "show the scenario grid of a config without running");
    gen->add_option("--config", gen_args.config, "harness config JSON")->required();
    gen->add_flag("--list", gen_args.list, "list scenario labels and seeds");

    CLI::App* topo = app.add_subcommand("topo", "topology utilities");
    topo->require_subcommand(1);
    TopoCheckArgs topo_args;
    CLI::App* topo_check = topo->add_subcommand("check", "validate a topology file");
    topo_check->add_option("file", topo_args.path, "topology JSON")->required();
    topo_check->add_option("--plant", topo_args.plant,
                           "flip caller:callee:endpoint to actually-critical first");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return do_run(run_args);
        if (rca->parsed()) return do_rca(rca_args);
        if (eval->parsed()) return do_eval(eval_args);
        if (gen->parsed()) return do_gen(gen_args);
        if (topo->parsed() && topo_check->parsed()) return do_topo_check(topo_args);
    } catch (const havoc::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
