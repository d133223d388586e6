#include "havoc/simmesh.hpp"

#include <algorithm>

#include "json.hpp"

namespace havoc {

using nlohmann::ordered_json;

std::string to_string(AppInstance a) {
    switch (a) {
        case AppInstance::rider: return "rider";
        case AppInstance::driver: return "driver";
        case AppInstance::eats: return "eats";
        case AppInstance::none: return "none";
    }
    return "none";
}

AppInstance app_instance_from_string(const std::string& s) {
    if (s == "rider") return AppInstance::rider;
    if (s == "driver") return AppInstance::driver;
    if (s == "eats") return AppInstance::eats;
    if (s == "none") return AppInstance::none;
    throw ParseError("unknown app instance '" + s + "'");
}

std::string RpcRecord::status_text() const {
    return timed_out ? "timed_out" : std::to_string(status_code);
}

namespace {

// Result of running a callee's own logic (local compute + call plan),
// before wire effects (latency faults, budgets) are applied.
struct BodyResult {
    std::int64_t end_ms = 0;
    int status_code = 200;
    std::vector<TraceNode> children;
    std::set<DegradationMarker> markers;
    bool degraded = false;
};

struct WireResult {
    TraceNode node;
    std::set<DegradationMarker> markers;  // empty unless the RPC returned 2xx
};

WireResult simulate_call(const Topology& topo, const HavocHeaders& headers,
                         SeededStream& rng, const std::string& caller,
                         const std::string& callee, const std::string& endpoint,
                         std::int64_t budget_ms, std::int64_t start_ms,
                         AppInstance app);

BodyResult exec_service(const Topology& topo, const HavocHeaders& headers,
                        SeededStream& rng, const ServiceSpec& svc,
                        const std::string& endpoint, std::int64_t start_ms,
                        AppInstance app) {
    BodyResult body;
    const EndpointSpec* ep = svc.find_endpoint(endpoint);
    if (ep == nullptr) {
        throw ValidationError("service '" + svc.name + "' has no endpoint '" + endpoint + "'");
    }

    std::int64_t jitter = svc.jitter_ms > 0 ? rng.uniform_int(0, svc.jitter_ms) : 0;
    std::int64_t t = start_ms + svc.base_latency_ms + jitter;

    if (ep->baseline_failure_weight > 0.0 &&
        rng.uniform01() < ep->baseline_failure_weight) {
        body.end_ms = t;
        body.status_code = 500;  // organic, non-injected failure
        return body;
    }

    for (const auto& stage : svc.call_plan) {
        const std::int64_t stage_start = t;
        std::int64_t stage_end = stage_start;
        bool critical_failure = false;
        for (const auto& edge : stage.parallel_calls) {
            WireResult wire = simulate_call(topo, headers, rng, svc.name, edge.callee,
                                            edge.endpoint, edge.timeout_budget_ms,
                                            stage_start, app);
            stage_end = std::max(stage_end, wire.node.record.end_ms);
            const bool child_failed = wire.node.record.failed();
            body.children.push_back(std::move(wire.node));
            if (child_failed) {
                if (edge.actual_criticality == Criticality::non_critical) {
                    body.degraded = true;
                    if (edge.fallback_payload) {
                        body.markers.insert(*edge.fallback_payload);
                    }
                } else {
                    critical_failure = true;
                }
            } else {
                body.markers.insert(wire.markers.begin(), wire.markers.end());
            }
        }
        t = stage_end;
        if (critical_failure) {
            // The whole stage still ran; remaining stages are skipped and the
            // failure propagates upward as a 500.
            body.end_ms = t;
            body.status_code = 500;
            body.markers.clear();
            return body;
        }
    }

    body.end_ms = t;
    body.status_code = 200;
    return body;
}

WireResult simulate_call(const Topology& topo, const HavocHeaders& headers,
                         SeededStream& rng, const std::string& caller,
                         const std::string& callee, const std::string& endpoint,
                         std::int64_t budget_ms, std::int64_t start_ms,
                         AppInstance app) {
    const ServiceSpec& svc = topo.service(callee);

    WireResult out;
    RpcRecord& rec = out.node.record;
    rec.caller = caller;
    rec.callee = callee;
    rec.endpoint = endpoint;
    rec.start_ms = start_ms;
    rec.app_instance = app;

    FaultOutcome fo = apply_fault(headers, svc, endpoint, rng);
    if (fo.action == FaultAction::aborted) {
        rec.end_ms = start_ms + 1;
        rec.status_code = fo.abort_status;
        rec.injected = true;
        return out;
    }
    if (fo.action == FaultAction::timed_out) {
        const std::int64_t budget = budget_ms > 0 ? budget_ms : kRootTimeoutBudgetMs;
        rec.end_ms = start_ms + budget;
        rec.timed_out = true;
        rec.injected = true;
        return out;
    }

    BodyResult body = exec_service(topo, headers, rng, svc, endpoint, start_ms, app);
    std::int64_t wire_end = body.end_ms;
    if (fo.action == FaultAction::delayed) {
        wire_end += fo.delay_ms;
    }

    if (budget_ms > 0 && wire_end - start_ms > budget_ms) {
        // Caller gives up at its budget. The callee's partial work is
        // cancelled and not logged; only the timed-out edge remains.
        rec.end_ms = start_ms + budget_ms;
        rec.timed_out = true;
        rec.injected = fo.applied;
        return out;
    }

    rec.end_ms = wire_end;
    rec.status_code = body.status_code;
    rec.injected = fo.applied;
    rec.degraded = body.degraded;
    out.node.children = std::move(body.children);
    if (rec.ok()) {
        out.markers = std::move(body.markers);
    }
    return out;
}

}  // namespace

ExecutionResult execute_request_at(const Topology& topo, const EntryPoint& entry,
                                   const HavocHeaders& headers, SeededStream& rng,
                                   std::int64_t start_ms, AppInstance app) {
    // The entry request has no edge budget of its own; only an injected
    // timeout fault can time it out (kRootTimeoutBudgetMs).
    WireResult wire = simulate_call(topo, headers, rng, kClientCaller, entry.service,
                                    entry.endpoint, /*budget_ms=*/-1, start_ms, app);
    ExecutionResult result;
    result.trace.root = std::move(wire.node);
    result.payload.status_code = result.trace.root.record.status_code;
    result.payload.timed_out = result.trace.root.record.timed_out;
    if (result.payload.ok()) {
        result.payload.degradation_markers = std::move(wire.markers);
    }
    result.log = trace_to_log(result.trace);
    return result;
}

ExecutionResult execute_request(const Topology& topo, const std::string& entry_key,
                                const HavocHeaders& headers, std::uint64_t seed) {
    auto it = topo.entry_points.find(entry_key);
    if (it == topo.entry_points.end()) {
        throw ValidationError("unknown entry point '" + entry_key + "'");
    }
    SeededStream rng(seed);
    return execute_request_at(topo, it->second, headers, rng, 0, AppInstance::none);
}

namespace {

void flatten(const TraceNode& node, std::vector<RpcRecord>& out) {
    out.push_back(node.record);
    for (const auto& child : node.children) flatten(child, out);
}

}  // namespace

std::vector<RpcRecord> trace_to_log(const TraceTree& trace) {
    std::vector<RpcRecord> out;
    flatten(trace.root, out);
    std::stable_sort(out.begin(), out.end(), [](const RpcRecord& a, const RpcRecord& b) {
        if (a.start_ms != b.start_ms) return a.start_ms < b.start_ms;
        if (a.caller != b.caller) return a.caller < b.caller;
        return a.callee < b.callee;
    });
    return out;
}

std::vector<RpcRecord> merge_app_logs(
    const std::vector<std::pair<AppInstance, std::vector<RpcRecord>>>& logs) {
    std::set<AppInstance> seen;
    std::vector<RpcRecord> out;
    for (const auto& [app, records] : logs) {
        if (!seen.insert(app).second) {
            throw ValidationError("merge_app_logs: app instance '" + to_string(app) +
                                  "' appears in two input lists");
        }
        for (RpcRecord rec : records) {
            if (rec.app_instance == AppInstance::none) {
                rec.app_instance = app;
            } else if (rec.app_instance != app) {
                throw ValidationError("merge_app_logs: record tagged '" +
                                      to_string(rec.app_instance) +
                                      "' found in list for '" + to_string(app) + "'");
            }
            out.push_back(std::move(rec));
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const RpcRecord& a, const RpcRecord& b) {
        if (a.start_ms != b.start_ms) return a.start_ms < b.start_ms;
        return static_cast<int>(a.app_instance) < static_cast<int>(b.app_instance);
    });
    return out;
}

std::string rpc_to_log_line(const RpcRecord& r) {
    ordered_json j;
    j["kind"] = "rpc";
    j["caller"] = r.caller;
    j["callee"] = r.callee;
    j["endpoint"] = r.endpoint;
    j["start_ms"] = r.start_ms;
    j["end_ms"] = r.end_ms;
    if (r.timed_out) {
        j["status_code"] = "timed_out";
    } else {
        j["status_code"] = r.status_code;
    }
    j["injected"] = r.injected;
    j["degraded"] = r.degraded;
    j["app_instance"] = to_string(r.app_instance);
    return j.dump();
}

RpcRecord rpc_from_log_line(const std::string& line) {
    ordered_json j;
    try {
        j = ordered_json::parse(line);
        if (j.value("kind", "") != "rpc") {
            throw ParseError("log line is not an rpc record");
        }
        RpcRecord r;
        r.caller = j.at("caller").get<std::string>();
        r.callee = j.at("callee").get<std::string>();
        r.endpoint = j.at("endpoint").get<std::string>();
        r.start_ms = j.at("start_ms").get<std::int64_t>();
        r.end_ms = j.at("end_ms").get<std::int64_t>();
        const auto& status = j.at("status_code");
        if (status.is_string()) {
            if (status.get<std::string>() != "timed_out") {
                throw ParseError("bad status_code '" + status.get<std::string>() + "'");
            }
            r.timed_out = true;
        } else {
            r.status_code = status.get<int>();
        }
        r.injected = j.value("injected", false);
        r.degraded = j.value("degraded", false);
        r.app_instance = app_instance_from_string(j.value("app_instance", "none"));
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad rpc log line: ") + e.what());
    }
}

}  // namespace havoc
