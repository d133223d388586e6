// Virtual-time execution of one entry-point request through the topology,
// with the fault middleware applied to every RPC.
//
// Execution model (all times virtual milliseconds):
//  - A callee first spends base_latency_ms + jitter locally, then runs its
//    call plan; stages are sequential, calls inside a stage start together
//    and the stage ends at the latest child end.
//  - abort fault: the RPC returns the given status at start + 1 ms and the
//    callee never runs.
//  - timeout fault: the caller observes timed_out at exactly
//    start + timeout_budget_ms; the callee never runs.
//  - latency fault: the callee runs normally and extra_ms is added to the
//    wire completion; if that pushes past the edge budget the caller
//    observes an (injected) timeout instead.
//  - A callee that genuinely finishes after the edge budget also yields
//    timed_out; such cancelled subtrees are not logged, which preserves the
//    containment invariant (child intervals lie inside parent intervals).
//  - Edge failure consults ACTUAL criticality: non_critical edges fall back
//    (degraded=true, fallback marker added to the caller's payload);
//    critical edges fail the caller with 500 once the stage completes.
//  - Organic failures: each endpoint call fails with a non-injected 500
//    with probability baseline_failure_weight.
//
// All randomness (fault scopes, jitter, organic failures) comes from one
// run-owned SeededStream, drawn in depth-first execution order, so a given
// (topology, entry, headers, seed) tuple always produces an identical trace.
#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "havoc/common.hpp"
#include "havoc/fault.hpp"
#include "havoc/topology.hpp"

namespace havoc {

// Budget applied when a timeout fault targets the entry request itself,
// which has no dependency edge of its own.
inline constexpr std::int64_t kRootTimeoutBudgetMs = 10'000;

// Caller name recorded for the entry request.
inline constexpr const char* kClientCaller = "client";

// Which app issued the surrounding run. Declaration order is the sort order
// used when merging per-app logs.
enum class AppInstance : std::uint8_t { rider, driver, eats, none };

std::string to_string(AppInstance a);
AppInstance app_instance_from_string(const std::string& s);

struct RpcRecord {
    std::string caller;
    std::string callee;
    std::string endpoint;
    std::int64_t start_ms = 0;
    std::int64_t end_ms = 0;
    int status_code = 0;      // ignored when timed_out
    bool timed_out = false;
    bool injected = false;    // a fault was applied to this RPC
    bool degraded = false;    // this callee served at least one fallback
    AppInstance app_instance = AppInstance::none;

    bool ok() const { return !timed_out && status_code >= 200 && status_code < 300; }
    bool failed() const { return !ok(); }
    // "200" / "503" / "timed_out"; used in rankings and reports.
    std::string status_text() const;

    bool operator==(const RpcRecord&) const = default;
};

struct TraceNode {
    RpcRecord record;
    std::vector<TraceNode> children;

    bool operator==(const TraceNode&) const = default;
};

struct TraceTree {
    TraceNode root;

    bool operator==(const TraceTree&) const = default;
};

struct ResponsePayload {
    int status_code = 0;
    bool timed_out = false;
    // Present only on 2xx responses; a failed payload carries no markers.
    std::set<DegradationMarker> degradation_markers;

    bool ok() const { return !timed_out && status_code >= 200 && status_code < 300; }

    bool operator==(const ResponsePayload&) const = default;
};

struct ExecutionResult {
    TraceTree trace;
    ResponsePayload payload;
    std::vector<RpcRecord> log;  // trace_to_log(trace)
};

// Executes one request against the entry point registered under `entry_key`
// in topology.entry_points. Fresh stream seeded with `seed`, virtual time
// starts at 0, app instance none.
ExecutionResult execute_request(const Topology& topo, const std::string& entry_key,
                                const HavocHeaders& headers, std::uint64_t seed);

// Same, but continuing an existing stream and clock; used by the flow
// runner, which issues one request per step.
ExecutionResult execute_request_at(const Topology& topo, const EntryPoint& entry,
                                   const HavocHeaders& headers, SeededStream& rng,
                                   std::int64_t start_ms, AppInstance app);

// Pre-order flatten of the trace, stable-sorted by (start_ms, caller, callee).
std::vector<RpcRecord> trace_to_log(const TraceTree& trace);

// Merges per-app logs into one stream, stable-sorted by
// (start_ms, app_instance). Throws ValidationError when the same
// app_instance appears in two input lists.
std::vector<RpcRecord> merge_app_logs(
    const std::vector<std::pair<AppInstance, std::vector<RpcRecord>>>& logs);

// ---- Log line serialization ----

// One self-describing JSON object per line, kind "rpc".
std::string rpc_to_log_line(const RpcRecord& r);
RpcRecord rpc_from_log_line(const std::string& line);

}  // namespace havoc
