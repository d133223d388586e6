// Service topology model: tiered services, declared vs actual edge
// criticality, per-endpoint flow relevance tags, and entry points.
//
// CRITICAL INVARIANTS
//  - Tiers run 0..5; tier 0 is the most business-critical.
//  - Every edge declared non_critical carries a fallback payload.
//  - A dependency violation is an edge declared non_critical whose actual
//    criticality is critical. plant_violation is the only way to create one.
//  - Topologies are acyclic from every entry point; load_topology rejects
//    cycles, dangling references, and out-of-range tiers by name.
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "havoc/common.hpp"

namespace havoc {

using TierLevel = int;  // 0..5, 0 most critical

inline constexpr TierLevel kMinTier = 0;
inline constexpr TierLevel kMaxTier = 5;

enum class Criticality : std::uint8_t {
    critical,      // caller cannot absorb a failure of this edge
    non_critical,  // caller degrades via fallback payload
};

std::string to_string(Criticality c);
Criticality criticality_from_string(const std::string& s);

// Relevance of an endpoint to a given user flow. Drives cause scoring.
enum class RelevanceCategory : std::uint8_t {
    direct,      // the endpoint implements the flow action itself
    indirect,    // on the flow's critical path but one step removed
    supporting,  // shared infrastructure (auth, config, session)
    unrelated,   // cosmetic or unrelated (ads, promos, surveys)
};

std::string to_string(RelevanceCategory c);
RelevanceCategory relevance_from_string(const std::string& s);

// How a degraded UI element renders when a fallback payload is used.
enum class MarkerMode : std::uint8_t {
    missing,      // element not rendered at all
    placeholder,  // element rendered as an inert placeholder
    delayed,      // element appears delay_ms after the payload arrives
};

// Serialized as "element:mode" or "element:delayed:<ms>".
struct DegradationMarker {
    std::string element_id;
    MarkerMode mode = MarkerMode::missing;
    std::int64_t delay_ms = 0;  // meaningful only for delayed

    std::string to_string() const;
    static DegradationMarker parse(const std::string& text);

    auto operator<=>(const DegradationMarker&) const = default;
};

struct EndpointSpec {
    std::string path;
    // flow id -> relevance of this endpoint to that flow.
    std::map<std::string, RelevanceCategory> relevance_tags;
    // Probability of an organic (non-injected) 5xx per call.
    double baseline_failure_weight = 0.0;

    bool operator==(const EndpointSpec&) const = default;
};

struct DependencyEdge {
    std::string callee;
    std::string endpoint;
    Criticality declared_criticality = Criticality::critical;
    Criticality actual_criticality = Criticality::critical;
    std::int64_t timeout_budget_ms = 0;  // 0 at load time means "use default"
    std::optional<DegradationMarker> fallback_payload;

    bool is_violation() const {
        return declared_criticality == Criticality::non_critical &&
               actual_criticality == Criticality::critical;
    }

    bool operator==(const DependencyEdge&) const = default;
};

// Calls inside one stage start together; stages execute sequentially.
struct CallStage {
    std::vector<DependencyEdge> parallel_calls;

    bool operator==(const CallStage&) const = default;
};

struct ServiceSpec {
    std::string name;
    TierLevel tier = kMaxTier;
    std::int64_t base_latency_ms = 1;  // >= 1
    std::int64_t jitter_ms = 0;        // >= 0
    std::vector<EndpointSpec> endpoints;
    std::vector<CallStage> call_plan;

    const EndpointSpec* find_endpoint(const std::string& path) const;

    bool operator==(const ServiceSpec&) const = default;
};

struct EntryPoint {
    std::string service;
    std::string endpoint;

    auto operator<=>(const EntryPoint&) const = default;
};

// Names an edge by position: caller service, callee service, callee endpoint.
struct EdgeRef {
    std::string caller;
    std::string callee;
    std::string endpoint;

    auto operator<=>(const EdgeRef&) const = default;
    std::string to_string() const;
};

struct Topology {
    std::string name;
    std::map<std::string, ServiceSpec> services;
    // entry key (flow id or step entry key) -> entry point.
    std::map<std::string, EntryPoint> entry_points;

    const ServiceSpec& service(const std::string& name) const;
    const ServiceSpec* find_service(const std::string& name) const;
    const DependencyEdge* find_edge(const EdgeRef& ref) const;

    // Every edge, in deterministic (caller, stage, position) order.
    std::vector<EdgeRef> all_edges() const;
    // Edges declared non_critical: the legal planting sites for violations.
    std::vector<EdgeRef> declared_non_critical_edges() const;
    // Edges where declared and actual criticality disagree.
    std::vector<EdgeRef> violations() const;

    bool operator==(const Topology&) const = default;
};

// Default timeout budget when an edge does not set one explicitly.
std::int64_t default_timeout_budget_ms(const ServiceSpec& callee);

// ---- Load / save ----

// Parses and validates a topology document (JSON with sections `services`,
// `edges`, `entry_points`). Throws ParseError / ValidationError naming the
// offending entity. Edges with timeout_budget_ms absent get the default
// budget (4x callee base latency) resolved at load time.
Topology load_topology(const std::string& document, const std::string& origin = "<inline>");
Topology load_topology_file(const std::string& path);

// Serializes back to the document format; load(save(t)) == t.
std::string save_topology(const Topology& topo);

// Structural validation used by load_topology; callable on hand-built values.
void validate_topology(const Topology& topo, const std::string& origin = "<memory>");

// ---- Mutation ----

// Returns a copy with the named edge's actual criticality set to critical.
// The edge must exist and must be declared non_critical. Idempotent.
Topology plant_violation(const Topology& topo, const EdgeRef& edge);

// ---- Queries ----

// Service names whose tier satisfies the predicate, in name order.
std::set<std::string> tier_services(const Topology& topo,
                                    const std::function<bool(TierLevel)>& pred);

// Convenience predicate for "tier >= n".
std::function<bool(TierLevel)> tier_at_least(TierLevel n);

}  // namespace havoc
