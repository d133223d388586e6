// Tenancy-gated fault specification, wire header codec, and the per-RPC
// injection decision.
//
// CRITICAL INVARIANTS
//  - Requests without test tenancy are NEVER faulted; a missing tenancy
//    header decodes to production (fail-safe).
//  - At most one fault applies per RPC: first fault in list order whose
//    selector matches and whose scope fires wins.
//  - encode_headers always emits exactly the three x-havoc-* headers;
//    decode(encode(h)) == h for all valid h.
//
// Wire grammar (ASCII, no spaces inside a fault):
//   x-havoc-tenancy: test|production
//   x-havoc-run: <opaque id>
//   x-havoc-faults: <fault>{,<fault>}*
//   <fault>    := kindspec ';' targetspec ';' scopespec
//   kindspec   := abort '(' code ')' | timeout | latency '(' ms ')'
//   targetspec := tier '>=' d | svc '=' name{'|' name}* | ep '=' name ':' path{'|' name ':' path}*
//   scopespec  := all | p '=' decimal
#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "havoc/common.hpp"
#include "havoc/topology.hpp"

namespace havoc {

inline constexpr const char* kTenancyHeader = "x-havoc-tenancy";
inline constexpr const char* kRunHeader = "x-havoc-run";
inline constexpr const char* kFaultsHeader = "x-havoc-faults";

enum class Tenancy : std::uint8_t {
    production,  // never faulted
    test,        // eligible for injection
};

std::string to_string(Tenancy t);

enum class FaultKind : std::uint8_t {
    abort,    // immediate non-2xx with the given status
    timeout,  // callee never answers; caller observes its timeout budget
    latency,  // extra_ms added to the callee's completion time
};

struct FaultEffect {
    FaultKind kind = FaultKind::abort;
    int abort_status = 503;       // abort only; 400..599
    std::int64_t extra_ms = 0;    // latency only; >= 1

    bool operator==(const FaultEffect&) const = default;
};

enum class SelectorKind : std::uint8_t {
    by_services,
    by_tier_at_least,
    by_endpoint,
};

struct TargetSelector {
    SelectorKind kind = SelectorKind::by_tier_at_least;
    std::set<std::string> services;                            // by_services
    TierLevel min_tier = 0;                                    // by_tier_at_least
    std::set<std::pair<std::string, std::string>> endpoints;   // by_endpoint

    bool operator==(const TargetSelector&) const = default;

    static TargetSelector for_services(std::set<std::string> names);
    static TargetSelector for_tier_at_least(TierLevel t);
    static TargetSelector for_endpoints(std::set<std::pair<std::string, std::string>> eps);
};

enum class ScopeKind : std::uint8_t {
    all_matching,
    probability,
};

struct InjectionScope {
    ScopeKind kind = ScopeKind::all_matching;
    double probability = 1.0;  // (0, 1]; meaningful for probability scope

    bool operator==(const InjectionScope&) const = default;
};

struct FaultSpec {
    FaultEffect effect;
    TargetSelector selector;
    InjectionScope scope;

    bool operator==(const FaultSpec&) const = default;

    // Grammar form of a single fault, e.g. "abort(503);tier>=2;all".
    std::string to_string() const;
    static FaultSpec parse(const std::string& text);
};

struct HavocHeaders {
    Tenancy tenancy = Tenancy::production;
    std::vector<FaultSpec> faults;
    std::string run_id;

    bool operator==(const HavocHeaders&) const = default;
};

// Outcome of the injection decision for one RPC attempt.
enum class FaultAction : std::uint8_t {
    none,
    aborted,
    timed_out,
    delayed,
};

struct FaultOutcome {
    bool applied = false;
    FaultAction action = FaultAction::none;
    int abort_status = 0;       // aborted only
    std::int64_t delay_ms = 0;  // delayed only

    bool operator==(const FaultOutcome&) const = default;
};

// Throws ValidationError when a spec is out of range (abort status outside
// 400..599, latency < 1 ms, probability outside (0,1], empty selector sets,
// or selector names containing grammar delimiters).
void validate_fault_spec(const FaultSpec& spec);

// ---- Codec ----

// Returns exactly three (name, value) pairs, faults joined by ','. The
// faults value is empty when the list is empty.
std::vector<std::pair<std::string, std::string>> encode_headers(const HavocHeaders& h);

// Unknown header names are ignored. A missing tenancy header decodes to
// production. Malformed values raise DecodeError naming the bad clause.
HavocHeaders decode_headers(const std::vector<std::pair<std::string, std::string>>& headers);

// ---- Injection decision ----

bool selector_matches(const TargetSelector& sel, const ServiceSpec& callee,
                      const std::string& endpoint);

// First fault in list order whose selector matches and whose scope fires is
// applied. Probability scopes share one uniform draw per RPC attempt, taken
// lazily from `rng` on the first probability-scoped match.
FaultOutcome apply_fault(const HavocHeaders& h, const ServiceSpec& callee,
                         const std::string& endpoint, SeededStream& rng);

}  // namespace havoc
