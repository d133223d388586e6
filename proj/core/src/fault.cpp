#include "havoc/fault.hpp"

#include <algorithm>
#include <sstream>

namespace havoc {

namespace {

// Characters that would collide with the fault grammar if they appeared in a
// service name, endpoint path, or run id.
constexpr std::string_view kDelimiters = ";,|=()\r\n";

bool has_delimiter(std::string_view s) {
    return s.find_first_of(kDelimiters) != std::string_view::npos;
}

void check_name(std::string_view name, const char* what) {
    if (name.empty()) {
        throw ValidationError(std::string("fault selector has empty ") + what);
    }
    if (has_delimiter(name) || name.find(':') != std::string_view::npos) {
        throw ValidationError(std::string("fault selector ") + what + " '" +
                              std::string(name) + "' contains a grammar delimiter");
    }
}

void check_path(std::string_view path) {
    if (path.empty()) {
        throw ValidationError("fault selector has empty endpoint path");
    }
    if (has_delimiter(path) || path.find(':') != std::string_view::npos) {
        throw ValidationError("fault selector endpoint path '" + std::string(path) +
                              "' contains a grammar delimiter");
    }
}

}  // namespace

std::string to_string(Tenancy t) {
    return t == Tenancy::test ? "test" : "production";
}

TargetSelector TargetSelector::for_services(std::set<std::string> names) {
    TargetSelector s;
    s.kind = SelectorKind::by_services;
    s.services = std::move(names);
    return s;
}

TargetSelector TargetSelector::for_tier_at_least(TierLevel t) {
    TargetSelector s;
    s.kind = SelectorKind::by_tier_at_least;
    s.min_tier = t;
    return s;
}

TargetSelector TargetSelector::for_endpoints(
    std::set<std::pair<std::string, std::string>> eps) {
    TargetSelector s;
    s.kind = SelectorKind::by_endpoint;
    s.endpoints = std::move(eps);
    return s;
}

void validate_fault_spec(const FaultSpec& spec) {
    switch (spec.effect.kind) {
        case FaultKind::abort:
            if (spec.effect.abort_status < 400 || spec.effect.abort_status > 599) {
                throw ValidationError("abort status " + std::to_string(spec.effect.abort_status) +
                                      " outside 400..599");
            }
            break;
        case FaultKind::latency:
            if (spec.effect.extra_ms < 1) {
                throw ValidationError("latency fault needs extra_ms >= 1");
            }
            break;
        case FaultKind::timeout:
            break;
    }
    switch (spec.selector.kind) {
        case SelectorKind::by_services:
            if (spec.selector.services.empty()) {
                throw ValidationError("service selector has no services");
            }
            for (const auto& n : spec.selector.services) check_name(n, "service name");
            break;
        case SelectorKind::by_tier_at_least:
            if (spec.selector.min_tier < kMinTier || spec.selector.min_tier > kMaxTier) {
                throw ValidationError("tier selector outside " + std::to_string(kMinTier) +
                                      ".." + std::to_string(kMaxTier));
            }
            break;
        case SelectorKind::by_endpoint:
            if (spec.selector.endpoints.empty()) {
                throw ValidationError("endpoint selector has no endpoints");
            }
            for (const auto& [svc, path] : spec.selector.endpoints) {
                check_name(svc, "service name");
                check_path(path);
            }
            break;
    }
    if (spec.scope.kind == ScopeKind::probability) {
        if (!(spec.scope.probability > 0.0) || spec.scope.probability > 1.0) {
            throw ValidationError("probability scope outside (0,1]");
        }
    }
}

// ---- Grammar ----

std::string FaultSpec::to_string() const {
    std::ostringstream oss;
    switch (effect.kind) {
        case FaultKind::abort:
            oss << "abort(" << effect.abort_status << ")";
            break;
        case FaultKind::timeout:
            oss << "timeout";
            break;
        case FaultKind::latency:
            oss << "latency(" << effect.extra_ms << ")";
            break;
    }
    oss << ";";
    switch (selector.kind) {
        case SelectorKind::by_tier_at_least:
            oss << "tier>=" << selector.min_tier;
            break;
        case SelectorKind::by_services: {
            oss << "svc=";
            bool first = true;
            for (const auto& n : selector.services) {
                if (!first) oss << "|";
                oss << n;
                first = false;
            }
            break;
        }
        case SelectorKind::by_endpoint: {
            oss << "ep=";
            bool first = true;
            for (const auto& [svc, path] : selector.endpoints) {
                if (!first) oss << "|";
                oss << svc << ":" << path;
                first = false;
            }
            break;
        }
    }
    oss << ";";
    if (scope.kind == ScopeKind::all_matching) {
        oss << "all";
    } else {
        oss << "p=" << format_double(scope.probability);
    }
    return oss.str();
}

namespace {

long parse_long(std::string_view token, const std::string& clause) {
    if (token.empty()) throw DecodeError("fault clause '" + clause + "': empty number");
    long value = 0;
    for (char c : token) {
        if (c < '0' || c > '9') {
            throw DecodeError("fault clause '" + clause + "': bad number '" +
                              std::string(token) + "'");
        }
        value = value * 10 + (c - '0');
        if (value > 1'000'000'000L) {
            throw DecodeError("fault clause '" + clause + "': number out of range");
        }
    }
    return value;
}

FaultEffect parse_kindspec(const std::string& token) {
    FaultEffect e;
    if (token == "timeout") {
        e.kind = FaultKind::timeout;
        return e;
    }
    auto paren = token.find('(');
    if (paren == std::string::npos || token.back() != ')') {
        throw DecodeError("fault clause '" + token + "': unknown fault kind");
    }
    std::string head = token.substr(0, paren);
    std::string arg = token.substr(paren + 1, token.size() - paren - 2);
    if (head == "abort") {
        e.kind = FaultKind::abort;
        e.abort_status = static_cast<int>(parse_long(arg, token));
        if (e.abort_status < 400 || e.abort_status > 599) {
            throw DecodeError("fault clause '" + token + "': abort status outside 400..599");
        }
    } else if (head == "latency") {
        e.kind = FaultKind::latency;
        e.extra_ms = parse_long(arg, token);
        if (e.extra_ms < 1) {
            throw DecodeError("fault clause '" + token + "': latency must be >= 1 ms");
        }
    } else {
        throw DecodeError("fault clause '" + token + "': unknown fault kind '" + head + "'");
    }
    return e;
}

TargetSelector parse_targetspec(const std::string& token) {
    TargetSelector sel;
    if (token.rfind("tier>=", 0) == 0) {
        sel.kind = SelectorKind::by_tier_at_least;
        sel.min_tier = static_cast<TierLevel>(parse_long(token.substr(6), token));
        if (sel.min_tier < kMinTier || sel.min_tier > kMaxTier) {
            throw DecodeError("fault clause '" + token + "': tier outside " +
                              std::to_string(kMinTier) + ".." + std::to_string(kMaxTier));
        }
        return sel;
    }
    if (token.rfind("svc=", 0) == 0) {
        sel.kind = SelectorKind::by_services;
        for (const auto& name : split(token.substr(4), '|')) {
            if (name.empty()) {
                throw DecodeError("fault clause '" + token + "': empty service name");
            }
            sel.services.insert(name);
        }
        return sel;
    }
    if (token.rfind("ep=", 0) == 0) {
        sel.kind = SelectorKind::by_endpoint;
        for (const auto& pair : split(token.substr(3), '|')) {
            auto colon = pair.find(':');
            if (colon == std::string::npos || colon == 0 || colon + 1 == pair.size()) {
                throw DecodeError("fault clause '" + token + "': bad endpoint '" + pair + "'");
            }
            sel.endpoints.insert({pair.substr(0, colon), pair.substr(colon + 1)});
        }
        return sel;
    }
    throw DecodeError("fault clause '" + token + "': unknown target selector");
}

InjectionScope parse_scopespec(const std::string& token) {
    InjectionScope scope;
    if (token == "all") {
        scope.kind = ScopeKind::all_matching;
        return scope;
    }
    if (token.rfind("p=", 0) == 0) {
        scope.kind = ScopeKind::probability;
        scope.probability = parse_double_strict(token.substr(2), "fault clause '" + token + "'");
        if (!(scope.probability > 0.0) || scope.probability > 1.0) {
            throw DecodeError("fault clause '" + token + "': probability outside (0,1]");
        }
        return scope;
    }
    throw DecodeError("fault clause '" + token + "': unknown scope");
}

}  // namespace

FaultSpec FaultSpec::parse(const std::string& text) {
    auto parts = split(text, ';');
    if (parts.size() != 3) {
        throw DecodeError("fault '" + text + "': expected kind;target;scope");
    }
    FaultSpec spec;
    spec.effect = parse_kindspec(parts[0]);
    spec.selector = parse_targetspec(parts[1]);
    spec.scope = parse_scopespec(parts[2]);
    return spec;
}

std::vector<std::pair<std::string, std::string>> encode_headers(const HavocHeaders& h) {
    if (has_delimiter(h.run_id)) {
        throw ValidationError("run id '" + h.run_id + "' contains a header delimiter");
    }
    std::ostringstream faults;
    bool first = true;
    for (const auto& f : h.faults) {
        validate_fault_spec(f);
        if (!first) faults << ",";
        faults << f.to_string();
        first = false;
    }
    return {
        {kTenancyHeader, to_string(h.tenancy)},
        {kRunHeader, h.run_id},
        {kFaultsHeader, faults.str()},
    };
}

HavocHeaders decode_headers(const std::vector<std::pair<std::string, std::string>>& headers) {
    HavocHeaders h;
    bool saw_tenancy = false;
    for (const auto& [name, value] : headers) {
        std::string lname = to_lower(name);
        if (lname == kTenancyHeader) {
            if (value == "test") {
                h.tenancy = Tenancy::test;
            } else if (value == "production") {
                h.tenancy = Tenancy::production;
            } else {
                throw DecodeError("tenancy header: unknown tenancy '" + value + "'");
            }
            saw_tenancy = true;
        } else if (lname == kRunHeader) {
            h.run_id = value;
        } else if (lname == kFaultsHeader) {
            if (value.empty()) continue;
            for (const auto& token : split(value, ',')) {
                h.faults.push_back(FaultSpec::parse(token));
            }
        }
        // Unknown headers are ignored.
    }
    if (!saw_tenancy) {
        h.tenancy = Tenancy::production;  // fail-safe default
    }
    return h;
}

bool selector_matches(const TargetSelector& sel, const ServiceSpec& callee,
                      const std::string& endpoint) {
    switch (sel.kind) {
        case SelectorKind::by_services:
            return sel.services.count(callee.name) > 0;
        case SelectorKind::by_tier_at_least:
            return callee.tier >= sel.min_tier;
        case SelectorKind::by_endpoint:
            return sel.endpoints.count({callee.name, endpoint}) > 0;
    }
    return false;
}

FaultOutcome apply_fault(const HavocHeaders& h, const ServiceSpec& callee,
                         const std::string& endpoint, SeededStream& rng) {
    FaultOutcome out;
    if (h.tenancy != Tenancy::test) {
        return out;  // production traffic is never faulted
    }
    // One shared uniform draw per RPC attempt, taken lazily; every
    // probability-scoped fault in this attempt tests against the same draw.
    std::optional<double> draw;
    for (const auto& fault : h.faults) {
        if (!selector_matches(fault.selector, callee, endpoint)) continue;
        if (fault.scope.kind == ScopeKind::probability) {
            if (!draw) draw = rng.uniform01();
            if (*draw >= fault.scope.probability) continue;
        }
        out.applied = true;
        switch (fault.effect.kind) {
            case FaultKind::abort:
                out.action = FaultAction::aborted;
                out.abort_status = fault.effect.abort_status;
                break;
            case FaultKind::timeout:
                out.action = FaultAction::timed_out;
                break;
            case FaultKind::latency:
                out.action = FaultAction::delayed;
                out.delay_ms = fault.effect.extra_ms;
                break;
        }
        return out;
    }
    return out;
}

}  // namespace havoc
