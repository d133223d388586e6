#include "havoc/topology.hpp"

#include <algorithm>
#include <sstream>

#include "json.hpp"

namespace havoc {

using nlohmann::ordered_json;

std::string to_string(Criticality c) {
    return c == Criticality::critical ? "critical" : "non_critical";
}

Criticality criticality_from_string(const std::string& s) {
    if (s == "critical") return Criticality::critical;
    if (s == "non_critical") return Criticality::non_critical;
    throw ParseError("unknown criticality '" + s + "'");
}

std::string to_string(RelevanceCategory c) {
    switch (c) {
        case RelevanceCategory::direct: return "direct";
        case RelevanceCategory::indirect: return "indirect";
        case RelevanceCategory::supporting: return "supporting";
        case RelevanceCategory::unrelated: return "unrelated";
    }
    return "unrelated";
}

RelevanceCategory relevance_from_string(const std::string& s) {
    if (s == "direct") return RelevanceCategory::direct;
    if (s == "indirect") return RelevanceCategory::indirect;
    if (s == "supporting") return RelevanceCategory::supporting;
    if (s == "unrelated") return RelevanceCategory::unrelated;
    throw ParseError("unknown relevance category '" + s + "'");
}

std::string DegradationMarker::to_string() const {
    switch (mode) {
        case MarkerMode::missing: return element_id + ":missing";
        case MarkerMode::placeholder: return element_id + ":placeholder";
        case MarkerMode::delayed:
            return element_id + ":delayed:" + std::to_string(delay_ms);
    }
    return element_id + ":missing";
}

DegradationMarker DegradationMarker::parse(const std::string& text) {
    auto parts = split(text, ':');
    if (parts.size() < 2 || parts[0].empty()) {
        throw ParseError("bad degradation marker '" + text + "'");
    }
    DegradationMarker m;
    m.element_id = parts[0];
    if (parts[1] == "missing" && parts.size() == 2) {
        m.mode = MarkerMode::missing;
    } else if (parts[1] == "placeholder" && parts.size() == 2) {
        m.mode = MarkerMode::placeholder;
    } else if (parts[1] == "delayed" && parts.size() == 3) {
        m.mode = MarkerMode::delayed;
        try {
            m.delay_ms = std::stoll(parts[2]);
        } catch (const std::exception&) {
            throw ParseError("bad degradation marker delay in '" + text + "'");
        }
        if (m.delay_ms < 0) {
            throw ParseError("negative delay in degradation marker '" + text + "'");
        }
    } else {
        throw ParseError("bad degradation marker '" + text + "'");
    }
    return m;
}

const EndpointSpec* ServiceSpec::find_endpoint(const std::string& path) const {
    for (const auto& ep : endpoints) {
        if (ep.path == path) return &ep;
    }
    return nullptr;
}

std::string EdgeRef::to_string() const {
    return caller + " -> " + callee + ":" + endpoint;
}

const ServiceSpec& Topology::service(const std::string& name) const {
    auto it = services.find(name);
    if (it == services.end()) {
        throw ValidationError("unknown service '" + name + "'");
    }
    return it->second;
}

const ServiceSpec* Topology::find_service(const std::string& name) const {
    auto it = services.find(name);
    return it == services.end() ? nullptr : &it->second;
}

const DependencyEdge* Topology::find_edge(const EdgeRef& ref) const {
    auto it = services.find(ref.caller);
    if (it == services.end()) return nullptr;
    for (const auto& stage : it->second.call_plan) {
        for (const auto& edge : stage.parallel_calls) {
            if (edge.callee == ref.callee && edge.endpoint == ref.endpoint) {
                return &edge;
            }
        }
    }
    return nullptr;
}

std::vector<EdgeRef> Topology::all_edges() const {
    std::vector<EdgeRef> out;
    for (const auto& [name, svc] : services) {
        for (const auto& stage : svc.call_plan) {
            for (const auto& edge : stage.parallel_calls) {
                out.push_back({name, edge.callee, edge.endpoint});
            }
        }
    }
    return out;
}

std::vector<EdgeRef> Topology::declared_non_critical_edges() const {
    std::vector<EdgeRef> out;
    for (const auto& [name, svc] : services) {
        for (const auto& stage : svc.call_plan) {
            for (const auto& edge : stage.parallel_calls) {
                if (edge.declared_criticality == Criticality::non_critical) {
                    out.push_back({name, edge.callee, edge.endpoint});
                }
            }
        }
    }
    return out;
}

std::vector<EdgeRef> Topology::violations() const {
    std::vector<EdgeRef> out;
    for (const auto& [name, svc] : services) {
        for (const auto& stage : svc.call_plan) {
            for (const auto& edge : stage.parallel_calls) {
                if (edge.is_violation()) {
                    out.push_back({name, edge.callee, edge.endpoint});
                }
            }
        }
    }
    return out;
}

std::int64_t default_timeout_budget_ms(const ServiceSpec& callee) {
    return 4 * callee.base_latency_ms;
}

// ---- Validation ----

namespace {

// DFS cycle check over the service call graph, reachable from `start`.
// `state`: 0 unvisited, 1 on stack, 2 done.
void check_cycles(const Topology& topo, const std::string& start,
                  std::map<std::string, int>& state,
                  std::vector<std::string>& stack) {
    state[start] = 1;
    stack.push_back(start);
    const auto& svc = topo.service(start);
    for (const auto& st : svc.call_plan) {
        for (const auto& edge : st.parallel_calls) {
            int s = state[edge.callee];
            if (s == 1) {
                std::ostringstream oss;
                oss << "cycle in topology: ";
                auto it = std::find(stack.begin(), stack.end(), edge.callee);
                for (; it != stack.end(); ++it) oss << *it << " -> ";
                oss << edge.callee;
                throw ValidationError(oss.str());
            }
            if (s == 0) check_cycles(topo, edge.callee, state, stack);
        }
    }
    stack.pop_back();
    state[start] = 2;
}

}  // namespace

void validate_topology(const Topology& topo, const std::string& origin) {
    auto fail = [&](const std::string& msg) {
        throw ValidationError(origin + ": " + msg);
    };

    for (const auto& [name, svc] : topo.services) {
        if (name.empty()) fail("service with empty name");
        if (svc.name != name) fail("service map key '" + name + "' does not match name '" + svc.name + "'");
        if (svc.tier < kMinTier || svc.tier > kMaxTier) {
            fail("service '" + name + "' has tier " + std::to_string(svc.tier) +
                 " outside " + std::to_string(kMinTier) + ".." + std::to_string(kMaxTier));
        }
        if (svc.base_latency_ms < 1) {
            fail("service '" + name + "' has base_latency_ms < 1");
        }
        if (svc.jitter_ms < 0) {
            fail("service '" + name + "' has negative jitter_ms");
        }
        std::set<std::string> seen_paths;
        for (const auto& ep : svc.endpoints) {
            if (ep.path.empty()) fail("service '" + name + "' has endpoint with empty path");
            if (!seen_paths.insert(ep.path).second) {
                fail("service '" + name + "' declares endpoint '" + ep.path + "' twice");
            }
            if (ep.baseline_failure_weight < 0.0 || ep.baseline_failure_weight > 1.0) {
                fail("endpoint '" + name + ":" + ep.path + "' has baseline_failure_weight outside [0,1]");
            }
        }
        std::set<std::pair<std::string, std::string>> seen_edges;
        for (const auto& stage : svc.call_plan) {
            if (stage.parallel_calls.empty()) {
                fail("service '" + name + "' has an empty call stage");
            }
            for (const auto& edge : stage.parallel_calls) {
                EdgeRef ref{name, edge.callee, edge.endpoint};
                auto callee_it = topo.services.find(edge.callee);
                if (callee_it == topo.services.end()) {
                    fail("edge " + ref.to_string() + " names unknown callee '" + edge.callee + "'");
                }
                if (callee_it->second.find_endpoint(edge.endpoint) == nullptr) {
                    fail("edge " + ref.to_string() + " names unknown endpoint '" +
                         edge.callee + ":" + edge.endpoint + "'");
                }
                if (!seen_edges.insert({edge.callee, edge.endpoint}).second) {
                    fail("duplicate edge " + ref.to_string());
                }
                if (edge.timeout_budget_ms < 1) {
                    fail("edge " + ref.to_string() + " has timeout_budget_ms < 1");
                }
                if (edge.declared_criticality == Criticality::non_critical &&
                    !edge.fallback_payload.has_value()) {
                    fail("edge " + ref.to_string() +
                         " is declared non_critical but has no fallback_payload");
                }
            }
        }
    }

    for (const auto& [key, entry] : topo.entry_points) {
        auto it = topo.services.find(entry.service);
        if (it == topo.services.end()) {
            fail("entry point '" + key + "' names unknown service '" + entry.service + "'");
        }
        if (it->second.find_endpoint(entry.endpoint) == nullptr) {
            fail("entry point '" + key + "' names unknown endpoint '" +
                 entry.service + ":" + entry.endpoint + "'");
        }
    }

    std::map<std::string, int> state;
    std::vector<std::string> stack;
    try {
        for (const auto& [key, entry] : topo.entry_points) {
            if (state[entry.service] == 0) {
                check_cycles(topo, entry.service, state, stack);
            }
        }
    } catch (const ValidationError& e) {
        fail(e.what());
    }
}

// ---- JSON mapping ----

namespace {

EndpointSpec endpoint_from_json(const ordered_json& j, const std::string& svc) {
    EndpointSpec ep;
    if (!j.contains("path")) {
        throw ParseError("endpoint of service '" + svc + "' missing 'path'");
    }
    ep.path = j.at("path").get<std::string>();
    if (j.contains("relevance_tags")) {
        for (const auto& [flow, cat] : j.at("relevance_tags").items()) {
            ep.relevance_tags[flow] = relevance_from_string(cat.get<std::string>());
        }
    }
    ep.baseline_failure_weight = j.value("baseline_failure_weight", 0.0);
    return ep;
}

ordered_json endpoint_to_json(const EndpointSpec& ep) {
    ordered_json j;
    j["path"] = ep.path;
    if (!ep.relevance_tags.empty()) {
        ordered_json tags;
        for (const auto& [flow, cat] : ep.relevance_tags) {
            tags[flow] = to_string(cat);
        }
        j["relevance_tags"] = tags;
    }
    if (ep.baseline_failure_weight != 0.0) {
        j["baseline_failure_weight"] = ep.baseline_failure_weight;
    }
    return j;
}

}  // namespace

Topology load_topology(const std::string& document, const std::string& origin) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(document);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(origin + ": " + e.what());
    }

    Topology topo;
    try {
        topo.name = doc.value("name", "");
        if (!doc.contains("services") || !doc.at("services").is_array()) {
            throw ParseError("missing 'services' section");
        }
        for (const auto& js : doc.at("services")) {
            ServiceSpec svc;
            svc.name = js.at("name").get<std::string>();
            if (topo.services.count(svc.name)) {
                throw ParseError("service '" + svc.name + "' defined twice");
            }
            svc.tier = js.at("tier").get<int>();
            svc.base_latency_ms = js.value("base_latency_ms", std::int64_t{1});
            svc.jitter_ms = js.value("jitter_ms", std::int64_t{0});
            if (js.contains("endpoints")) {
                for (const auto& je : js.at("endpoints")) {
                    svc.endpoints.push_back(endpoint_from_json(je, svc.name));
                }
            }
            topo.services[svc.name] = std::move(svc);
        }

        // Edges: flat list, grouped into stages by (caller, stage index).
        if (doc.contains("edges")) {
            std::map<std::string, std::map<std::int64_t, CallStage>> plans;
            for (const auto& je : doc.at("edges")) {
                std::string caller = je.at("caller").get<std::string>();
                std::int64_t stage = je.value("stage", std::int64_t{0});
                if (stage < 0) {
                    throw ParseError("edge from '" + caller + "' has negative stage");
                }
                DependencyEdge edge;
                edge.callee = je.at("callee").get<std::string>();
                edge.endpoint = je.at("endpoint").get<std::string>();
                std::string decl = je.value("declared_criticality", std::string("critical"));
                edge.declared_criticality = criticality_from_string(decl);
                std::string actual = je.value("actual_criticality", decl);
                edge.actual_criticality = criticality_from_string(actual);
                edge.timeout_budget_ms = je.value("timeout_budget_ms", std::int64_t{0});
                if (je.contains("fallback_payload")) {
                    edge.fallback_payload =
                        DegradationMarker::parse(je.at("fallback_payload").get<std::string>());
                }
                auto caller_it = topo.services.find(caller);
                if (caller_it == topo.services.end()) {
                    throw ParseError("edge names unknown caller '" + caller + "'");
                }
                if (edge.timeout_budget_ms == 0) {
                    auto callee_it = topo.services.find(edge.callee);
                    if (callee_it != topo.services.end()) {
                        edge.timeout_budget_ms = default_timeout_budget_ms(callee_it->second);
                    }
                }
                plans[caller][stage].parallel_calls.push_back(std::move(edge));
            }
            for (auto& [caller, stages] : plans) {
                std::int64_t expected = 0;
                for (auto& [idx, stage] : stages) {
                    if (idx != expected) {
                        throw ParseError("service '" + caller + "' has non-contiguous stage indices");
                    }
                    topo.services[caller].call_plan.push_back(std::move(stage));
                    ++expected;
                }
            }
        }

        if (doc.contains("entry_points")) {
            for (const auto& [key, je] : doc.at("entry_points").items()) {
                topo.entry_points[key] = EntryPoint{je.at("service").get<std::string>(),
                                                   je.at("endpoint").get<std::string>()};
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(origin + ": " + e.what());
    } catch (const ParseError& e) {
        throw ParseError(origin + ": " + e.what());
    }

    validate_topology(topo, origin);
    return topo;
}

Topology load_topology_file(const std::string& path) {
    return load_topology(read_file(path), path);
}

std::string save_topology(const Topology& topo) {
    ordered_json doc;
    if (!topo.name.empty()) doc["name"] = topo.name;

    ordered_json services = ordered_json::array();
    for (const auto& [name, svc] : topo.services) {
        ordered_json js;
        js["name"] = svc.name;
        js["tier"] = svc.tier;
        js["base_latency_ms"] = svc.base_latency_ms;
        if (svc.jitter_ms != 0) js["jitter_ms"] = svc.jitter_ms;
        ordered_json eps = ordered_json::array();
        for (const auto& ep : svc.endpoints) eps.push_back(endpoint_to_json(ep));
        js["endpoints"] = eps;
        services.push_back(js);
    }
    doc["services"] = services;

    ordered_json edges = ordered_json::array();
    for (const auto& [name, svc] : topo.services) {
        for (std::size_t si = 0; si < svc.call_plan.size(); ++si) {
            for (const auto& edge : svc.call_plan[si].parallel_calls) {
                ordered_json je;
                je["caller"] = name;
                je["stage"] = si;
                je["callee"] = edge.callee;
                je["endpoint"] = edge.endpoint;
                je["declared_criticality"] = to_string(edge.declared_criticality);
                if (edge.actual_criticality != edge.declared_criticality) {
                    je["actual_criticality"] = to_string(edge.actual_criticality);
                }
                je["timeout_budget_ms"] = edge.timeout_budget_ms;
                if (edge.fallback_payload) {
                    je["fallback_payload"] = edge.fallback_payload->to_string();
                }
                edges.push_back(je);
            }
        }
    }
    doc["edges"] = edges;

    ordered_json entries;
    for (const auto& [key, entry] : topo.entry_points) {
        entries[key] = {{"service", entry.service}, {"endpoint", entry.endpoint}};
    }
    doc["entry_points"] = entries;

    return doc.dump(2) + "\n";
}

Topology plant_violation(const Topology& topo, const EdgeRef& edge) {
    Topology out = topo;
    auto svc_it = out.services.find(edge.caller);
    if (svc_it == out.services.end()) {
        throw ValidationError("plant_violation: unknown caller '" + edge.caller + "'");
    }
    for (auto& stage : svc_it->second.call_plan) {
        for (auto& e : stage.parallel_calls) {
            if (e.callee == edge.callee && e.endpoint == edge.endpoint) {
                if (e.declared_criticality == Criticality::critical) {
                    throw ValidationError("plant_violation: edge " + edge.to_string() +
                                          " is declared critical; a violation needs a "
                                          "non_critical declaration");
                }
                e.actual_criticality = Criticality::critical;
                return out;
            }
        }
    }
    throw ValidationError("plant_violation: unknown edge " + edge.to_string());
}

std::set<std::string> tier_services(const Topology& topo,
                                    const std::function<bool(TierLevel)>& pred) {
    std::set<std::string> out;
    for (const auto& [name, svc] : topo.services) {
        if (pred(svc.tier)) out.insert(name);
    }
    return out;
}

std::function<bool(TierLevel)> tier_at_least(TierLevel n) {
    return [n](TierLevel t) { return t >= n; };
}

}  // namespace havoc
