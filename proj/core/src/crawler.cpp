#include "havoc/crawler.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace havoc {

using nlohmann::ordered_json;

const ElementState* ScreenState::find(const std::string& element_id) const {
    for (const auto& e : elements) {
        if (e.element_id == element_id) return &e;
    }
    return nullptr;
}

namespace {

std::string humanize(const std::string& id) {
    std::string out = id;
    std::replace(out.begin(), out.end(), '_', ' ');
    return out;
}

}  // namespace

std::string screen_text(const ScreenState& screen) {
    std::ostringstream oss;
    oss << humanize(screen.screen_id);
    for (const auto& e : screen.elements) {
        switch (e.phase) {
            case ElementPhase::present:
                oss << " " << humanize(e.element_id);
                break;
            case ElementPhase::placeholder:
                oss << " " << humanize(e.element_id) << " placeholder";
                break;
            case ElementPhase::error_text:
                oss << " " << e.text;
                break;
            case ElementPhase::delayed:
            case ElementPhase::missing:
                break;  // nothing rendered yet
        }
    }
    return oss.str();
}

std::string to_string(ElementPhase p) {
    switch (p) {
        case ElementPhase::present: return "present";
        case ElementPhase::placeholder: return "placeholder";
        case ElementPhase::delayed: return "delayed";
        case ElementPhase::missing: return "missing";
        case ElementPhase::error_text: return "error_text";
    }
    return "?";
}

ElementPhase element_phase_from_string(const std::string& s) {
    if (s == "present") return ElementPhase::present;
    if (s == "placeholder") return ElementPhase::placeholder;
    if (s == "delayed") return ElementPhase::delayed;
    if (s == "missing") return ElementPhase::missing;
    if (s == "error_text") return ElementPhase::error_text;
    throw ParseError("unknown element phase '" + s + "'");
}

std::string screen_to_log_line(const ScreenState& s) {
    ordered_json j;
    j["kind"] = "screen";
    j["screen_id"] = s.screen_id;
    j["rendered_at_ms"] = s.rendered_at_ms;
    ordered_json elems = ordered_json::array();
    for (const ElementState& e : s.elements) {
        ordered_json je;
        je["id"] = e.element_id;
        je["phase"] = to_string(e.phase);
        if (e.phase == ElementPhase::delayed) {
            je["until_ms"] = e.until_ms;
        }
        if (!e.text.empty()) {
            je["text"] = e.text;
        }
        elems.push_back(std::move(je));
    }
    j["elements"] = std::move(elems);
    return j.dump();
}

ScreenState screen_from_log_line(const std::string& line) {
    try {
        ordered_json j = ordered_json::parse(line);
        if (j.value("kind", "") != "screen") {
            throw ParseError("log line is not a screen record");
        }
        ScreenState s;
        s.screen_id = j.at("screen_id").get<std::string>();
        s.rendered_at_ms = j.at("rendered_at_ms").get<std::int64_t>();
        for (const ordered_json& je : j.at("elements")) {
            ElementState e;
            e.element_id = je.at("id").get<std::string>();
            e.phase = element_phase_from_string(je.at("phase").get<std::string>());
            e.until_ms = je.value("until_ms", std::int64_t{0});
            e.text = je.value("text", "");
            s.elements.push_back(std::move(e));
        }
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad screen log line: ") + e.what());
    }
}

std::string transition_to_log_line(const ScreenTransition& t) {
    ordered_json j;
    j["kind"] = "transition";
    j["from_screen"] = t.from_screen;
    j["action_taken"] = t.action_taken;
    j["to_screen"] = t.to_screen;
    j["at_ms"] = t.at_ms;
    j["policy_reason"] = t.policy_reason;
    return j.dump();
}

ScreenTransition transition_from_log_line(const std::string& line) {
    try {
        ordered_json j = ordered_json::parse(line);
        if (j.value("kind", "") != "transition") {
            throw ParseError("log line is not a transition record");
        }
        ScreenTransition t;
        t.from_screen = j.at("from_screen").get<std::string>();
        t.action_taken = j.at("action_taken").get<std::string>();
        t.to_screen = j.at("to_screen").get<std::string>();
        t.at_ms = j.at("at_ms").get<std::int64_t>();
        t.policy_reason = j.value("policy_reason", "");
        return t;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad transition log line: ") + e.what());
    }
}

// ---- Flow definition ----

namespace {

ActionSpec action_from_json(const ordered_json& j) {
    ActionSpec a;
    a.action_id = j.at("action_id").get<std::string>();
    a.element_id = j.at("element_id").get<std::string>();
    return a;
}

AssertionPredicate predicate_from_json(const ordered_json& j) {
    AssertionPredicate p;
    if (j.contains("all_present")) {
        p.kind = PredicateKind::all_present;
        p.elements = j.at("all_present").get<std::vector<std::string>>();
    } else if (j.contains("element_present")) {
        p.kind = PredicateKind::element_present;
        p.elements = {j.at("element_present").get<std::string>()};
    } else if (j.contains("element_absent")) {
        p.kind = PredicateKind::element_absent;
        p.elements = {j.at("element_absent").get<std::string>()};
    } else {
        throw ParseError("assertion predicate needs all_present, element_present, or element_absent");
    }
    return p;
}

Assertion assertion_from_json(const ordered_json& j) {
    Assertion a;
    a.prompt = j.at("prompt").get<std::string>();
    std::string target = j.value("target", std::string("end_state"));
    if (target == "end_state") {
        a.target = AssertionTarget::end_state;
    } else if (target == "mosaic") {
        a.target = AssertionTarget::mosaic;
    } else {
        throw ParseError("unknown assertion target '" + target + "'");
    }
    a.predicate = predicate_from_json(j.at("predicate"));
    return a;
}

}  // namespace

FlowDefinition load_flow(const std::string& document, const std::string& origin) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(document);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(origin + ": " + e.what());
    }
    FlowDefinition flow;
    try {
        flow.flow_id = doc.at("flow_id").get<std::string>();
        for (const auto& js : doc.at("steps")) {
            StepSpec step;
            step.goal = js.at("goal").get<std::string>();
            step.screen_id = js.at("screen_id").get<std::string>();
            step.app_instance =
                app_instance_from_string(js.value("app_instance", std::string("rider")));
            if (js.contains("entry")) {
                step.entry_service = js.at("entry").value("service", "");
                step.entry_endpoint = js.at("entry").at("endpoint").get<std::string>();
            }
            step.elements = js.at("elements").get<std::vector<std::string>>();
            step.primary_action = action_from_json(js.at("primary_action"));
            if (js.contains("alternate_actions")) {
                for (const auto& ja : js.at("alternate_actions")) {
                    step.alternate_actions.push_back(action_from_json(ja));
                }
            }
            step.optimal_action_id =
                js.value("optimal_action", step.primary_action.action_id);
            flow.steps.push_back(std::move(step));
        }
        flow.end_state_assertion = assertion_from_json(doc.at("end_state_assertion"));
        if (doc.contains("mid_state_assertions")) {
            for (const auto& ja : doc.at("mid_state_assertions")) {
                flow.mid_state_assertions.push_back(assertion_from_json(ja));
            }
        }
        if (doc.contains("fault_configuration")) {
            for (const auto& jf : doc.at("fault_configuration")) {
                flow.fault_configuration.push_back(FaultSpec::parse(jf.get<std::string>()));
            }
        }
        flow.overall_timeout_ms = doc.value("overall_timeout_ms", std::int64_t{30'000});
        flow.per_element_wait_ms = doc.value("per_element_wait_ms", std::int64_t{3'000});
        flow.max_actions = doc.value("max_actions", 60);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(origin + ": " + e.what());
    }
    validate_flow(flow, origin);
    return flow;
}

FlowDefinition load_flow_file(const std::string& path) {
    return load_flow(read_file(path), path);
}

void validate_flow(const FlowDefinition& flow, const std::string& origin) {
    auto fail = [&](const std::string& msg) {
        throw ValidationError(origin + ": " + msg);
    };
    if (flow.flow_id.empty()) fail("flow has empty flow_id");
    if (flow.steps.empty()) fail("flow '" + flow.flow_id + "' has no steps");
    if (flow.overall_timeout_ms < 1) fail("overall_timeout_ms must be >= 1");
    if (flow.per_element_wait_ms < 0) fail("per_element_wait_ms must be >= 0");
    if (flow.max_actions < 1) fail("max_actions must be >= 1");
    for (std::size_t i = 0; i < flow.steps.size(); ++i) {
        const StepSpec& step = flow.steps[i];
        const std::string where = "step " + std::to_string(i + 1) + " ('" + step.screen_id + "')";
        if (step.screen_id.empty()) fail("step " + std::to_string(i + 1) + " has empty screen_id");
        if (step.screen_id == kErrorScreenId || step.screen_id == kLaunchScreenId) {
            fail(where + " uses a reserved screen id");
        }
        std::set<std::string> elems(step.elements.begin(), step.elements.end());
        if (elems.size() != step.elements.size()) fail(where + " lists an element twice");
        auto check_action = [&](const ActionSpec& a) {
            if (a.action_id.empty()) fail(where + " has an action with empty id");
            if (a.action_id == kActionWait || a.action_id == kActionBack ||
                a.action_id == kActionRetry) {
                fail(where + " uses reserved action id '" + a.action_id + "'");
            }
            if (!elems.count(a.element_id)) {
                fail(where + " action '" + a.action_id + "' targets element '" +
                     a.element_id + "' missing from the screen template");
            }
        };
        check_action(step.primary_action);
        for (const auto& a : step.alternate_actions) check_action(a);
    }
}

EntryPoint resolve_entry(const Topology& topo, const FlowDefinition& flow,
                         const StepSpec& step) {
    EntryPoint entry;
    if (step.entry_endpoint.empty()) {
        auto it = topo.entry_points.find(flow.flow_id);
        if (it == topo.entry_points.end()) {
            throw ValidationError("topology has no entry point for flow '" + flow.flow_id + "'");
        }
        entry = it->second;
    } else {
        if (!step.entry_service.empty() && topo.services.count(step.entry_service)) {
            entry.service = step.entry_service;
        } else {
            auto it = topo.entry_points.find(flow.flow_id);
            if (it == topo.entry_points.end()) {
                throw ValidationError("topology has no entry point for flow '" + flow.flow_id +
                                      "' to resolve step entry");
            }
            entry.service = it->second.service;
        }
        entry.endpoint = step.entry_endpoint;
    }
    if (topo.service(entry.service).find_endpoint(entry.endpoint) == nullptr) {
        throw ValidationError("flow '" + flow.flow_id + "': entry endpoint '" + entry.service +
                              ":" + entry.endpoint + "' does not exist in the topology");
    }
    return entry;
}

// ---- Rendering ----

ScreenState render_screen(const StepSpec& step, const ResponsePayload& payload,
                          std::int64_t payload_at_ms, std::int64_t now_ms) {
    ScreenState screen;
    screen.rendered_at_ms = now_ms;
    if (!payload.ok()) {
        screen.screen_id = kErrorScreenId;
        ElementState msg;
        msg.element_id = "error_message";
        msg.phase = ElementPhase::error_text;
        msg.text = payload.timed_out
                       ? "Something went wrong (request timed out). Please try again."
                       : "Something went wrong (HTTP " + std::to_string(payload.status_code) +
                             "). Please try again.";
        screen.elements.push_back(std::move(msg));
        return screen;
    }

    std::map<std::string, const DegradationMarker*> markers;
    for (const auto& m : payload.degradation_markers) {
        markers[m.element_id] = &m;  // at most one marker per element by set order
    }

    screen.screen_id = step.screen_id;
    for (const auto& id : step.elements) {
        ElementState e;
        e.element_id = id;
        auto it = markers.find(id);
        if (it == markers.end()) {
            e.phase = ElementPhase::present;
        } else {
            switch (it->second->mode) {
                case MarkerMode::missing:
                    e.phase = ElementPhase::missing;
                    break;
                case MarkerMode::placeholder:
                    e.phase = ElementPhase::placeholder;
                    break;
                case MarkerMode::delayed: {
                    const std::int64_t until = payload_at_ms + it->second->delay_ms;
                    if (now_ms >= until) {
                        e.phase = ElementPhase::present;
                    } else {
                        e.phase = ElementPhase::delayed;
                        e.until_ms = until;
                    }
                    break;
                }
            }
        }
        screen.elements.push_back(std::move(e));
    }
    return screen;
}

// ---- Policy ----

PolicyDecision select_action(const ScreenState& screen, const PolicyContext& ctx) {
    const StepSpec& step = ctx.step;
    PolicyDecision d;
    auto push = [&](const std::string& id) {
        if (std::find(d.ranked_actions.begin(), d.ranked_actions.end(), id) ==
            d.ranked_actions.end()) {
            d.ranked_actions.push_back(id);
        }
    };
    auto push_present_alternates = [&] {
        for (const auto& alt : step.alternate_actions) {
            const ElementState* e = screen.find(alt.element_id);
            if (e != nullptr && e->phase == ElementPhase::present) push(alt.action_id);
        }
    };

    const ElementState* required = screen.find(step.primary_action.element_id);
    const ElementPhase phase = required ? required->phase : ElementPhase::missing;

    if (phase == ElementPhase::present) {
        d.reason = "primary action available";
        push(step.primary_action.action_id);
        push_present_alternates();
    } else if (phase == ElementPhase::delayed || phase == ElementPhase::placeholder) {
        if (ctx.wait_spent_ms < ctx.flow.per_element_wait_ms) {
            d.reason = "required element '" + step.primary_action.element_id +
                       "' pending; waiting";
            push(kActionWait);
            push(step.primary_action.action_id);
            push_present_alternates();
        } else {
            d.reason = "wait budget exhausted for '" + step.primary_action.element_id +
                       "'; rerouting";
            push_present_alternates();
            push(step.primary_action.action_id);
        }
    } else {
        d.reason = "required element '" + step.primary_action.element_id +
                   "' missing; rerouting";
        push_present_alternates();
    }
    push(kActionBack);
    push(kActionRetry);
    return d;
}

// ---- Cycle detection ----

std::optional<CycleSignature> detect_cycle(const std::vector<ScreenTransition>& history,
                                           int window) {
    const int n = static_cast<int>(history.size());
    if (n < kCycleRepeats || window < kCycleRepeats) return std::nullopt;
    const int tail_begin = std::max(0, n - window);

    // Screens already seen before each index (from the whole history).
    std::set<std::string> seen;
    std::vector<bool> novel(n, false);
    for (int i = 0; i < n; ++i) {
        novel[i] = !seen.count(history[i].to_screen);
        seen.insert(history[i].from_screen);
        seen.insert(history[i].to_screen);
    }

    std::map<std::pair<std::string, std::string>, std::vector<int>> occurrences;
    for (int i = tail_begin; i < n; ++i) {
        occurrences[{history[i].from_screen, history[i].action_taken}].push_back(i);
    }
    for (const auto& [pair, idxs] : occurrences) {
        if (static_cast<int>(idxs.size()) < kCycleRepeats) continue;
        const int first = idxs.front();
        const int last = idxs.back();
        bool progressed = false;
        for (int i = first + 1; i <= last; ++i) {
            if (novel[i]) {
                progressed = true;
                break;
            }
        }
        if (!progressed) {
            return CycleSignature{pair.first, pair.second};
        }
    }
    return std::nullopt;
}

// ---- Assertions ----

bool DefaultAssertionClassifier::evaluate_predicate_on(
    const Assertion& a, const std::vector<ScreenState>& screens) {
    auto present_somewhere = [&](const std::string& id) {
        for (const auto& s : screens) {
            const ElementState* e = s.find(id);
            if (e != nullptr && e->phase == ElementPhase::present) return true;
        }
        return false;
    };
    auto present_on_final = [&](const std::string& id) {
        if (screens.empty()) return false;
        const ElementState* e = screens.back().find(id);
        return e != nullptr && e->phase == ElementPhase::present;
    };
    auto present = [&](const std::string& id) {
        return a.target == AssertionTarget::mosaic ? present_somewhere(id)
                                                   : present_on_final(id);
    };
    switch (a.predicate.kind) {
        case PredicateKind::all_present:
            return std::all_of(a.predicate.elements.begin(), a.predicate.elements.end(),
                               present);
        case PredicateKind::element_present:
            return !a.predicate.elements.empty() && present(a.predicate.elements.front());
        case PredicateKind::element_absent:
            return a.predicate.elements.empty() || !present(a.predicate.elements.front());
    }
    return false;
}

bool evaluate_predicate(const Assertion& assertion,
                        const std::vector<ScreenState>& mosaic) {
    return DefaultAssertionClassifier::evaluate_predicate_on(assertion, mosaic);
}

AssertionOutcome evaluate_assertion(AssertionClassifier& classifier,
                                    const Assertion& assertion,
                                    const std::vector<ScreenState>& mosaic) {
    AssertionOutcome out;
    out.prompt = assertion.prompt;
    out.ground_truth = evaluate_predicate(assertion, mosaic);
    std::optional<bool> answer = classifier.classify(assertion, mosaic);
    if (answer.has_value()) {
        out.answer = *answer;
    } else {
        out.answer = out.ground_truth;  // deterministic fallback
        out.degraded_mode = true;
    }
    return out;
}

// ---- Run execution ----

std::string to_string(FailReason r) {
    switch (r) {
        case FailReason::none: return "none";
        case FailReason::end_state_not_reached: return "end_state_not_reached";
        case FailReason::assertion_failed: return "assertion_failed";
        case FailReason::timeout: return "timeout";
        case FailReason::loop_abort: return "loop_abort";
    }
    return "none";
}

FailReason fail_reason_from_string(const std::string& s) {
    if (s == "none") return FailReason::none;
    if (s == "end_state_not_reached") return FailReason::end_state_not_reached;
    if (s == "assertion_failed") return FailReason::assertion_failed;
    if (s == "timeout") return FailReason::timeout;
    if (s == "loop_abort") return FailReason::loop_abort;
    throw ParseError("unknown fail reason '" + s + "'");
}

std::string RunResult::verdict_text() const {
    return passed ? "pass" : "fail(" + to_string(reason) + ")";
}

namespace {

struct StepRuntime {
    ResponsePayload payload;
    std::int64_t payload_at_ms = 0;
};

}  // namespace

RunResult run_flow(const Topology& topo, const FlowDefinition& flow,
                   ActionPolicy& policy, const HavocHeaders& headers,
                   std::uint64_t seed) {
    validate_flow(flow);
    RunResult result;
    SeededStream rng(seed);
    std::int64_t clock = 0;

    std::map<AppInstance, std::vector<RpcRecord>> app_logs;
    auto finish = [&](bool passed, FailReason reason) {
        result.passed = passed;
        result.reason = passed ? FailReason::none : reason;
        result.duration_ms = clock;
        std::vector<std::pair<AppInstance, std::vector<RpcRecord>>> logs;
        for (auto& [app, records] : app_logs) logs.emplace_back(app, std::move(records));
        result.merged_log = merge_app_logs(logs);
        return result;
    };

    std::size_t step_idx = 0;
    StepRuntime rt;
    std::string current_screen = kLaunchScreenId;
    std::int64_t wait_spent = 0;
    int error_retries = 0;
    bool forced_recovery_used = false;
    bool force_alternative = false;
    std::string cycle_action;
    std::size_t cycle_check_from = 0;

    auto issue_request = [&](const StepSpec& step) {
        EntryPoint entry = resolve_entry(topo, flow, step);
        ExecutionResult res =
            execute_request_at(topo, entry, headers, rng, clock, step.app_instance);
        clock = res.trace.root.record.end_ms;
        auto& log = app_logs[step.app_instance];
        log.insert(log.end(), res.log.begin(), res.log.end());
        rt.payload = std::move(res.payload);
        rt.payload_at_ms = clock;
    };

    auto record_transition = [&](const std::string& from, const std::string& action,
                                 const std::string& to, const std::string& reason) {
        result.transitions.push_back({from, action, to, clock, reason});
        current_screen = to;
    };

    issue_request(flow.steps[step_idx]);

    while (true) {
        if (clock > flow.overall_timeout_ms) {
            // The harness cuts the run off at the deadline; anything past it
            // is not observed.
            clock = flow.overall_timeout_ms;
            return finish(false, FailReason::timeout);
        }
        if (result.action_count >= flow.max_actions) {
            return finish(false, FailReason::end_state_not_reached);
        }

        const StepSpec& step = flow.steps[step_idx];
        ScreenState screen = render_screen(step, rt.payload, rt.payload_at_ms, clock);
        result.screens_mosaic.push_back(screen);

        // Cycle check covers transitions made since the last forced recovery.
        std::vector<ScreenTransition> window(result.transitions.begin() + cycle_check_from,
                                             result.transitions.end());
        if (auto cycle = detect_cycle(window)) {
            if (forced_recovery_used) {
                return finish(false, FailReason::loop_abort);
            }
            forced_recovery_used = true;
            force_alternative = true;
            cycle_action = cycle->action;
            cycle_check_from = result.transitions.size();
        }

        if (screen.screen_id == kErrorScreenId) {
            // Backend failure: the runner retries a bounded number of times,
            // then gives up. This is not a policy decision.
            if (error_retries >= kErrorRetryLimit) {
                return finish(false, FailReason::end_state_not_reached);
            }
            ++error_retries;
            ++result.action_count;
            const std::string from = screen.screen_id;
            issue_request(step);
            ScreenState next = render_screen(step, rt.payload, rt.payload_at_ms, clock);
            record_transition(from, kActionRetry, next.screen_id, "backend error; retrying");
            continue;
        }
        error_retries = 0;

        PolicyContext ctx{flow, step, wait_spent, clock};
        PolicyDecision decision = policy.decide(screen, ctx);
        if (decision.ranked_actions.empty()) {
            decision.ranked_actions.push_back(kActionRetry);
            decision.reason = "policy returned nothing; retrying";
        }

        std::string chosen = decision.ranked_actions.front();
        std::string reason = decision.reason;
        if (force_alternative) {
            force_alternative = false;
            // Skip over the looping action; take the next ranked alternative.
            auto it = std::find_if(decision.ranked_actions.begin(), decision.ranked_actions.end(),
                                   [&](const std::string& a) { return a != cycle_action; });
            if (it == decision.ranked_actions.end()) {
                return finish(false, FailReason::loop_abort);
            }
            chosen = *it;
            reason = "loop detected on '" + cycle_action + "'; forcing alternative";
        }

        result.decisions.push_back({static_cast<int>(step_idx), decision.ranked_actions,
                                    chosen, step.optimal_action_id});
        ++result.action_count;

        const bool is_primary = chosen == step.primary_action.action_id;
        const bool is_alternate =
            std::any_of(step.alternate_actions.begin(), step.alternate_actions.end(),
                        [&](const ActionSpec& a) { return a.action_id == chosen; });

        if (is_primary || is_alternate) {
            const ActionSpec& act =
                is_primary ? step.primary_action
                           : *std::find_if(step.alternate_actions.begin(),
                                           step.alternate_actions.end(),
                                           [&](const ActionSpec& a) { return a.action_id == chosen; });
            const ElementState* elem = screen.find(act.element_id);
            if (elem == nullptr || elem->phase != ElementPhase::present) {
                record_transition(screen.screen_id, chosen, screen.screen_id,
                                  "element '" + act.element_id + "' not actionable");
                continue;
            }
            if (step_idx + 1 == flow.steps.size()) {
                // Final step's action completes the flow on its screen.
                record_transition(screen.screen_id, chosen, screen.screen_id, reason);
                const bool ok = evaluate_predicate(flow.end_state_assertion,
                                                   result.screens_mosaic);
                return finish(ok, ok ? FailReason::none : FailReason::assertion_failed);
            }
            ++step_idx;
            wait_spent = 0;
            std::string from = screen.screen_id;
            issue_request(flow.steps[step_idx]);
            ScreenState next =
                render_screen(flow.steps[step_idx], rt.payload, rt.payload_at_ms, clock);
            record_transition(from, chosen, next.screen_id, reason);
            continue;
        }

        if (chosen == kActionWait) {
            clock += kWaitQuantumMs;
            wait_spent += kWaitQuantumMs;
            record_transition(screen.screen_id, kActionWait, screen.screen_id, reason);
            continue;
        }
        if (chosen == kActionBack) {
            std::string from = screen.screen_id;
            if (step_idx > 0) {
                --step_idx;
                wait_spent = 0;
            }
            issue_request(flow.steps[step_idx]);
            ScreenState next =
                render_screen(flow.steps[step_idx], rt.payload, rt.payload_at_ms, clock);
            record_transition(from, kActionBack, next.screen_id, reason);
            continue;
        }
        if (chosen == kActionRetry) {
            std::string from = screen.screen_id;
            issue_request(step);
            ScreenState next = render_screen(step, rt.payload, rt.payload_at_ms, clock);
            record_transition(from, kActionRetry, next.screen_id, reason);
            continue;
        }
        record_transition(screen.screen_id, chosen, screen.screen_id,
                          "unrecognized action");
    }
}

}  // namespace havoc
