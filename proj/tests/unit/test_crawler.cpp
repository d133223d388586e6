#include <doctest.h>

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "havoc/crawler.hpp"
#include "havoc/simmesh.hpp"
#include "havoc/topology.hpp"
#include "support/synth.hpp"

using namespace havoc;
using testsupport::make_headers;

namespace {

std::string data_path(const std::string& rel) {
    return std::string(HAVOC_DATA_DIR) + "/" + rel;
}

const Topology& ride_min() {
    static const Topology topo = load_topology_file(data_path("topologies/ride-min.json"));
    return topo;
}

const Topology& ride_city() {
    static const Topology topo = load_topology_file(data_path("topologies/ride-city.json"));
    return topo;
}

const FlowDefinition& core_trip() {
    static const FlowDefinition flow = load_flow_file(data_path("flows/core-trip.json"));
    return flow;
}

const FlowDefinition& eats_order() {
    static const FlowDefinition flow = load_flow_file(data_path("flows/eats-order.json"));
    return flow;
}

ElementState elem(const std::string& id, ElementPhase phase) {
    ElementState e;
    e.element_id = id;
    e.phase = phase;
    return e;
}

ScreenState screen_of(const std::string& id, std::vector<ElementState> elements) {
    ScreenState s;
    s.screen_id = id;
    s.elements = std::move(elements);
    return s;
}

void check_transitions_chain(const std::vector<ScreenTransition>& ts) {
    for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
        CAPTURE(i);
        CHECK(ts[i].to_screen == ts[i + 1].from_screen);
    }
}

int count_chosen(const RunResult& r, const std::string& action) {
    return static_cast<int>(std::count_if(r.decisions.begin(), r.decisions.end(),
                                          [&](const DecisionRecord& d) {
                                              return d.chosen == action;
                                          }));
}

// Policy that always answers the same ranking, regardless of the screen.
class ScriptedPolicy : public ActionPolicy {
public:
    explicit ScriptedPolicy(std::vector<std::string> ranking)
        : ranking_(std::move(ranking)) {}

    PolicyDecision decide(const ScreenState&, const PolicyContext&) override {
        return {ranking_, "scripted"};
    }

private:
    std::vector<std::string> ranking_;
};

// Default policy, except it answers `back` the first time `screen_id`
// renders.
class BackOncePolicy : public ActionPolicy {
public:
    explicit BackOncePolicy(std::string screen_id) : screen_id_(std::move(screen_id)) {}

    PolicyDecision decide(const ScreenState& screen, const PolicyContext& ctx) override {
        if (!fired_ && screen.screen_id == screen_id_) {
            fired_ = true;
            return {{kActionBack}, "second thoughts"};
        }
        return select_action(screen, ctx);
    }

private:
    std::string screen_id_;
    bool fired_ = false;
};

class AbstainingClassifier : public AssertionClassifier {
public:
    std::optional<bool> classify(const Assertion&,
                                 const std::vector<ScreenState>&) override {
        return std::nullopt;
    }
};

class LyingClassifier : public AssertionClassifier {
public:
    std::optional<bool> classify(const Assertion& a,
                                 const std::vector<ScreenState>& s) override {
        return !evaluate_predicate(a, s);
    }
};

}  // namespace

TEST_CASE("screen text humanizes ids and inlines error text") {
    ElementState err = elem("error_message", ElementPhase::error_text);
    err.text = "Something went wrong (HTTP 503). Please try again.";
    const ScreenState s = screen_of(
        "product_select", {elem("fare_estimate", ElementPhase::present),
                           elem("route_preview", ElementPhase::placeholder),
                           elem("pickup_eta", ElementPhase::delayed),
                           elem("surge_badge", ElementPhase::missing), err});
    CHECK(screen_text(s) ==
          "product select fare estimate route preview placeholder "
          "Something went wrong (HTTP 503). Please try again.");
}

TEST_CASE("render_screen maps payload state onto the template") {
    StepSpec step;
    step.screen_id = "s";
    step.elements = {"a", "b", "c", "d"};
    step.primary_action = {"go", "a"};

    SUBCASE("failed payloads render the error screen") {
        ResponsePayload p;
        p.status_code = 503;
        const ScreenState s = render_screen(step, p, 100, 100);
        CHECK(s.screen_id == kErrorScreenId);
        REQUIRE(s.elements.size() == 1);
        CHECK(s.elements[0].phase == ElementPhase::error_text);
        CHECK(s.elements[0].text.find("HTTP 503") != std::string::npos);

        ResponsePayload t;
        t.timed_out = true;
        CHECK(render_screen(step, t, 100, 100).elements[0].text.find("timed out") !=
              std::string::npos);
    }

    SUBCASE("markers downgrade template elements") {
        ResponsePayload p;
        p.status_code = 200;
        p.degradation_markers = {DegradationMarker::parse("b:missing"),
                                 DegradationMarker::parse("c:placeholder"),
                                 DegradationMarker::parse("d:delayed:500")};
        const ScreenState early = render_screen(step, p, 1000, 1000);
        CHECK(early.rendered_at_ms == 1000);
        CHECK(early.find("a")->phase == ElementPhase::present);
        CHECK(early.find("b")->phase == ElementPhase::missing);
        CHECK(early.find("c")->phase == ElementPhase::placeholder);
        CHECK(early.find("d")->phase == ElementPhase::delayed);
        CHECK(early.find("d")->until_ms == 1500);

        // The delayed element flips to present once the clock reaches
        // payload_at + delay; the placeholder never does.
        const ScreenState late = render_screen(step, p, 1000, 1500);
        CHECK(late.find("d")->phase == ElementPhase::present);
        CHECK(late.find("c")->phase == ElementPhase::placeholder);
    }
}

TEST_CASE("screen and transition log lines round-trip") {
    ElementState d = elem("d", ElementPhase::delayed);
    d.until_ms = 1500;
    ElementState err = elem("error_message", ElementPhase::error_text);
    err.text = "boom";
    ScreenState s = screen_of("cart", {elem("a", ElementPhase::present), d, err});
    s.rendered_at_ms = 777;
    CHECK(screen_from_log_line(screen_to_log_line(s)) == s);

    const ScreenTransition t{"home", "tap_where_to", "destination_picker", 64,
                             "primary action available"};
    CHECK(transition_from_log_line(transition_to_log_line(t)) == t);

    CHECK_THROWS_AS(screen_from_log_line(R"({"kind":"rpc"})"), ParseError);
    CHECK_THROWS_AS(screen_from_log_line(
                        R"({"kind":"screen","screen_id":"s","rendered_at_ms":0,
                            "elements":[{"id":"x","phase":"sideways"}]})"),
                    ParseError);
    CHECK_THROWS_AS(transition_from_log_line("not json"), ParseError);
    CHECK_THROWS_AS(transition_from_log_line(R"({"kind":"screen"})"), ParseError);
}

TEST_CASE("default policy ranks by element availability") {
    FlowDefinition flow;
    flow.flow_id = "f";
    flow.per_element_wait_ms = 3000;
    StepSpec step;
    step.screen_id = "s";
    step.elements = {"a", "b", "c"};
    step.primary_action = {"go", "a"};
    step.alternate_actions = {{"alt_b", "b"}, {"alt_c", "c"}};
    flow.steps.push_back(step);

    auto decide = [&](const ScreenState& screen, std::int64_t wait_spent) {
        PolicyContext ctx{flow, flow.steps[0], wait_spent, 0};
        return select_action(screen, ctx);
    };

    SUBCASE("primary first when its element is present") {
        const auto d = decide(screen_of("s", {elem("a", ElementPhase::present),
                                              elem("b", ElementPhase::present),
                                              elem("c", ElementPhase::missing)}),
                              0);
        CHECK(d.ranked_actions ==
              std::vector<std::string>{"go", "alt_b", kActionBack, kActionRetry});
        CHECK(d.reason == "primary action available");
    }

    SUBCASE("wait leads while the element is pending and budget remains") {
        const auto d = decide(screen_of("s", {elem("a", ElementPhase::delayed),
                                              elem("b", ElementPhase::present),
                                              elem("c", ElementPhase::present)}),
                              1000);
        CHECK(d.ranked_actions == std::vector<std::string>{kActionWait, "go", "alt_b",
                                                           "alt_c", kActionBack,
                                                           kActionRetry});
        CHECK(d.reason.find("pending") != std::string::npos);
    }

    SUBCASE("exhausted wait budget reroutes to alternates") {
        const auto d = decide(screen_of("s", {elem("a", ElementPhase::placeholder),
                                              elem("b", ElementPhase::present),
                                              elem("c", ElementPhase::present)}),
                              3000);
        CHECK(d.ranked_actions == std::vector<std::string>{"alt_b", "alt_c", "go",
                                                           kActionBack, kActionRetry});
        CHECK(d.reason.find("exhausted") != std::string::npos);
    }

    SUBCASE("missing element skips straight to alternates") {
        const auto d = decide(screen_of("s", {elem("a", ElementPhase::missing),
                                              elem("b", ElementPhase::present),
                                              elem("c", ElementPhase::missing)}),
                              0);
        CHECK(d.ranked_actions ==
              std::vector<std::string>{"alt_b", kActionBack, kActionRetry});
        CHECK(d.reason.find("missing") != std::string::npos);
    }
}

TEST_CASE("cycle detection needs repeats without progress") {
    auto self_loop = [](const std::string& screen, const std::string& action) {
        return ScreenTransition{screen, action, screen, 0, ""};
    };

    CHECK_FALSE(detect_cycle({self_loop("s", "poke"), self_loop("s", "poke")}).has_value());

    const auto cycle = detect_cycle(
        {self_loop("s", "poke"), self_loop("s", "poke"), self_loop("s", "poke")});
    REQUIRE(cycle.has_value());
    CHECK(cycle->screen_id == "s");
    CHECK(cycle->action == "poke");

    // A transition to a brand-new screen between the repeats counts as
    // progress.
    CHECK_FALSE(detect_cycle({self_loop("s", "poke"),
                              ScreenTransition{"s", "go", "fresh", 0, ""},
                              self_loop("s", "poke"), self_loop("s", "poke")})
                    .has_value());

    // Repeats older than the window are ignored.
    std::vector<ScreenTransition> history{self_loop("s", "poke"), self_loop("s", "poke"),
                                          self_loop("s", "poke"),
                                          ScreenTransition{"s", "go", "t", 0, ""},
                                          ScreenTransition{"t", "go", "u", 0, ""},
                                          ScreenTransition{"u", "go", "v", 0, ""}};
    CHECK(detect_cycle(history).has_value());
    CHECK_FALSE(detect_cycle(history, /*window=*/3).has_value());
}

TEST_CASE("assertion predicates and classifier fallback") {
    const ScreenState first = screen_of("a", {elem("x", ElementPhase::present)});
    const ScreenState last = screen_of(
        "b", {elem("y", ElementPhase::present), elem("z", ElementPhase::placeholder)});
    const std::vector<ScreenState> mosaic{first, last};

    Assertion end_all;
    end_all.target = AssertionTarget::end_state;
    end_all.predicate = {PredicateKind::all_present, {"x", "y"}};
    CHECK_FALSE(evaluate_predicate(end_all, mosaic));  // x not on the final screen

    Assertion anywhere;
    anywhere.target = AssertionTarget::mosaic;
    anywhere.predicate = {PredicateKind::element_present, {"x"}};
    CHECK(evaluate_predicate(anywhere, mosaic));

    // A placeholder does not count as present.
    Assertion absent;
    absent.target = AssertionTarget::mosaic;
    absent.predicate = {PredicateKind::element_absent, {"z"}};
    CHECK(evaluate_predicate(absent, mosaic));

    AbstainingClassifier abstain;
    const AssertionOutcome fallback = evaluate_assertion(abstain, anywhere, mosaic);
    CHECK(fallback.degraded_mode);
    CHECK(fallback.answer == fallback.ground_truth);

    LyingClassifier liar;
    const AssertionOutcome lied = evaluate_assertion(liar, anywhere, mosaic);
    CHECK_FALSE(lied.degraded_mode);
    CHECK(lied.ground_truth);
    CHECK_FALSE(lied.answer);
}

TEST_CASE("flow files load with expected structure") {
    const FlowDefinition& trip = core_trip();
    CHECK(trip.flow_id == "core-trip");
    REQUIRE(trip.steps.size() == 6);
    CHECK(trip.steps[0].app_instance == AppInstance::rider);
    CHECK(trip.steps[3].app_instance == AppInstance::driver);
    CHECK(trip.steps[3].entry_service == "driver_gateway");
    CHECK(trip.steps[3].entry_endpoint == "/driver/offer");
    // Ground truth defaults to the primary action.
    for (const auto& s : trip.steps) CHECK(s.optimal_action_id == s.primary_action.action_id);
    CHECK(trip.end_state_assertion.predicate.kind == PredicateKind::all_present);
    CHECK(trip.end_state_assertion.predicate.elements ==
          std::vector<std::string>{"rating_stars", "tipping_options"});
    CHECK(trip.mid_state_assertions.size() == 2);
    CHECK(trip.overall_timeout_ms == 30000);
    CHECK(trip.max_actions == 40);

    const FlowDefinition& eats = eats_order();
    REQUIRE(eats.steps.size() == 4);
    CHECK(eats.steps[1].alternate_actions.size() == 1);
    CHECK(eats.steps[1].alternate_actions[0].action_id == "reorder_last");
}

TEST_CASE("flow validation names the offending step") {
    const char* base = R"({
      "flow_id": "mini",
      "steps": [
        {"goal": "g", "screen_id": "s0",
         "entry": {"service": "api_gateway", "endpoint": "/ride/home"},
         "elements": ["go_button"],
         "primary_action": {"action_id": "tap_go", "element_id": "go_button"}}
      ],
      "end_state_assertion": {"prompt": "done?", "target": "end_state",
                              "predicate": {"all_present": ["go_button"]}}
    })";
    CHECK(load_flow(base).steps.size() == 1);

    auto mutated = [&](const std::string& from, const std::string& to) {
        std::string doc = base;
        const auto pos = doc.find(from);
        REQUIRE(pos != std::string::npos);
        doc.replace(pos, from.size(), to);
        return doc;
    };

    CHECK_THROWS_WITH_AS(load_flow(mutated("\"s0\"", "\"error_screen\"")),
                         doctest::Contains("reserved screen id"), ValidationError);
    CHECK_THROWS_WITH_AS(load_flow(mutated("\"tap_go\"", "\"wait\"")),
                         doctest::Contains("reserved action id"), ValidationError);
    CHECK_THROWS_WITH_AS(
        load_flow(mutated("\"element_id\": \"go_button\"", "\"element_id\": \"ghost\"")),
        doctest::Contains("missing from the screen template"), ValidationError);
    CHECK_THROWS_WITH_AS(load_flow(mutated("[\"go_button\"]", "[\"go_button\", \"go_button\"]")),
                         doctest::Contains("element twice"), ValidationError);
    CHECK_THROWS_WITH_AS(load_flow(mutated("\"mini\"", "\"\"")),
                         doctest::Contains("empty flow_id"), ValidationError);
    CHECK_THROWS_AS(load_flow(mutated("{\"all_present\": [\"go_button\"]}",
                                      "{\"sometimes_present\": [\"go_button\"]}")),
                    ParseError);
    CHECK_THROWS_AS(load_flow("{"), ParseError);

    std::string flow_doc = base;
    flow_doc.insert(flow_doc.rfind('}'), R"(, "max_actions": 0)");
    CHECK_THROWS_WITH_AS(load_flow(flow_doc), doctest::Contains("max_actions"),
                         ValidationError);
}

TEST_CASE("step entries resolve against the topology with fallback") {
    const FlowDefinition& flow = core_trip();

    CHECK(resolve_entry(ride_min(), flow, flow.steps[0]) ==
          EntryPoint{"api_gateway", "/ride/home"});
    // ride-min has no driver_gateway; the step falls back to the flow's
    // registered entry service but keeps its own endpoint.
    CHECK(resolve_entry(ride_min(), flow, flow.steps[3]) ==
          EntryPoint{"api_gateway", "/driver/offer"});
    CHECK(resolve_entry(ride_city(), flow, flow.steps[3]) ==
          EntryPoint{"driver_gateway", "/driver/offer"});

    StepSpec bad = flow.steps[0];
    bad.entry_service = "api_gateway";
    bad.entry_endpoint = "/no/such/path";
    CHECK_THROWS_WITH_AS(resolve_entry(ride_min(), flow, bad),
                         doctest::Contains("does not exist"), ValidationError);

    FlowDefinition ghost = flow;
    ghost.flow_id = "ghost";
    StepSpec no_entry = ghost.steps[0];
    no_entry.entry_service.clear();
    no_entry.entry_endpoint.clear();
    CHECK_THROWS_WITH_AS(resolve_entry(ride_min(), ghost, no_entry),
                         doctest::Contains("no entry point"), ValidationError);
}

TEST_CASE("healthy backends let the default policy walk the whole flow") {
    DefaultPolicy policy;
    const RunResult r = run_flow(ride_min(), core_trip(), policy, make_headers({}), 21);

    CHECK(r.passed);
    CHECK(r.reason == FailReason::none);
    CHECK(r.verdict_text() == "pass");
    CHECK(r.action_count == 6);
    REQUIRE(r.decisions.size() == 6);
    for (std::size_t i = 0; i < r.decisions.size(); ++i) {
        CHECK(r.decisions[i].step_index == static_cast<int>(i));
        CHECK(r.decisions[i].chosen == r.decisions[i].ground_truth);
        CHECK(r.decisions[i].ranked_actions.front() == r.decisions[i].chosen);
    }

    REQUIRE(r.transitions.size() == 6);
    const std::vector<std::string> screens{"home",        "destination_picker",
                                           "product_select", "driver_offer",
                                           "trip_progress",  "trip_rating"};
    for (std::size_t i = 0; i < r.transitions.size(); ++i) {
        CHECK(r.transitions[i].from_screen == screens[i]);
    }
    CHECK(r.transitions.back().to_screen == "trip_rating");  // final action self-completes
    check_transitions_chain(r.transitions);

    REQUIRE(r.screens_mosaic.size() == 6);
    CHECK(r.screens_mosaic.front().screen_id == "home");
    CHECK(r.screens_mosaic.back().screen_id == "trip_rating");

    // The driver step's backend traffic is tagged with the driver app and
    // interleaved into one log stream.
    CHECK(std::any_of(r.merged_log.begin(), r.merged_log.end(), [](const RpcRecord& rec) {
        return rec.app_instance == AppInstance::driver && rec.endpoint == "/driver/offer";
    }));
    CHECK(std::all_of(r.merged_log.begin(), r.merged_log.end(), [](const RpcRecord& rec) {
        return rec.app_instance == AppInstance::rider ||
               rec.app_instance == AppInstance::driver;
    }));
    CHECK(r.duration_ms == r.transitions.back().at_ms);
}

TEST_CASE("a persistently failing backend exhausts runner retries") {
    DefaultPolicy policy;
    const RunResult r = run_flow(ride_min(), core_trip(), policy,
                                 make_headers({"abort(503);svc=api_gateway;all"}), 3);

    CHECK_FALSE(r.passed);
    CHECK(r.reason == FailReason::end_state_not_reached);
    CHECK(r.verdict_text() == "fail(end_state_not_reached)");
    // Runner retries are not policy decisions.
    CHECK(r.action_count == kErrorRetryLimit);
    CHECK(r.decisions.empty());
    REQUIRE(r.transitions.size() == 2);
    for (const auto& t : r.transitions) {
        CHECK(t.from_screen == kErrorScreenId);
        CHECK(t.to_screen == kErrorScreenId);
        CHECK(t.action_taken == kActionRetry);
        CHECK(t.policy_reason == "backend error; retrying");
    }
    CHECK(r.screens_mosaic.size() == 3);
    for (const auto& s : r.screens_mosaic) CHECK(s.screen_id == kErrorScreenId);
}

TEST_CASE("flaky backends either recover through retries or stop cleanly") {
    DefaultPolicy policy;
    int recovered = 0;
    int gave_up = 0;
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        CAPTURE(seed);
        const RunResult r = run_flow(ride_min(), core_trip(), policy,
                                     make_headers({"abort(502);svc=api_gateway;p=0.35"}),
                                     seed);
        check_transitions_chain(r.transitions);
        const int runner_retries = static_cast<int>(
            std::count_if(r.transitions.begin(), r.transitions.end(),
                          [](const ScreenTransition& t) {
                              return t.policy_reason == "backend error; retrying";
                          }));
        CHECK(r.action_count ==
              static_cast<int>(r.decisions.size()) + runner_retries);
        if (r.passed) {
            if (runner_retries > 0) ++recovered;
        } else {
            CHECK(r.reason == FailReason::end_state_not_reached);
            ++gave_up;
        }
    }
    CHECK(recovered > 0);
    CHECK(gave_up > 0);
}

TEST_CASE("a delayed element is waited out, surviving one detected wait loop") {
    DefaultPolicy policy;
    // fare answers far past its 900ms budget, so the fare edge times out and
    // the ride button renders delayed(1200ms) from the fallback.
    const RunResult r = run_flow(ride_city(), core_trip(), policy,
                                 make_headers({"latency(2000);svc=fare;all"}), 17);

    CHECK(r.passed);
    CHECK(count_chosen(r, kActionWait) == 5);  // 1200ms at 250ms per wait
    for (const auto& d : r.decisions) {
        if (d.chosen == kActionWait) {
            CHECK(d.step_index == 2);
            // The primary action stays ranked right behind wait.
            REQUIRE(d.ranked_actions.size() >= 2);
            CHECK(d.ranked_actions[0] == kActionWait);
            CHECK(d.ranked_actions[1] == "tap_request_ride");
        }
    }

    // Three identical waits look like a loop; the runner forces one
    // alternative (the not-yet-actionable primary), then resumes waiting.
    CHECK(std::count_if(r.transitions.begin(), r.transitions.end(),
                        [](const ScreenTransition& t) {
                            return t.policy_reason.find("not actionable") !=
                                   std::string::npos;
                        }) == 1);
    CHECK(r.decisions.size() == 12);
    check_transitions_chain(r.transitions);

    // The delayed phase itself was observed on screen before resolving.
    CHECK(std::any_of(r.screens_mosaic.begin(), r.screens_mosaic.end(),
                      [](const ScreenState& s) {
                          const ElementState* e = s.find("request_ride_button");
                          return e != nullptr && e->phase == ElementPhase::delayed;
                      }));
}

TEST_CASE("a missing primary element reroutes to an alternate action") {
    DefaultPolicy policy;
    // restaurant fails; its fallback drops the header element, so the policy
    // reroutes to the search alternate without waiting.
    const RunResult r = run_flow(ride_city(), eats_order(), policy,
                                 make_headers({"abort(503);svc=restaurant;all"}), 9);

    CHECK(r.passed);
    REQUIRE(!r.decisions.empty());
    CHECK(r.decisions[0].chosen == "search_restaurant");
    CHECK(r.decisions[0].ground_truth == "open_restaurant");
    CHECK(count_chosen(r, kActionWait) == 0);
    CHECK(r.decisions.size() == 4);
}

TEST_CASE("a placeholder that never resolves ends in loop abort") {
    DefaultPolicy policy;
    // menu's fallback renders the add button as a placeholder, which wait
    // never resolves; the wait loop trips cycle detection twice.
    const RunResult r = run_flow(ride_city(), eats_order(), policy,
                                 make_headers({"abort(503);svc=menu;all"}), 9);

    CHECK_FALSE(r.passed);
    CHECK(r.reason == FailReason::loop_abort);
    CHECK(count_chosen(r, kActionWait) >= 3);
    CHECK(std::any_of(r.screens_mosaic.begin(), r.screens_mosaic.end(),
                      [](const ScreenState& s) {
                          const ElementState* e = s.find("add_item_button");
                          return e != nullptr && e->phase == ElementPhase::placeholder;
                      }));
}

TEST_CASE("an off-script policy is stopped by cycle detection") {
    ScriptedPolicy policy({"poke"});
    const RunResult r = run_flow(ride_min(), core_trip(), policy, make_headers({}), 4);

    CHECK_FALSE(r.passed);
    CHECK(r.reason == FailReason::loop_abort);
    CHECK(r.action_count == 3);
    REQUIRE(r.transitions.size() == 3);
    for (const auto& t : r.transitions) {
        CHECK(t.from_screen == "home");
        CHECK(t.to_screen == "home");
        CHECK(t.policy_reason == "unrecognized action");
    }
}

TEST_CASE("an empty policy ranking degenerates to retry, then loop abort") {
    ScriptedPolicy policy({});
    const RunResult r = run_flow(ride_min(), core_trip(), policy, make_headers({}), 4);

    CHECK_FALSE(r.passed);
    CHECK(r.reason == FailReason::loop_abort);
    REQUIRE(!r.decisions.empty());
    CHECK(r.decisions[0].ranked_actions == std::vector<std::string>{kActionRetry});
    CHECK(r.transitions[0].policy_reason == "policy returned nothing; retrying");
}

TEST_CASE("back returns to the previous step and the run still passes") {
    BackOncePolicy policy("destination_picker");
    const RunResult r = run_flow(ride_min(), core_trip(), policy, make_headers({}), 8);

    CHECK(r.passed);
    CHECK(r.action_count == 8);  // 6 forward + 1 back + 1 redo
    const auto back = std::find_if(r.transitions.begin(), r.transitions.end(),
                                   [](const ScreenTransition& t) {
                                       return t.action_taken == kActionBack;
                                   });
    REQUIRE(back != r.transitions.end());
    CHECK(back->from_screen == "destination_picker");
    CHECK(back->to_screen == "home");
    check_transitions_chain(r.transitions);
}

TEST_CASE("the clock is clamped when the run times out") {
    FlowDefinition flow = core_trip();
    flow.overall_timeout_ms = 50;  // first backend request alone takes 64ms
    DefaultPolicy policy;
    const RunResult r = run_flow(ride_min(), flow, policy, make_headers({}), 2);

    CHECK_FALSE(r.passed);
    CHECK(r.reason == FailReason::timeout);
    CHECK(r.duration_ms == 50);
    CHECK(r.decisions.empty());
    CHECK(r.transitions.empty());
}

TEST_CASE("reaching the end state with a false assertion fails the run") {
    FlowDefinition flow = load_flow(R"({
      "flow_id": "mini",
      "steps": [
        {"goal": "g", "screen_id": "s0",
         "entry": {"service": "api_gateway", "endpoint": "/ride/home"},
         "elements": ["where_to_button"],
         "primary_action": {"action_id": "tap_go", "element_id": "where_to_button"}}
      ],
      "end_state_assertion": {"prompt": "gone?", "target": "end_state",
                              "predicate": {"element_absent": "where_to_button"}}
    })");
    DefaultPolicy policy;
    const RunResult r = run_flow(ride_min(), flow, policy, make_headers({}), 2);

    CHECK_FALSE(r.passed);
    CHECK(r.reason == FailReason::assertion_failed);
    REQUIRE(r.transitions.size() == 1);
    CHECK(r.transitions[0].from_screen == "s0");
    CHECK(r.transitions[0].to_screen == "s0");
}
