// Screen-model flow execution: renders backend payloads into screen states,
// picks actions with a pluggable policy, detects action loops, and decides
// the run verdict.
//
// CRITICAL INVARIANTS
//  - A run passes iff the end-state screen was reached within
//    overall_timeout_ms of virtual time AND the end-state assertion
//    predicate holds there.
//  - Every run terminates: each loop iteration either consumes one action
//    (bounded by max_actions), hits the timeout, or aborts on a loop.
//  - Transitions chain: to_screen of entry n equals from_screen of entry
//    n+1.
//  - loop_abort is reserved for policy-driven (screen, action) cycles; a
//    persistently failing backend yields end_state_not_reached instead.
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "havoc/common.hpp"
#include "havoc/fault.hpp"
#include "havoc/simmesh.hpp"
#include "havoc/topology.hpp"

namespace havoc {

// Virtual time one wait action consumes.
inline constexpr std::int64_t kWaitQuantumMs = 250;
// Sliding window (in transitions) examined by cycle detection.
inline constexpr int kCycleWindow = 12;
// A (screen, action) pair repeated this often without progress is a cycle.
inline constexpr int kCycleRepeats = 3;
// Re-issues the runner attempts when a step renders an error screen.
inline constexpr int kErrorRetryLimit = 2;

inline constexpr const char* kActionWait = "wait";
inline constexpr const char* kActionBack = "back";
inline constexpr const char* kActionRetry = "retry";
inline constexpr const char* kErrorScreenId = "error_screen";
inline constexpr const char* kLaunchScreenId = "launch";

// ---- Screen model ----

enum class ElementPhase : std::uint8_t {
    present,
    placeholder,
    delayed,     // becomes present once now >= until_ms
    missing,
    error_text,  // carries text instead of a widget
};

struct ElementState {
    std::string element_id;
    ElementPhase phase = ElementPhase::present;
    std::int64_t until_ms = 0;  // delayed only
    std::string text;           // error_text only

    bool operator==(const ElementState&) const = default;
};

struct ScreenState {
    std::string screen_id;
    std::vector<ElementState> elements;
    std::int64_t rendered_at_ms = 0;

    const ElementState* find(const std::string& element_id) const;

    bool operator==(const ScreenState&) const = default;
};

// Human-readable textual content of a screen; what error detection scans.
std::string screen_text(const ScreenState& screen);

std::string to_string(ElementPhase p);
ElementPhase element_phase_from_string(const std::string& s);

// One JSON object per screen, element phases included; round-trips exactly.
std::string screen_to_log_line(const ScreenState& s);
ScreenState screen_from_log_line(const std::string& line);

struct ScreenTransition {
    std::string from_screen;
    std::string action_taken;
    std::string to_screen;
    std::int64_t at_ms = 0;
    std::string policy_reason;

    bool operator==(const ScreenTransition&) const = default;
};

std::string transition_to_log_line(const ScreenTransition& t);
ScreenTransition transition_from_log_line(const std::string& line);

// ---- Flow definition ----

struct ActionSpec {
    std::string action_id;
    std::string element_id;  // element this action operates on

    bool operator==(const ActionSpec&) const = default;
};

enum class AssertionTarget : std::uint8_t {
    end_state,  // evaluated on the final screen
    mosaic,     // evaluated across all screens of the run
};

enum class PredicateKind : std::uint8_t {
    all_present,      // every listed element present
    element_present,  // the listed element present
    element_absent,   // the listed element never present
};

struct AssertionPredicate {
    PredicateKind kind = PredicateKind::all_present;
    std::vector<std::string> elements;

    bool operator==(const AssertionPredicate&) const = default;
};

struct Assertion {
    std::string prompt;  // natural-language question, for reports and VQA
    AssertionTarget target = AssertionTarget::end_state;
    AssertionPredicate predicate;  // machine-checkable ground truth

    bool operator==(const Assertion&) const = default;
};

struct StepSpec {
    std::string goal;
    std::string screen_id;
    AppInstance app_instance = AppInstance::rider;
    // Optional entry override. The endpoint is required when set; the
    // service falls back to the flow's registered entry service when the
    // named one does not exist in the topology (keeps one flow definition
    // portable across small and large topologies).
    std::string entry_service;
    std::string entry_endpoint;
    std::vector<std::string> elements;  // screen template
    ActionSpec primary_action;
    std::vector<ActionSpec> alternate_actions;
    std::string optimal_action_id;  // ground truth; defaults to primary

    bool operator==(const StepSpec&) const = default;
};

struct FlowDefinition {
    std::string flow_id;
    std::vector<StepSpec> steps;
    Assertion end_state_assertion;
    std::vector<Assertion> mid_state_assertions;
    std::vector<FaultSpec> fault_configuration;
    std::int64_t overall_timeout_ms = 30'000;
    std::int64_t per_element_wait_ms = 3'000;
    int max_actions = 60;

    bool operator==(const FlowDefinition&) const = default;
};

FlowDefinition load_flow(const std::string& document, const std::string& origin = "<inline>");
FlowDefinition load_flow_file(const std::string& path);
void validate_flow(const FlowDefinition& flow, const std::string& origin = "<memory>");

// Resolves the entry point a step's backend request goes to. Throws
// ValidationError when the resolved (service, endpoint) is absent.
EntryPoint resolve_entry(const Topology& topo, const FlowDefinition& flow,
                         const StepSpec& step);

// ---- Rendering ----

// Renders a step's screen from a backend payload. A failed payload renders
// the error screen ("Something went wrong ..."); otherwise template elements
// render present unless a degradation marker downgrades them. Delayed
// elements flip to present once `now_ms` reaches payload_at_ms + delay.
ScreenState render_screen(const StepSpec& step, const ResponsePayload& payload,
                          std::int64_t payload_at_ms, std::int64_t now_ms);

// ---- Policy ----

struct PolicyDecision {
    std::vector<std::string> ranked_actions;  // best first, never empty
    std::string reason;
};

struct PolicyContext {
    const FlowDefinition& flow;
    const StepSpec& step;
    std::int64_t wait_spent_ms = 0;
    std::int64_t now_ms = 0;
};

class ActionPolicy {
public:
    virtual ~ActionPolicy() = default;
    virtual PolicyDecision decide(const ScreenState& screen, const PolicyContext& ctx) = 0;
};

// Deterministic default ranking:
//   1. the step's primary action when its element is present;
//   2. wait while the required element is delayed/placeholder and the wait
//      budget (per_element_wait_ms, per step) is not exhausted;
//   3. alternate actions whose elements are present, in declared order;
//   4. back, then retry.
// When the required element is pending, the primary action is ranked
// directly after wait so near misses stay recoverable at small k.
PolicyDecision select_action(const ScreenState& screen, const PolicyContext& ctx);

class DefaultPolicy : public ActionPolicy {
public:
    PolicyDecision decide(const ScreenState& screen, const PolicyContext& ctx) override {
        return select_action(screen, ctx);
    }
};

// ---- Cycle detection ----

struct CycleSignature {
    std::string screen_id;
    std::string action;

    bool operator==(const CycleSignature&) const = default;
};

// Looks at the last `window` transitions of `history`. A (from_screen,
// action) pair occurring kCycleRepeats times with no transition to a
// never-seen-before screen between the first and last repeat is a cycle.
std::optional<CycleSignature> detect_cycle(const std::vector<ScreenTransition>& history,
                                           int window = kCycleWindow);

// ---- Assertions ----

// Evaluates the ground-truth predicate over the run's screens.
bool evaluate_predicate(const Assertion& assertion,
                        const std::vector<ScreenState>& mosaic);

class AssertionClassifier {
public:
    virtual ~AssertionClassifier() = default;
    // nullopt = abstain (e.g. transport failure); caller falls back.
    virtual std::optional<bool> classify(const Assertion& assertion,
                                         const std::vector<ScreenState>& screens) = 0;
};

// Answers from screen content alone by evaluating the predicate.
class DefaultAssertionClassifier : public AssertionClassifier {
public:
    std::optional<bool> classify(const Assertion& assertion,
                                 const std::vector<ScreenState>& screens) override {
        return evaluate_predicate_on(assertion, screens);
    }

private:
    static bool evaluate_predicate_on(const Assertion& a,
                                      const std::vector<ScreenState>& s);
    friend bool evaluate_predicate(const Assertion&, const std::vector<ScreenState>&);
};

struct AssertionOutcome {
    std::string prompt;
    bool answer = false;        // classifier's answer
    bool ground_truth = false;  // predicate evaluation
    bool degraded_mode = false; // classifier abstained; fallback used
};

AssertionOutcome evaluate_assertion(AssertionClassifier& classifier,
                                    const Assertion& assertion,
                                    const std::vector<ScreenState>& mosaic);

// ---- Run execution ----

enum class FailReason : std::uint8_t {
    none,
    end_state_not_reached,
    assertion_failed,
    timeout,
    loop_abort,
};

std::string to_string(FailReason r);
FailReason fail_reason_from_string(const std::string& s);

// One policy invocation, kept for action-precision metrics.
struct DecisionRecord {
    int step_index = 0;
    std::vector<std::string> ranked_actions;
    std::string chosen;
    std::string ground_truth;
};

struct RunResult {
    bool passed = false;
    FailReason reason = FailReason::none;
    std::vector<ScreenTransition> transitions;
    std::vector<ScreenState> screens_mosaic;
    int action_count = 0;
    std::int64_t duration_ms = 0;
    std::vector<RpcRecord> merged_log;
    std::vector<DecisionRecord> decisions;

    std::string verdict_text() const;
};

// Drives the flow against the topology under the given headers. One backend
// request is issued per step arrival (and per retry); the policy picks one
// action per rendered screen. Deterministic for fixed inputs and seed.
RunResult run_flow(const Topology& topo, const FlowDefinition& flow,
                   ActionPolicy& policy, const HavocHeaders& headers,
                   std::uint64_t seed);

}  // namespace havoc
