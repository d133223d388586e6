// HTTP adapters for the pluggable decision points: action policy, screen
// assertions, endpoint categorization. Wire format, JSON over POST:
//
//   /v1/decide      <- {flow_id, step_index, goal, screen, default_ranking}
//                   -> {action}
//   /v1/assert      <- {prompt, screens}
//                   -> {answer}
//   /v1/categorize  <- {callee, endpoint, flow_id}
//                   -> {category}
//
// Every call carries a hard timeout. Failures (dead peer, non-2xx, bad
// body) fall back deterministically so a sick peer can never wedge or
// destabilize a run:
//   decide     -> the local default ranking
//   assert     -> abstain (caller substitutes the predicate, flags degraded)
//   categorize -> supporting, degraded flag set
#pragma once

#include <optional>
#include <string>

#include "havoc/crawler.hpp"
#include "havoc/rca.hpp"

namespace havoc {

inline constexpr int kExternalTimeoutMs = 2'000;
inline constexpr const char* kClassifierUrlEnv = "HAVOC_CLASSIFIER_URL";

// Returns the env override when set and non-empty, else `configured`.
std::string classifier_url_from_env(const std::string& configured);

// Minimal JSON-over-POST client. Thread-safe for concurrent callers.
class ExternalClient {
public:
    // url: http://host:port[/base-path]
    explicit ExternalClient(const std::string& url, int timeout_ms = kExternalTimeoutMs);

    // nullopt on transport failure or non-2xx status.
    std::optional<std::string> post_json(const std::string& path, const std::string& body);

    const std::string& base_url() const { return url_; }

private:
    std::string url_;
    std::string authority_;  // scheme://host:port
    std::string base_path_;  // "" or "/prefix"
    int timeout_ms_;
};

class HttpActionPolicy : public ActionPolicy {
public:
    explicit HttpActionPolicy(const std::string& url) : client_(url) {}
    PolicyDecision decide(const ScreenState& screen, const PolicyContext& ctx) override;

private:
    ExternalClient client_;
};

class HttpAssertionClassifier : public AssertionClassifier {
public:
    explicit HttpAssertionClassifier(const std::string& url) : client_(url) {}
    std::optional<bool> classify(const Assertion& assertion,
                                 const std::vector<ScreenState>& screens) override;

private:
    ExternalClient client_;
};

class HttpCategorizer : public EndpointCategorizer {
public:
    explicit HttpCategorizer(const std::string& url) : client_(url) {}
    CategoryResult categorize(const std::string& callee, const std::string& endpoint,
                              const std::string& flow_id) override;

private:
    ExternalClient client_;
};

}  // namespace havoc
