#include "havoc/external.hpp"

#include <algorithm>
#include <cstdlib>

#include <httplib.h>
#include <json.hpp>

namespace havoc {

using nlohmann::json;

std::string classifier_url_from_env(const std::string& configured) {
    const char* env = std::getenv(kClassifierUrlEnv);
    if (env != nullptr && env[0] != '\0') {
        return env;
    }
    return configured;
}

ExternalClient::ExternalClient(const std::string& url, int timeout_ms)
    : url_(url), timeout_ms_(timeout_ms) {
    std::string rest = url;
    const auto scheme_end = rest.find("://");
    std::string scheme = "http";
    if (scheme_end != std::string::npos) {
        scheme = rest.substr(0, scheme_end);
        rest = rest.substr(scheme_end + 3);
    }
    const auto slash = rest.find('/');
    if (slash == std::string::npos) {
        authority_ = scheme + "://" + rest;
    } else {
        authority_ = scheme + "://" + rest.substr(0, slash);
        base_path_ = rest.substr(slash);
        while (!base_path_.empty() && base_path_.back() == '/') {
            base_path_.pop_back();
        }
    }
}

std::optional<std::string> ExternalClient::post_json(const std::string& path,
                                                     const std::string& body) {
    httplib::Client cli(authority_);
    cli.set_connection_timeout(0, timeout_ms_ * 1000);
    cli.set_read_timeout(0, timeout_ms_ * 1000);
    cli.set_write_timeout(0, timeout_ms_ * 1000);
    auto res = cli.Post((base_path_ + path).c_str(), body, "application/json");
    if (!res || res->status < 200 || res->status >= 300) {
        return std::nullopt;
    }
    return res->body;
}

namespace {

json screen_to_json(const ScreenState& s) {
    return json::parse(screen_to_log_line(s));
}

}  // namespace

PolicyDecision HttpActionPolicy::decide(const ScreenState& screen, const PolicyContext& ctx) {
    PolicyDecision local = select_action(screen, ctx);

    json req;
    req["flow_id"] = ctx.flow.flow_id;
    req["step_index"] = &ctx.step - ctx.flow.steps.data();
    req["goal"] = ctx.step.goal;
    req["screen"] = screen_to_json(screen);
    req["default_ranking"] = local.ranked_actions;

    auto body = client_.post_json("/v1/decide", req.dump());
    if (!body) {
        local.reason = "external policy unavailable; " + local.reason;
        return local;
    }
    try {
        json j = json::parse(*body);
        const std::string action = j.at("action").get<std::string>();
        if (action.empty()) {
            local.reason = "external policy returned no action; " + local.reason;
            return local;
        }
        PolicyDecision out;
        out.ranked_actions.push_back(action);
        for (const std::string& a : local.ranked_actions) {
            if (a != action) {
                out.ranked_actions.push_back(a);
            }
        }
        out.reason = "external policy";
        return out;
    } catch (const json::exception&) {
        local.reason = "external policy sent a malformed reply; " + local.reason;
        return local;
    }
}

std::optional<bool> HttpAssertionClassifier::classify(const Assertion& assertion,
                                                      const std::vector<ScreenState>& screens) {
    json req;
    req["prompt"] = assertion.prompt;
    json arr = json::array();
    for (const ScreenState& s : screens) {
        arr.push_back(screen_to_json(s));
    }
    req["screens"] = std::move(arr);

    auto body = client_.post_json("/v1/assert", req.dump());
    if (!body) {
        return std::nullopt;  // abstain; caller falls back and flags degraded
    }
    try {
        json j = json::parse(*body);
        return j.at("answer").get<bool>();
    } catch (const json::exception&) {
        return std::nullopt;
    }
}

CategoryResult HttpCategorizer::categorize(const std::string& callee,
                                           const std::string& endpoint,
                                           const std::string& flow_id) {
    json req;
    req["callee"] = callee;
    req["endpoint"] = endpoint;
    req["flow_id"] = flow_id;

    auto body = client_.post_json("/v1/categorize", req.dump());
    if (body) {
        try {
            json j = json::parse(*body);
            return {relevance_from_string(j.at("category").get<std::string>()), false};
        } catch (const Error&) {
        } catch (const json::exception&) {
        }
    }
    return {RelevanceCategory::supporting, true};
}

}  // namespace havoc
