#pragma once

// Client side of the inference wire protocol.
//
//   GET  /v1/health    -> 200 {"status": "ok"}
//   POST /v1/classify  {"task": "...", "instances": [{"head", "head_context",
//                       "tail", "tail_context"}, ...]}
//                      -> 200 {"model_id": "...", "labels": [...],
//                              "predictions": [{"scores": [...]}, ...]}
//                      -> non-200 {"error": "..."}
//
// "labels" must be the task's vocabulary in TaskSpec order and each score row
// must be non-negative and sum to 1 (within 1e-6).

#include "dialam/classifier.hpp"
#include "dialam/error.hpp"
#include "dialam/task.hpp"

#include "httplib.h"
#include "json.hpp"

#include <chrono>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dialam {

inline constexpr std::size_t kMaxBatch = 256;
inline constexpr double kWireTolerance = 1e-6;

/// "http://host:port[/prefix]"
struct Endpoint
{
    std::string scheme_host_port;
    std::string prefix;

    static Endpoint parse(std::string_view url)
    {
        const auto scheme = url.find("://");
        if (scheme == std::string_view::npos || url.substr(0, scheme) != "http")
            throw Error(ErrorCode::BadConfig, std::string(url), "endpoint must be an http:// URL");
        const auto slash = url.find('/', scheme + 3);
        Endpoint e;
        e.scheme_host_port = std::string(url.substr(0, slash));
        if (slash != std::string_view::npos) {
            e.prefix = std::string(url.substr(slash));
            while (!e.prefix.empty() && e.prefix.back() == '/')
                e.prefix.pop_back();
        }
        if (e.scheme_host_port.size() <= scheme + 3)
            throw Error(ErrorCode::BadConfig, std::string(url), "endpoint has no host");
        return e;
    }

    std::string url() const { return scheme_host_port + prefix; }
};

inline std::string encode_classify_request(TaskName task, std::span<const PairInstance> instances)
{
    nlohmann::ordered_json body;
    body["task"] = to_string(task);
    auto arr = nlohmann::ordered_json::array();
    for (const auto& inst : instances) {
        nlohmann::ordered_json o;
        o["head"] = inst.head_text;
        o["head_context"] = inst.head_context;
        o["tail"] = inst.tail_text;
        o["tail_context"] = inst.tail_context;
        arr.push_back(std::move(o));
    }
    body["instances"] = std::move(arr);
    return body.dump();
}

/// Validate a 200 response body and turn it into distributions.
inline std::vector<LabelDistribution> decode_classify_response(const TaskSpec& task, std::string_view body,
                                                               std::size_t expected)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::ProtocolViolation, "", std::string("response is not JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("labels") || !j.contains("predictions") || !j["labels"].is_array()
        || !j["predictions"].is_array())
        throw Error(ErrorCode::ProtocolViolation, "", "response lacks labels or predictions");
    if (j.contains("model_id") && !j["model_id"].is_string())
        throw Error(ErrorCode::ProtocolViolation, "model_id", "model_id is not a string");

    std::vector<std::string> labels;
    for (const auto& l : j["labels"]) {
        if (!l.is_string())
            throw Error(ErrorCode::ProtocolViolation, "labels", "label is not a string");
        labels.push_back(l.get<std::string>());
    }
    if (labels != task.labels)
        throw Error(ErrorCode::ProtocolViolation, "labels",
                    "labels do not match the " + std::string(to_string(task.name)) + " vocabulary");

    const auto& preds = j["predictions"];
    if (preds.size() != expected)
        throw Error(ErrorCode::ProtocolViolation, "predictions",
                    "expected " + std::to_string(expected) + " predictions, got " + std::to_string(preds.size()));
    std::vector<LabelDistribution> out;
    out.reserve(expected);
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const auto& p = preds[i];
        if (!p.is_object() || !p.contains("scores") || !p["scores"].is_array() || p["scores"].size() != task.size())
            throw Error(ErrorCode::ProtocolViolation, "predictions[" + std::to_string(i) + "]", "bad score row");
        LabelDistribution d;
        double sum = 0.0;
        for (const auto& s : p["scores"]) {
            if (!s.is_number())
                throw Error(ErrorCode::ProtocolViolation, "predictions[" + std::to_string(i) + "]", "non-numeric score");
            const double v = s.get<double>();
            if (!std::isfinite(v) || v < 0.0)
                throw Error(ErrorCode::ProtocolViolation, "predictions[" + std::to_string(i) + "]", "negative score");
            d.scores.push_back(v);
            sum += v;
        }
        if (std::abs(sum - 1.0) > kWireTolerance)
            throw Error(ErrorCode::ProtocolViolation, "predictions[" + std::to_string(i) + "]",
                        "scores do not sum to 1");
        for (auto& v : d.scores)
            v /= sum;
        out.push_back(std::move(d));
    }
    return out;
}

/// Classifier backed by a remote inference service. Requests go out in
/// batches of at most kMaxBatch instances, sequentially, so results come back
/// in input order.
class RemoteClassifier final : public Classifier
{
public:
    RemoteClassifier(Endpoint endpoint, TaskName task, std::chrono::seconds timeout = std::chrono::seconds(300))
        : m_endpoint(std::move(endpoint))
        , m_task(task_spec(task))
        , m_timeout(timeout)
    {}

    const TaskSpec& task() const noexcept override { return m_task; }
    const Endpoint& endpoint() const noexcept { return m_endpoint; }

    std::vector<LabelDistribution> classify(std::span<const PairInstance> instances) const override
    {
        std::vector<LabelDistribution> out;
        out.reserve(instances.size());
        httplib::Client client(m_endpoint.scheme_host_port);
        client.set_read_timeout(m_timeout);
        client.set_write_timeout(m_timeout);
        for (std::size_t start = 0; start < instances.size(); start += kMaxBatch) {
            const auto batch = instances.subspan(start, std::min(kMaxBatch, instances.size() - start));
            auto res = client.Post(m_endpoint.prefix + "/v1/classify", encode_classify_request(m_task.name, batch),
                                   "application/json");
            if (!res)
                throw Error(ErrorCode::Transport, m_endpoint.url(), httplib::to_string(res.error()));
            if (res->status != 200)
                throw Error(ErrorCode::BackendError, m_endpoint.url(),
                            "status " + std::to_string(res->status) + ": " + error_message(res->body));
            auto rows = decode_classify_response(m_task, res->body, batch.size());
            std::move(rows.begin(), rows.end(), std::back_inserter(out));
        }
        return out;
    }

private:
    static std::string error_message(const std::string& body)
    {
        auto j = nlohmann::json::parse(body, nullptr, false);
        if (j.is_object() && j.contains("error") && j["error"].is_string())
            return j["error"].get<std::string>();
        return body;
    }

    Endpoint m_endpoint;
    TaskSpec m_task;
    std::chrono::seconds m_timeout;
};

inline std::vector<LabelDistribution> remote_classify(const Endpoint& endpoint, TaskName task,
                                                      std::span<const PairInstance> instances)
{
    return RemoteClassifier(endpoint, task).classify(instances);
}

/// GET /v1/health; throws Transport, BackendError or ProtocolViolation.
inline void health_check(const Endpoint& endpoint, std::chrono::seconds timeout = std::chrono::seconds(10))
{
    httplib::Client client(endpoint.scheme_host_port);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    auto res = client.Get(endpoint.prefix + "/v1/health");
    if (!res)
        throw Error(ErrorCode::Transport, endpoint.url(), httplib::to_string(res.error()));
    if (res->status != 200)
        throw Error(ErrorCode::BackendError, endpoint.url(), "health status " + std::to_string(res->status));
    auto j = nlohmann::json::parse(res->body, nullptr, false);
    if (!j.is_object() || j.value("status", "") != "ok")
        throw Error(ErrorCode::ProtocolViolation, endpoint.url(), "health body is not {\"status\":\"ok\"}");
}

} // namespace dialam
