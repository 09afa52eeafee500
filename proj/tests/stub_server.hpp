#pragma once

// In-process HTTP server speaking the inference wire protocol, for client
// tests. The handler decides every response.

#include "httplib.h"
#include "json.hpp"

#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace dialam::test {

class StubServer
{
public:
    struct Reply
    {
        int status = 200;
        std::string body;
    };
    using Handler = std::function<Reply(const nlohmann::json& request)>;

    explicit StubServer(Handler handler) : m_handler(std::move(handler))
    {
        m_server.Get("/v1/health", [this](const httplib::Request&, httplib::Response& res) {
            res.status = m_health_status;
            res.set_content(m_health_body, "application/json");
        });
        m_server.Post("/v1/classify", [this](const httplib::Request& req, httplib::Response& res) {
            const auto body = nlohmann::json::parse(req.body);
            {
                std::lock_guard lock(m_mutex);
                m_requests.push_back(body);
            }
            auto reply = m_handler(body);
            res.status = reply.status;
            res.set_content(reply.body, "application/json");
        });
        m_port = m_server.bind_to_any_port("127.0.0.1");
        m_thread = std::thread([this] { m_server.listen_after_bind(); });
        m_server.wait_until_ready();
    }

    ~StubServer()
    {
        m_server.stop();
        m_thread.join();
    }

    std::string url() const { return "http://127.0.0.1:" + std::to_string(m_port); }

    std::vector<nlohmann::json> requests() const
    {
        std::lock_guard lock(m_mutex);
        return m_requests;
    }

    void set_health(int status, std::string body)
    {
        m_health_status = status;
        m_health_body = std::move(body);
    }

private:
    Handler m_handler;
    httplib::Server m_server;
    int m_port = 0;
    std::thread m_thread;
    mutable std::mutex m_mutex;
    std::vector<nlohmann::json> m_requests;
    int m_health_status = 200;
    std::string m_health_body = R"({"status":"ok"})";
};

/// Reply with `labels` and uniform rows, one per instance.
inline StubServer::Reply uniform_reply(const nlohmann::json& req, const std::vector<std::string>& labels)
{
    nlohmann::json out;
    out["model_id"] = "stub";
    out["labels"] = labels;
    out["predictions"] = nlohmann::json::array();
    for (std::size_t i = 0; i < req["instances"].size(); ++i)
        out["predictions"].push_back({{"scores", std::vector<double>(labels.size(), 1.0 / labels.size())}});
    return {200, out.dump()};
}

} // namespace dialam::test
