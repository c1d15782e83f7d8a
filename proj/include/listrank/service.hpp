#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "listrank/engine.hpp"
#include "listrank/inference.hpp"

namespace listrank {

struct ServiceConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::size_t max_passages = 1000;
    IterConfig iter;
};

struct RerankRequestItem {
    std::string id;
    std::string text;
};

struct RerankRequest {
    std::string query;
    std::vector<RerankRequestItem> passages;
    std::optional<std::size_t> top_k;
    bool iterative = true;
};

/// Body schema: {"query": str, "passages": [str | {"id": str, "text": str}],
/// "top_k"?: int, "mode"?: "iterative" | "direct"}. Passage entries given as
/// bare strings get ids "p0", "p1", ...
RerankRequest parse_rerank_request(const std::string& body);

struct HttpReply {
    int status = 200;
    std::string body;
};

/// JSON-over-HTTP rerank service: POST /rerank, GET /health. Requests never
/// mutate engine state, so any number can run concurrently.
class RerankService {
public:
    RerankService(const Engine& engine, ServiceConfig config);
    ~RerankService();
    RerankService(const RerankService&) = delete;
    RerankService& operator=(const RerankService&) = delete;

    /// Request handling without the HTTP layer; what the routes call.
    HttpReply handle_rerank(const std::string& body) const;
    HttpReply handle_health() const;

    /// Binds the configured host/port and serves until stop(). Returns false
    /// when the bind fails.
    bool run();

    /// Binds (port 0 picks a free port) and serves on a background thread;
    /// returns the bound port. Throws when the bind fails.
    int start();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace listrank
