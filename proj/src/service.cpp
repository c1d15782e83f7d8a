#include "listrank/service.hpp"

#include <chrono>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "listrank/error.hpp"

namespace listrank {

RerankRequest parse_rerank_request(const std::string& body) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("rerank request: ") + e.what());
    }
    if (!doc.is_object()) {
        throw ParseError("rerank request: body must be a JSON object");
    }
    RerankRequest req;
    if (!doc.contains("query") || !doc["query"].is_string()) {
        throw ParseError("rerank request: missing string field \"query\"");
    }
    req.query = doc["query"].get<std::string>();
    if (!doc.contains("passages") || !doc["passages"].is_array()) {
        throw ParseError("rerank request: missing array field \"passages\"");
    }
    std::size_t index = 0;
    for (const auto& entry : doc["passages"]) {
        RerankRequestItem item;
        if (entry.is_string()) {
            item.id = "p" + std::to_string(index);
            item.text = entry.get<std::string>();
        } else if (entry.is_object() && entry.contains("text") && entry["text"].is_string()) {
            item.text = entry["text"].get<std::string>();
            item.id = entry.contains("id") && entry["id"].is_string()
                          ? entry["id"].get<std::string>()
                          : "p" + std::to_string(index);
        } else {
            throw ParseError("rerank request: passage " + std::to_string(index) +
                             " must be a string or {\"id\", \"text\"}");
        }
        req.passages.push_back(std::move(item));
        ++index;
    }
    if (req.passages.empty()) {
        throw PreconditionError("rerank request: passages must be non-empty");
    }
    if (doc.contains("top_k")) {
        if (!doc["top_k"].is_number_unsigned() || doc["top_k"].get<std::size_t>() == 0) {
            throw ParseError("rerank request: top_k must be a positive integer");
        }
        req.top_k = doc["top_k"].get<std::size_t>();
        if (*req.top_k > req.passages.size()) {
            throw PreconditionError("rerank request: top_k " + std::to_string(*req.top_k) +
                                    " exceeds passage count " +
                                    std::to_string(req.passages.size()));
        }
    }
    const std::string mode = doc.value("mode", std::string("iterative"));
    if (mode == "iterative") {
        req.iterative = true;
    } else if (mode == "direct") {
        req.iterative = false;
    } else {
        throw ParseError("rerank request: mode must be \"iterative\" or \"direct\"");
    }
    return req;
}

struct RerankService::Impl {
    const Engine* engine;
    ServiceConfig config;
    httplib::Server server;
    std::thread worker;
    int bound_port = 0;

    void install_routes(const RerankService& self) {
        server.Post("/rerank", [&self](const httplib::Request& req, httplib::Response& res) {
            const HttpReply reply = self.handle_rerank(req.body);
            res.status = reply.status;
            res.set_content(reply.body, "application/json");
        });
        server.Get("/health", [&self](const httplib::Request&, httplib::Response& res) {
            const HttpReply reply = self.handle_health();
            res.status = reply.status;
            res.set_content(reply.body, "application/json");
        });
    }
};

RerankService::RerankService(const Engine& engine, ServiceConfig config)
    : impl_(std::make_unique<Impl>()) {
    config.iter.validate();
    impl_->engine = &engine;
    impl_->config = std::move(config);
    impl_->install_routes(*this);
}

RerankService::~RerankService() {
    stop();
}

HttpReply RerankService::handle_rerank(const std::string& body) const {
    const auto t0 = std::chrono::steady_clock::now();
    RerankRequest req;
    try {
        req = parse_rerank_request(body);
    } catch (const std::exception& e) {
        return HttpReply{400, nlohmann::json{{"error", e.what()}}.dump()};
    }
    if (req.passages.size() > impl_->config.max_passages) {
        return HttpReply{413, nlohmann::json{{"error", "too many passages: " +
                                                           std::to_string(req.passages.size()) +
                                                           " > limit " +
                                                           std::to_string(
                                                               impl_->config.max_passages)}}
                                  .dump()};
    }

    try {
        std::vector<std::string> texts;
        texts.reserve(req.passages.size());
        for (const RerankRequestItem& item : req.passages) {
            texts.push_back(item.text);
        }
        const RankedResult ranked =
            impl_->engine->rank_texts(req.query, texts, req.iterative, impl_->config.iter);

        std::vector<const RankedPassage*> by_rank(ranked.passages.size());
        for (const RankedPassage& p : ranked.passages) {
            by_rank[p.rank - 1] = &p;
        }
        const std::size_t limit = req.top_k.value_or(ranked.passages.size());
        nlohmann::json results = nlohmann::json::array();
        for (std::size_t r = 0; r < limit; ++r) {
            const RankedPassage& p = *by_rank[r];
            results.push_back({{"index", p.index},
                               {"id", req.passages[p.index].id},
                               {"score", p.score},
                               {"rank", p.rank}});
        }
        const double latency_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                .count();
        const nlohmann::json reply = {{"results", results},
                                      {"rounds", ranked.rounds},
                                      {"model_id", impl_->engine->model_id()},
                                      {"latency_ms", latency_ms}};
        return HttpReply{200, reply.dump()};
    } catch (const std::exception& e) {
        return HttpReply{500, nlohmann::json{{"error", e.what()}}.dump()};
    }
}

HttpReply RerankService::handle_health() const {
    const nlohmann::json reply = {{"status", "ok"},
                                  {"model_id", impl_->engine->model_id()},
                                  {"config_hash", config_hash(impl_->engine->config())}};
    return HttpReply{200, reply.dump()};
}

bool RerankService::run() {
    return impl_->server.listen(impl_->config.host, impl_->config.port);
}

int RerankService::start() {
    if (impl_->config.port == 0) {
        impl_->bound_port = impl_->server.bind_to_any_port(impl_->config.host);
        if (impl_->bound_port <= 0) {
            throw std::runtime_error("rerank service: failed to bind a port on " +
                                     impl_->config.host);
        }
    } else {
        if (!impl_->server.bind_to_port(impl_->config.host, impl_->config.port)) {
            throw std::runtime_error("rerank service: failed to bind " + impl_->config.host +
                                     ":" + std::to_string(impl_->config.port));
        }
        impl_->bound_port = impl_->config.port;
    }
    impl_->worker = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return impl_->bound_port;
}

void RerankService::stop() {
    if (impl_ && impl_->server.is_running()) {
        impl_->server.stop();
    }
    if (impl_ && impl_->worker.joinable()) {
        impl_->worker.join();
    }
}

} // namespace listrank
