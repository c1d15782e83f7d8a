// listrank command line: train, rerank, eval, serve, synth.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "listrank/ablation.hpp"
#include "listrank/engine.hpp"
#include "listrank/error.hpp"
#include "listrank/evalkit.hpp"
#include "listrank/model.hpp"
#include "listrank/service.hpp"
#include "listrank/trainer.hpp"

namespace {

using namespace listrank;

int cmd_train(const std::string& config_path, const std::string& out_path) {
    TrainConfig cfg = load_train_config(config_path);
    std::vector<RankingDataset> stage_data;
    for (const StageConfig& stage : cfg.stages) {
        stage_data.push_back(load_dataset(stage.data_path));
    }
    ParamStore params = init_params(cfg.model);
    const TrainResult result = run_training(cfg, params, stage_data);

    const std::string target =
        !out_path.empty() ? out_path : cfg.settings.checkpoint_path;
    if (target.empty()) {
        throw ConfigError("no checkpoint destination: pass --out or set checkpoint_path");
    }
    save_checkpoint(target, cfg.model, params);

    double final_loss = result.records.empty() ? 0.0 : result.records.back().loss;
    std::cout << "steps: " << result.records.size() << "\n"
              << "final loss: " << final_loss << "\n"
              << "skipped queries: " << result.skipped_queries << "\n"
              << "skipped groups: " << result.skipped_groups << "\n"
              << "checkpoint: " << target << "\n";
    return 0;
}

int cmd_rerank(const std::string& model_path, const std::string& input_path,
               std::size_t alpha, double beta) {
    const Engine engine = Engine::from_checkpoint(model_path);
    std::string body;
    if (input_path == "-" || input_path.empty()) {
        std::ostringstream buf;
        buf << std::cin.rdbuf();
        body = buf.str();
    } else {
        std::ifstream in(input_path);
        if (!in) {
            throw ConfigError("cannot open request file: " + input_path);
        }
        std::ostringstream buf;
        buf << in.rdbuf();
        body = buf.str();
    }
    ServiceConfig cfg;
    cfg.iter.alpha = alpha;
    cfg.iter.beta = beta;
    const RerankService service(engine, cfg);
    const HttpReply reply = service.handle_rerank(body);
    std::cout << reply.body << "\n";
    if (reply.status != 200) {
        std::cerr << "rerank failed with status " << reply.status << "\n";
        return 1;
    }
    return 0;
}

int cmd_eval(const std::string& model_path, const std::string& data_path,
             const std::string& mode, std::size_t alpha, double beta,
             const std::string& report_path) {
    const Engine engine = Engine::from_checkpoint(model_path);
    const RankingDataset dataset = load_dataset(data_path);
    IterConfig iter;
    iter.alpha = alpha;
    iter.beta = beta;
    RankMode rank_mode;
    if (mode == "direct") {
        rank_mode = RankMode::DIRECT;
    } else if (mode == "iterative") {
        rank_mode = RankMode::ITERATIVE;
    } else {
        throw ConfigError("eval: mode must be direct or iterative, got \"" + mode + "\"");
    }
    const EvalReport report = evaluate(engine, dataset, iter, rank_mode);
    std::cout << report_to_text(report);
    if (!report_path.empty()) {
        std::ofstream os(report_path);
        if (!os) {
            throw ConfigError("cannot open report file: " + report_path);
        }
        os << report_to_json(report) << "\n";
    }
    return 0;
}

int cmd_serve(const std::string& model_path, std::string host, int port,
              std::size_t max_passages, std::size_t alpha, double beta) {
    // LISTRANK_BIND=host:port supplies defaults; flags override.
    if (const char* bind = std::getenv("LISTRANK_BIND")) {
        const std::string spec(bind);
        const auto colon = spec.rfind(':');
        if (colon != std::string::npos) {
            if (host.empty()) {
                host = spec.substr(0, colon);
            }
            if (port < 0) {
                port = std::atoi(spec.c_str() + colon + 1);
            }
        }
    }
    if (host.empty()) {
        host = "127.0.0.1";
    }
    if (port < 0) {
        port = 8080;
    }
    const Engine engine = Engine::from_checkpoint(model_path);
    ServiceConfig cfg;
    cfg.host = host;
    cfg.port = port;
    cfg.max_passages = max_passages;
    cfg.iter.alpha = alpha;
    cfg.iter.beta = beta;
    RerankService service(engine, cfg);
    std::cout << "serving model " << engine.model_id() << " on " << host << ":" << port << "\n";
    if (!service.run()) {
        std::cerr << "failed to bind " << host << ":" << port << "\n";
        return 1;
    }
    return 0;
}

int cmd_synth(std::uint64_t seed, std::size_t queries, std::size_t passages, std::size_t topics,
              double hard_negatives, const std::string& out_path) {
    SynthConfig cfg;
    cfg.seed = seed;
    cfg.n_queries = queries;
    cfg.passages_per_query = passages;
    cfg.n_topics = topics;
    cfg.hard_negative_rate = hard_negatives;
    const SynthResult result = synthesize_dataset(cfg);
    save_dataset(out_path, result.dataset);
    std::cout << "wrote " << result.dataset.records.size() << " queries to " << out_path << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"listrank: listwise text reranking engine"};
    app.require_subcommand(1);

    auto* train = app.add_subcommand("train", "train a model from a JSON config");
    std::string train_config;
    std::string train_out;
    train->add_option("--config", train_config, "training config JSON")->required();
    train->add_option("--out", train_out, "checkpoint destination (overrides config)");

    auto* rerank = app.add_subcommand("rerank", "rerank passages from a request file or stdin");
    std::string rerank_model, rerank_input = "-";
    std::size_t rerank_alpha = 20;
    double rerank_beta = 0.2;
    rerank->add_option("--model", rerank_model, "checkpoint JSON")->required();
    rerank->add_option("--input", rerank_input, "request JSON file, or - for stdin");
    rerank->add_option("--alpha", rerank_alpha, "iteration cutoff (default 20)");
    rerank->add_option("--beta", rerank_beta, "per-round elimination rate (default 0.2)");

    auto* eval = app.add_subcommand("eval", "evaluate mAP over a dataset");
    std::string eval_model, eval_data, eval_mode = "direct", eval_report;
    std::size_t eval_alpha = 20;
    double eval_beta = 0.2;
    eval->add_option("--model", eval_model, "checkpoint JSON")->required();
    eval->add_option("--data", eval_data, "dataset JSONL")->required();
    eval->add_option("--mode", eval_mode, "direct | iterative");
    eval->add_option("--alpha", eval_alpha, "iteration cutoff (default 20)");
    eval->add_option("--beta", eval_beta, "per-round elimination rate (default 0.2)");
    eval->add_option("--report", eval_report, "also write a JSON report here");

    auto* serve = app.add_subcommand("serve", "run the JSON-over-HTTP rerank service");
    std::string serve_model, serve_host;
    int serve_port = -1;
    std::size_t serve_max = 1000, serve_alpha = 20;
    double serve_beta = 0.2;
    serve->add_option("--model", serve_model, "checkpoint JSON")->required();
    serve->add_option("--host", serve_host, "bind address (default LISTRANK_BIND or 127.0.0.1)");
    serve->add_option("--port", serve_port, "bind port (default LISTRANK_BIND or 8080)");
    serve->add_option("--max-passages", serve_max, "request size limit (default 1000)");
    serve->add_option("--alpha", serve_alpha, "iteration cutoff (default 20)");
    serve->add_option("--beta", serve_beta, "per-round elimination rate (default 0.2)");

    auto* synth = app.add_subcommand("synth", "write a synthetic ranking dataset");
    std::uint64_t synth_seed = 7;
    std::size_t synth_queries = 50, synth_passages = 12, synth_topics = 5;
    double synth_hard = 0.3;
    std::string synth_out;
    synth->add_option("--seed", synth_seed, "RNG seed (default 7)");
    synth->add_option("--queries", synth_queries, "number of queries (default 50)");
    synth->add_option("--passages", synth_passages, "passages per query (default 12)");
    synth->add_option("--topics", synth_topics, "topic count (default 5)");
    synth->add_option("--hard-negatives", synth_hard, "hard negative rate (default 0.3)");
    synth->add_option("--out", synth_out, "output JSONL path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (train->parsed()) {
            return cmd_train(train_config, train_out);
        }
        if (rerank->parsed()) {
            return cmd_rerank(rerank_model, rerank_input, rerank_alpha, rerank_beta);
        }
        if (eval->parsed()) {
            return cmd_eval(eval_model, eval_data, eval_mode, eval_alpha, eval_beta,
                            eval_report);
        }
        if (serve->parsed()) {
            return cmd_serve(serve_model, serve_host, serve_port, serve_max, serve_alpha,
                             serve_beta);
        }
        if (synth->parsed()) {
            return cmd_synth(synth_seed, synth_queries, synth_passages, synth_topics, synth_hard,
                             synth_out);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
