#include "listrank/engine.hpp"

#include "listrank/error.hpp"

namespace listrank {

Engine::Engine(ModelConfig config, ParamStore params, std::string model_id)
    : config_(config), params_(std::move(params)), embedder_(config.d),
      adapter_{params_.at("adapter.weight"), params_.at("adapter.bias"), false},
      model_id_(std::move(model_id)) {
    config_.validate();
}

Engine Engine::from_checkpoint(const std::filesystem::path& path) {
    Checkpoint ckpt = load_checkpoint(path);
    return Engine(ckpt.config, std::move(ckpt.params), path.stem().string());
}

Tensor Engine::feature(const std::string& text) const {
    return apply_adapter(embedder_.embed(text), adapter_);
}

std::vector<ScoreBreakdown> Engine::score_texts(const std::string& query,
                                                const std::vector<std::string>& passages) const {
    if (passages.empty()) {
        throw PreconditionError("score_texts: empty passage list");
    }
    const Tensor h_q = feature(query);
    std::vector<Tensor> h_list;
    h_list.reserve(passages.size());
    for (const std::string& p : passages) {
        h_list.push_back(feature(p));
    }
    return score(config_, params_, h_q, h_list);
}

RankedResult Engine::rank_texts(const std::string& query,
                                const std::vector<std::string>& passages, bool iterative,
                                const IterConfig& iter) const {
    if (passages.empty()) {
        throw PreconditionError("rank_texts: empty passage list");
    }
    const Tensor h_q = feature(query);
    std::vector<Tensor> h_list;
    h_list.reserve(passages.size());
    for (const std::string& p : passages) {
        h_list.push_back(feature(p));
    }

    if (!iterative) {
        const std::vector<ScoreBreakdown> breakdowns = score(config_, params_, h_q, h_list);
        std::vector<double> finals(breakdowns.size());
        for (std::size_t i = 0; i < breakdowns.size(); ++i) {
            finals[i] = breakdowns[i].s_final;
        }
        const std::vector<std::size_t> ranks = rank_direct(finals);
        RankedResult result;
        result.rounds = 1;
        result.passages.resize(passages.size());
        for (std::size_t i = 0; i < passages.size(); ++i) {
            result.passages[i] = RankedPassage{i, finals[i], ranks[i]};
        }
        return result;
    }

    SubsetScorer scorer = [&](const std::vector<std::size_t>& subset) {
        std::vector<Tensor> sub;
        sub.reserve(subset.size());
        for (std::size_t idx : subset) {
            sub.push_back(h_list[idx]);
        }
        const std::vector<ScoreBreakdown> breakdowns = score(config_, params_, h_q, sub);
        std::vector<double> finals(breakdowns.size());
        for (std::size_t i = 0; i < breakdowns.size(); ++i) {
            finals[i] = breakdowns[i].s_final;
        }
        return finals;
    };
    return iterative_rerank(scorer, passages.size(), iter);
}

} // namespace listrank
