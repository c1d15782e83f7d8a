#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "listrank/embedder.hpp"
#include "listrank/inference.hpp"
#include "listrank/model.hpp"
#include "listrank/params.hpp"

namespace listrank {

/// Loaded model plus the text pipeline in front of it. Immutable after
/// construction; all scoring entry points are const and safe to call
/// concurrently.
class Engine {
public:
    Engine(ModelConfig config, ParamStore params, std::string model_id = "in-memory");

    static Engine from_checkpoint(const std::filesystem::path& path);

    const ModelConfig& config() const { return config_; }
    const ParamStore& params() const { return params_; }
    const std::string& model_id() const { return model_id_; }

    /// hash-embedded then adapter-mapped feature for one text.
    Tensor feature(const std::string& text) const;

    /// One full scoring pass over all passages.
    std::vector<ScoreBreakdown> score_texts(const std::string& query,
                                            const std::vector<std::string>& passages) const;

    /// Ranks passages either with a single scoring pass (direct) or with
    /// iterative tail elimination.
    RankedResult rank_texts(const std::string& query, const std::vector<std::string>& passages,
                            bool iterative, const IterConfig& iter) const;

private:
    ModelConfig config_;
    ParamStore params_;
    HashEmbedder embedder_;
    AdapterParams adapter_;
    std::string model_id_;
};

} // namespace listrank
