#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "listrank/evalkit.hpp"
#include "listrank/loss.hpp"
#include "listrank/model.hpp"
#include "listrank/params.hpp"

namespace listrank {

enum class LossKind { CIRCLE, BCE };

std::string to_string(LossKind k);
LossKind loss_kind_from_string(const std::string& s);

struct StageConfig {
    std::size_t epochs = 1;
    std::size_t batch_size = 8; // query groups per optimizer step
    double m = 0.1;
    double learning_rate = 1e-3;
    std::set<std::string> freeze; // parameter names left untouched this stage
    std::string data_path;        // resolved by the caller
};

struct TrainSettings {
    std::uint64_t seed = 1;
    std::size_t group_size = 8; // passages sampled per query, >= 2
    LossKind loss = LossKind::CIRCLE;
    double gamma = 10.0;
    std::size_t checkpoint_every = 0; // steps; 0 = stage boundaries only
    std::string checkpoint_path;      // empty = no checkpoints written
};

struct TrainConfig {
    ModelConfig model;
    TrainSettings settings;
    std::vector<StageConfig> stages;

    void validate() const;
};

struct TrainRecord {
    std::size_t step = 0;  // 1-based within the stage
    std::size_t stage = 0;
    double loss = 0.0;
    double grad_norm = 0.0;
    double wall_ms = 0.0;
};

struct QueryGroup {
    std::string query_id;
    std::string query;
    std::vector<PassageRecord> passages;
};

using Batch = std::vector<QueryGroup>;

struct BatchPlan {
    std::vector<Batch> batches;
    std::size_t skipped_queries = 0; // queries with no usable passages
};

/// Per query: every positive is kept up to group_size - 1, negatives are
/// sampled to fill the group; groups are then shuffled and chunked into
/// batches (the last may be short). Fully deterministic in the seed.
BatchPlan make_batches(const RankingDataset& data, std::size_t group_size,
                       std::size_t batch_size, std::uint64_t seed);

struct StageResult {
    std::vector<TrainRecord> records;
    std::size_t skipped_queries = 0;
    std::size_t skipped_groups = 0; // groups the loss could not use
};

/// Runs one stage of Adam steps over the data. Frozen parameters come out
/// bitwise unchanged. A non-finite loss or gradient aborts with
/// TrainingAborted before any bad update is applied; the parameters keep their
/// last good values and a checkpoint is written when one is configured.
StageResult train_stage(const ModelConfig& model_cfg, ParamStore& params,
                        const RankingDataset& data, const StageConfig& stage,
                        const TrainSettings& settings, std::size_t stage_index);

struct TrainResult {
    std::vector<TrainRecord> records;
    std::size_t skipped_queries = 0;
    std::size_t skipped_groups = 0;
};

/// All stages in order; stage_data[i] feeds stage i.
TrainResult run_training(const TrainConfig& cfg, ParamStore& params,
                         const std::vector<RankingDataset>& stage_data);

/// JSON file mirroring TrainConfig. Stage margins default to -0.2 for the
/// first stage and 0.1 afterwards; the first stage freezes the embedding
/// adapter unless the file says otherwise.
TrainConfig load_train_config(const std::filesystem::path& path);

} // namespace listrank
