#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "listrank/engine.hpp"
#include "listrank/inference.hpp"

namespace listrank {

struct PassageRecord {
    std::string id;
    std::string text;
    int label = 0; // 1 = relevant
};

struct QueryRecord {
    std::string query_id;
    std::string query;
    std::vector<PassageRecord> passages;
};

struct RankingDataset {
    std::vector<QueryRecord> records;

    /// Enforces unique query ids and per-query unique passage ids.
    void validate() const;
};

/// JSON Lines, one query per line:
/// {"query_id": str, "query": str, "passages": [{"id": str, "text": str, "label": 0|1}]}
RankingDataset load_dataset(const std::filesystem::path& path);
void save_dataset(const std::filesystem::path& path, const RankingDataset& dataset);

/// Classical uncut average precision from 1-based ranks. Returns nullopt when
/// the query has no positive labels (the caller excludes it from the mean).
std::optional<double> average_precision(const std::vector<std::size_t>& ranks,
                                        const std::vector<int>& labels);

enum class RankMode { DIRECT, ITERATIVE };

struct QueryEval {
    std::string query_id;
    double ap = 0.0;
    std::size_t rounds = 0;
};

struct AblationRow {
    std::map<std::string, std::string> cell; // axis -> value
    double map_direct = 0.0;
    std::optional<double> map_iterative;
    std::string note;
    double runtime_sec = 0.0;
};

struct EvalReport {
    std::string mode;
    std::vector<QueryEval> per_query;
    std::size_t skipped = 0; // queries without positives (or without passages)
    double map = 0.0;
    double runtime_sec = 0.0;
    std::vector<AblationRow> rows; // filled by ablation runs
};

std::string report_to_json(const EvalReport& report);
std::string report_to_text(const EvalReport& report);

/// Scores and ranks every query with the engine, aggregating mean average
/// precision. Engines in original-only feature mode are ranked directly even
/// when iterative mode is requested, since per-passage scores cannot depend on
/// the other passages in that mode.
EvalReport evaluate(const Engine& engine, const RankingDataset& dataset, const IterConfig& iter,
                    RankMode mode);

struct SynthConfig {
    std::uint64_t seed = 7;
    std::size_t n_queries = 50;
    std::size_t passages_per_query = 12;
    std::size_t n_topics = 5;            // >= 2
    double hard_negative_rate = 0.3;     // fraction of negatives mixing in query-topic words
};

struct SynthResult {
    RankingDataset dataset;
    std::vector<std::size_t> query_topics; // topic index per query
};

/// Deterministic topical corpus: every query and its positives share a topic
/// vocabulary built from topic-specific syllables; negatives come from other
/// topics, optionally blended with query-topic words as hard negatives.
SynthResult synthesize_dataset(const SynthConfig& cfg);

/// Deterministic split by query; the second part holds ceil(fraction * n).
std::pair<RankingDataset, RankingDataset> split_dataset(const RankingDataset& dataset,
                                                        double eval_fraction,
                                                        std::uint64_t seed);

} // namespace listrank
