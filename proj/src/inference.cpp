#include "listrank/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "listrank/error.hpp"

namespace listrank {

void IterConfig::validate() const {
    if (alpha < 1) {
        throw PreconditionError("iterative inference: alpha must be >= 1");
    }
    if (!(beta > 0.0 && beta < 1.0)) {
        throw PreconditionError("iterative inference: beta must lie in (0, 1), got " +
                                std::to_string(beta));
    }
}

std::vector<std::size_t> rank_direct(const std::vector<double>& scores) {
    if (scores.empty()) {
        throw PreconditionError("rank_direct: empty score list");
    }
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&scores](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    std::vector<std::size_t> ranks(scores.size());
    for (std::size_t r = 0; r < order.size(); ++r) {
        ranks[order[r]] = r + 1;
    }
    return ranks;
}

namespace {

/// Input positions sorted descending by score, ties by ascending position.
std::vector<std::size_t> descending_order(const std::vector<std::size_t>& subset,
                                          const std::vector<double>& scores) {
    std::vector<std::size_t> order(subset.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) {
            return scores[a] > scores[b];
        }
        return subset[a] < subset[b];
    });
    return order;
}

std::vector<double> run_scorer(const SubsetScorer& scorer, const std::vector<std::size_t>& subset,
                               std::size_t round) {
    std::vector<double> scores;
    try {
        scores = scorer(subset);
    } catch (const std::exception& e) {
        throw std::runtime_error("iterative_rerank: scorer failed in round " +
                                 std::to_string(round) + ": " + e.what());
    }
    if (scores.size() != subset.size()) {
        throw std::runtime_error("iterative_rerank: scorer returned " +
                                 std::to_string(scores.size()) + " scores for " +
                                 std::to_string(subset.size()) + " passages in round " +
                                 std::to_string(round));
    }
    return scores;
}

} // namespace

std::size_t iterative_round_count(std::size_t n_passages, const IterConfig& cfg) {
    cfg.validate();
    std::size_t n = n_passages;
    std::size_t rounds = 0;
    while (n > cfg.alpha) {
        n -= static_cast<std::size_t>(std::ceil(static_cast<double>(n) * cfg.beta));
        ++rounds;
    }
    if (n > 0) {
        ++rounds;
    }
    return rounds;
}

RankedResult iterative_rerank(const SubsetScorer& scorer, std::size_t n_passages,
                              const IterConfig& cfg) {
    cfg.validate();
    if (n_passages == 0) {
        throw PreconditionError("iterative_rerank: empty passage list");
    }

    RankedResult result;
    result.passages.resize(n_passages);
    for (std::size_t i = 0; i < n_passages; ++i) {
        result.passages[i].index = i;
    }

    std::vector<std::size_t> pool(n_passages);
    std::iota(pool.begin(), pool.end(), 0);

    while (pool.size() > cfg.alpha) {
        const std::size_t nums =
            static_cast<std::size_t>(std::ceil(static_cast<double>(pool.size()) * cfg.beta));
        const std::vector<double> scores = run_scorer(scorer, pool, result.rounds + 1);
        ++result.rounds;
        const std::vector<std::size_t> order = descending_order(pool, scores);
        // Fix the worst `nums` passages; ranks fill from the bottom of the
        // range still open this round.
        for (std::size_t i = 1; i <= nums; ++i) {
            const std::size_t local = order[order.size() - i];
            RankedPassage& p = result.passages[pool[local]];
            p.rank = pool.size() - (i - 1);
            p.score = scores[local];
        }
        std::vector<std::size_t> survivors;
        survivors.reserve(pool.size() - nums);
        std::vector<bool> removed(pool.size(), false);
        for (std::size_t i = 1; i <= nums; ++i) {
            removed[order[order.size() - i]] = true;
        }
        for (std::size_t i = 0; i < pool.size(); ++i) {
            if (!removed[i]) {
                survivors.push_back(pool[i]);
            }
        }
        pool = std::move(survivors);
    }

    if (!pool.empty()) {
        const std::vector<double> scores = run_scorer(scorer, pool, result.rounds + 1);
        ++result.rounds;
        const std::vector<std::size_t> order = descending_order(pool, scores);
        for (std::size_t i = 1; i <= pool.size(); ++i) {
            const std::size_t local = order[order.size() - i];
            RankedPassage& p = result.passages[pool[local]];
            p.rank = pool.size() - (i - 1);
            p.score = scores[local];
        }
    }
    return result;
}

} // namespace listrank
