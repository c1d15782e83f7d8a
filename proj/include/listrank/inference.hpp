#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace listrank {

/// Controls for iterative reranking: iterate while more than `alpha` passages
/// remain, eliminating a `beta` fraction (rounded up) per round.
struct IterConfig {
    std::size_t alpha = 20;
    double beta = 0.2;

    void validate() const;
};

struct RankedPassage {
    std::size_t index = 0; // input position
    double score = 0.0;    // score from the round in which the rank was fixed
    std::size_t rank = 0;  // 1 = most similar
};

struct RankedResult {
    std::vector<RankedPassage> passages; // input order
    std::size_t rounds = 0;              // scoring passes performed
};

/// Descending-by-score ranks, ties broken by ascending input index.
/// ranks[i] is the 1-based rank of item i.
std::vector<std::size_t> rank_direct(const std::vector<double>& scores);

/// Scores a subset of the surviving passages, identified by their input
/// positions, and returns one score per entry in the same order.
using SubsetScorer = std::function<std::vector<double>(const std::vector<std::size_t>&)>;

/// Tournament-style ranking: each round scores every survivor, fixes the worst
/// ceil(beta * |P|) passages at the bottom of the remaining rank range, and
/// re-scores the rest; the final round (at most alpha survivors) ranks
/// everything that is left. The per-round order is computed once and consumed
/// from the worst end.
RankedResult iterative_rerank(const SubsetScorer& scorer, std::size_t n_passages,
                              const IterConfig& cfg);

/// Number of scoring passes iterative_rerank performs for a given size.
std::size_t iterative_round_count(std::size_t n_passages, const IterConfig& cfg);

} // namespace listrank
