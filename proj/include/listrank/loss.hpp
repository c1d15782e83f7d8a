#pragma once

#include <vector>

#include "listrank/graph.hpp"

namespace listrank {

/// Margin/scale pair for the circle loss. The optimum targets and decision
/// margins all derive from m and are recomputed on demand rather than stored.
struct CircleLossConfig {
    double m = 0.1;
    double gamma = 10.0;

    double delta_pos() const { return 1.0 - m; }
    double delta_neg() const { return m; }
    double o_pos() const { return 1.0 + m; }
    double o_neg() const { return -m; }

    void validate() const;
};

/// Scores in (0,1) with binary relevance labels, one query group.
struct LabeledScores {
    std::vector<double> scores;
    std::vector<int> labels; // 0 or 1

    void validate() const;
    std::size_t positives() const;
    std::size_t negatives() const;
};

/// Pair-weighted contrastive loss:
///   L = log(1 + r_neg * r_pos)
///   r_neg = sum_j exp( gamma * a_neg_j * (s_neg_j - delta_neg))
///   r_pos = sum_i exp(-gamma * a_pos_i * (s_pos_i - delta_pos))
/// with self-adaptive weights a_neg = max(0, s_neg - o_neg),
/// a_pos = max(0, o_pos - s_pos). Requires at least one positive and one
/// negative.
double circle_loss(const LabeledScores& x, const CircleLossConfig& cfg);

/// Gradient of circle_loss per score, with the adaptive weights treated as
/// constants (no gradient flows through them). Positives get non-positive
/// entries, negatives non-negative; both decay to zero past their optimum.
std::vector<double> circle_loss_grad(const LabeledScores& x, const CircleLossConfig& cfg);

/// circle_loss with the adaptive weights pinned to explicit values; this is
/// the function the finite-difference oracle probes.
double circle_loss_frozen(const LabeledScores& x, const CircleLossConfig& cfg,
                          const std::vector<double>& alphas);

/// Adaptive weight per score at the current values (positives use a_pos,
/// negatives a_neg).
std::vector<double> circle_loss_alphas(const LabeledScores& x, const CircleLossConfig& cfg);

/// Graph form used in training: scores is an [N x 1] node; the adaptive
/// weights enter as constants computed from the node's current values.
NodeId circle_loss_node(Graph& g, NodeId scores, const std::vector<int>& labels,
                        const CircleLossConfig& cfg);

/// Graph form with the adaptive weights supplied by the caller (indexed like
/// circle_loss_alphas). circle_loss_node evaluates the weights at the current
/// scores and delegates here.
NodeId circle_loss_node_frozen(Graph& g, NodeId scores, const std::vector<int>& labels,
                               const CircleLossConfig& cfg, const std::vector<double>& alphas);

/// Mean binary cross-entropy over all items; scores must lie strictly in (0,1).
double bce_loss(const LabeledScores& x);

/// Graph form of bce_loss.
NodeId bce_loss_node(Graph& g, NodeId scores, const std::vector<int>& labels);

} // namespace listrank
