#include "listrank/loss.hpp"

#include <cmath>
#include <string>

#include "listrank/error.hpp"

namespace listrank {

void CircleLossConfig::validate() const {
    if (!(gamma > 0.0)) {
        throw PreconditionError("circle loss: gamma must be positive, got " +
                                std::to_string(gamma));
    }
}

void LabeledScores::validate() const {
    if (scores.size() != labels.size()) {
        throw PreconditionError("labeled scores: " + std::to_string(scores.size()) +
                                " scores vs " + std::to_string(labels.size()) + " labels");
    }
    for (int l : labels) {
        if (l != 0 && l != 1) {
            throw PreconditionError("labeled scores: labels must be 0 or 1");
        }
    }
}

std::size_t LabeledScores::positives() const {
    std::size_t n = 0;
    for (int l : labels) {
        n += (l == 1);
    }
    return n;
}

std::size_t LabeledScores::negatives() const { return labels.size() - positives(); }

namespace {

void require_both_classes(const LabeledScores& x, const char* op) {
    const std::size_t pos = x.positives();
    const std::size_t neg = x.negatives();
    if (pos == 0 || neg == 0) {
        throw PreconditionError(std::string(op) + ": need at least one positive and one " +
                                "negative, got " + std::to_string(pos) + " positive(s) and " +
                                std::to_string(neg) + " negative(s)");
    }
}

struct CircleTerms {
    double r_pos = 0.0;
    double r_neg = 0.0;
};

CircleTerms circle_terms(const LabeledScores& x, const CircleLossConfig& cfg,
                         const std::vector<double>& alphas) {
    CircleTerms t;
    for (std::size_t i = 0; i < x.scores.size(); ++i) {
        const double s = x.scores[i];
        if (x.labels[i] == 1) {
            t.r_pos += std::exp(-cfg.gamma * alphas[i] * (s - cfg.delta_pos()));
        } else {
            t.r_neg += std::exp(cfg.gamma * alphas[i] * (s - cfg.delta_neg()));
        }
    }
    return t;
}

} // namespace

std::vector<double> circle_loss_alphas(const LabeledScores& x, const CircleLossConfig& cfg) {
    std::vector<double> alphas(x.scores.size(), 0.0);
    for (std::size_t i = 0; i < x.scores.size(); ++i) {
        alphas[i] = x.labels[i] == 1 ? std::max(0.0, cfg.o_pos() - x.scores[i])
                                     : std::max(0.0, x.scores[i] - cfg.o_neg());
    }
    return alphas;
}

double circle_loss_frozen(const LabeledScores& x, const CircleLossConfig& cfg,
                          const std::vector<double>& alphas) {
    x.validate();
    cfg.validate();
    require_both_classes(x, "circle_loss");
    if (alphas.size() != x.scores.size()) {
        throw PreconditionError("circle_loss_frozen: alpha count mismatch");
    }
    const CircleTerms t = circle_terms(x, cfg, alphas);
    return std::log1p(t.r_neg * t.r_pos);
}

double circle_loss(const LabeledScores& x, const CircleLossConfig& cfg) {
    return circle_loss_frozen(x, cfg, circle_loss_alphas(x, cfg));
}

std::vector<double> circle_loss_grad(const LabeledScores& x, const CircleLossConfig& cfg) {
    x.validate();
    cfg.validate();
    require_both_classes(x, "circle_loss_grad");
    const std::vector<double> alphas = circle_loss_alphas(x, cfg);
    const CircleTerms t = circle_terms(x, cfg, alphas);
    const double denom = 1.0 + t.r_neg * t.r_pos;
    std::vector<double> grad(x.scores.size(), 0.0);
    for (std::size_t i = 0; i < x.scores.size(); ++i) {
        const double s = x.scores[i];
        const double a = alphas[i];
        if (x.labels[i] == 1) {
            const double term = std::exp(-cfg.gamma * a * (s - cfg.delta_pos()));
            grad[i] = -cfg.gamma * a * term * t.r_neg / denom;
        } else {
            const double term = std::exp(cfg.gamma * a * (s - cfg.delta_neg()));
            grad[i] = cfg.gamma * a * term * t.r_pos / denom;
        }
    }
    return grad;
}

NodeId circle_loss_node_frozen(Graph& g, NodeId scores, const std::vector<int>& labels,
                               const CircleLossConfig& cfg, const std::vector<double>& alphas) {
    cfg.validate();
    const Tensor& s = g.value(scores);
    if (s.cols() != 1 || s.rows() != labels.size()) {
        throw ShapeError("circle_loss_node: scores " + s.shape_string() + " vs " +
                         std::to_string(labels.size()) + " labels");
    }
    if (alphas.size() != labels.size()) {
        throw PreconditionError("circle_loss_node: alpha count mismatch");
    }
    std::vector<std::size_t> pos_idx, neg_idx;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != 0 && labels[i] != 1) {
            throw PreconditionError("circle_loss_node: labels must be 0 or 1");
        }
        (labels[i] == 1 ? pos_idx : neg_idx).push_back(i);
    }
    if (pos_idx.empty() || neg_idx.empty()) {
        throw PreconditionError("circle_loss_node: need at least one positive and one negative, "
                                "got " + std::to_string(pos_idx.size()) + " positive(s) and " +
                                std::to_string(neg_idx.size()) + " negative(s)");
    }

    // The weighting factors are constants on the tape, never differentiated.
    Tensor w_pos({pos_idx.size(), 1});
    for (std::size_t i = 0; i < pos_idx.size(); ++i) {
        w_pos.at(i, 0) = -cfg.gamma * alphas[pos_idx[i]];
    }
    Tensor w_neg({neg_idx.size(), 1});
    for (std::size_t j = 0; j < neg_idx.size(); ++j) {
        w_neg.at(j, 0) = cfg.gamma * alphas[neg_idx[j]];
    }

    const NodeId s_pos = g.select_rows(scores, pos_idx);
    const NodeId s_neg = g.select_rows(scores, neg_idx);
    const NodeId r_pos =
        g.sum_all(g.exp(g.hadamard(g.constant(std::move(w_pos)), g.shift(s_pos, -cfg.delta_pos()))));
    const NodeId r_neg =
        g.sum_all(g.exp(g.hadamard(g.constant(std::move(w_neg)), g.shift(s_neg, -cfg.delta_neg()))));
    return g.log(g.shift(g.hadamard(r_neg, r_pos), 1.0));
}

NodeId circle_loss_node(Graph& g, NodeId scores, const std::vector<int>& labels,
                        const CircleLossConfig& cfg) {
    const Tensor& s = g.value(scores);
    if (s.cols() != 1 || s.rows() != labels.size()) {
        throw ShapeError("circle_loss_node: scores " + s.shape_string() + " vs " +
                         std::to_string(labels.size()) + " labels");
    }
    LabeledScores current;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        current.scores.push_back(s.at(i, 0));
        current.labels.push_back(labels[i]);
    }
    return circle_loss_node_frozen(g, scores, labels, cfg, circle_loss_alphas(current, cfg));
}

double bce_loss(const LabeledScores& x) {
    x.validate();
    if (x.scores.empty()) {
        throw PreconditionError("bce_loss: empty input");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < x.scores.size(); ++i) {
        const double s = x.scores[i];
        if (!(s > 0.0 && s < 1.0)) {
            throw DomainError("bce_loss: score " + std::to_string(s) +
                              " outside the open interval (0, 1)");
        }
        total += x.labels[i] == 1 ? -std::log(s) : -std::log(1.0 - s);
    }
    return total / static_cast<double>(x.scores.size());
}

NodeId bce_loss_node(Graph& g, NodeId scores, const std::vector<int>& labels) {
    const Tensor& s = g.value(scores);
    if (s.cols() != 1 || s.rows() != labels.size()) {
        throw ShapeError("bce_loss_node: scores " + s.shape_string() + " vs " +
                         std::to_string(labels.size()) + " labels");
    }
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const double v = s.at(i, 0);
        if (!(v > 0.0 && v < 1.0)) {
            throw DomainError("bce_loss_node: score " + std::to_string(v) +
                              " outside the open interval (0, 1)");
        }
    }
    std::vector<std::size_t> pos_idx, neg_idx;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        (labels[i] == 1 ? pos_idx : neg_idx).push_back(i);
    }
    std::vector<NodeId> parts;
    if (!pos_idx.empty()) {
        parts.push_back(g.scale(g.log(g.select_rows(scores, pos_idx)), -1.0));
    }
    if (!neg_idx.empty()) {
        parts.push_back(
            g.scale(g.log(g.shift(g.scale(g.select_rows(scores, neg_idx), -1.0), 1.0)), -1.0));
    }
    const NodeId joined = parts.size() == 1 ? parts[0] : g.concat_rows(parts);
    return g.mean_all(joined);
}

} // namespace listrank
