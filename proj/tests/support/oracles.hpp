#pragma once

// Independent reference implementations used as test oracles. Everything here
// is written with plain loops over std::vector<double>, deliberately avoiding
// the Tensor/Graph/kernel code paths it is used to check.

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "listrank/graph.hpp"
#include "listrank/model.hpp"
#include "listrank/params.hpp"

namespace oracles {

using Vec = std::vector<double>;
using listrank::ModelConfig;
using listrank::ParamStore;

/// Naive triple-loop matrix product, c[m x n] = a[m x k] * b[k x n].
Vec naive_matmul(std::size_t m, std::size_t k, std::size_t n, const Vec& a, const Vec& b);

/// Scalar re-evaluation of per-row standardization + affine.
Vec scalar_layer_norm(const Vec& row, double gain, double bias, double eps);

struct EncodeOut {
    Vec z_q;
    std::vector<Vec> z_p;
};

struct ScoreOut {
    double s_origin;
    double s_list;
    double s_final;
};

/// Straight-line forward pass of the list encoder: sequence assembly, masked
/// multi-head attention, residual plus layer norm, feed-forward, re-split.
EncodeOut straight_line_encode(const ModelConfig& cfg, const ParamStore& params, const Vec& h_q,
                               const std::vector<Vec>& h_list);

/// Straight-line scoring head on top of straight_line_encode.
std::vector<ScoreOut> straight_line_score(const ModelConfig& cfg, const ParamStore& params,
                                          const Vec& h_q, const std::vector<Vec>& h_list);

/// Average precision straight from the definition: for every positive,
/// precision at its rank; averaged over the positives.
double brute_force_ap(const std::vector<std::size_t>& ranks, const std::vector<int>& labels);

/// Builds a scalar loss over a graph-bound model. Called once for the
/// analytic gradients and once per probe point by the finite-difference side.
using LossBuilder = std::function<listrank::NodeId(listrank::Graph&, listrank::BoundModel&)>;

struct GradCheck {
    double max_rel_err = 0.0;
    std::string worst_param;
};

/// Reverse-mode vs central-difference comparison over every parameter scalar.
GradCheck check_gradients(const ModelConfig& cfg, const ParamStore& params,
                          const LossBuilder& build, double h = 1e-5, double floor = 1e-8);

/// Tensor helpers for oracle code.
Vec to_vec(const listrank::Tensor& t);

} // namespace oracles
