#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "listrank/tensor.hpp"

namespace listrank {

using NodeId = std::uint32_t;

/// Reverse-mode tape. Records primitive operations as they execute; nodes are
/// appended after their inputs, so reverse creation order is a valid reverse
/// topological order for the backward sweep.
///
/// A Graph is confined to one logical thread. Tensors handed in or out are
/// values; running many independent graphs concurrently is fine.
class Graph {
public:
    Graph() = default;
    Graph(const Graph&) = delete;
    Graph& operator=(const Graph&) = delete;

    /// Parameter or input node. Gradients are accumulated only for nodes
    /// created with requires_grad = true (and whatever depends on them).
    NodeId leaf(Tensor value, bool requires_grad);
    NodeId constant(Tensor value) { return leaf(std::move(value), false); }

    // --- primitive operations -------------------------------------------
    NodeId matmul(NodeId a, NodeId b);
    NodeId transpose(NodeId a);
    NodeId add(NodeId a, NodeId b);
    NodeId sub(NodeId a, NodeId b);
    NodeId hadamard(NodeId a, NodeId b);
    /// Each row of `m` plus the rank-1 vector `v`.
    NodeId add_row(NodeId m, NodeId v);
    /// Rank-1 vector tiled into `rows` identical rows.
    NodeId broadcast_row(NodeId v, std::size_t rows);
    NodeId scale(NodeId a, double s);
    NodeId shift(NodeId a, double c);
    NodeId exp(NodeId a);
    NodeId log(NodeId a);
    NodeId tanh(NodeId a);
    NodeId sigmoid(NodeId a);
    /// Row-wise exp-normalize over the positions the mask allows; disallowed
    /// outputs are exactly zero. Rows with no allowed position are rejected.
    NodeId masked_softmax(NodeId logits, Mask mask);
    /// Per-row standardization followed by gain/bias. gain and bias are rank-1
    /// of length cols(x).
    NodeId layer_norm(NodeId x, NodeId gain, NodeId bias, double eps = 1e-5);
    NodeId slice_rows(NodeId a, std::size_t r0, std::size_t r1);
    NodeId slice_cols(NodeId a, std::size_t c0, std::size_t c1);
    NodeId concat_rows(std::span<const NodeId> parts);
    NodeId concat_cols(std::span<const NodeId> parts);
    NodeId select_rows(NodeId a, std::vector<std::size_t> indices);
    NodeId sum_all(NodeId a);
    NodeId mean_all(NodeId a);

    // --- values and gradients -------------------------------------------
    const Tensor& value(NodeId id) const { return nodes_[id].value; }

    /// Backward sweep from a single-element root. Populates a gradient of the
    /// node's own shape for every node that the root depends on; untouched
    /// nodes read back as zeros.
    void backward(NodeId root);

    const Tensor& grad(NodeId id);

    std::size_t size() const { return nodes_.size(); }

private:
    struct Node {
        Tensor value;
        Tensor grad; // empty until first accumulation
        bool requires_grad = false;
        std::function<void(Graph&, NodeId)> backprop; // null for leaves
    };

    NodeId push(Tensor value, bool requires_grad,
                std::function<void(Graph&, NodeId)> backprop, const char* op_name);
    void accumulate(NodeId id, const Tensor& delta);
    Tensor& grad_slot(NodeId id);
    bool wants_grad(NodeId id) const { return nodes_[id].requires_grad; }

    std::vector<Node> nodes_;
};

} // namespace listrank
