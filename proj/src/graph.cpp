#include "listrank/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <utility>

#include "listrank/error.hpp"
#include "listrank/kernels.hpp"

namespace listrank {

namespace {

Tensor transpose_of(const Tensor& t) {
    const std::size_t r = t.rows();
    const std::size_t c = t.cols();
    Tensor out({c, r});
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < c; ++j) {
            out.at(j, i) = t.at(i, j);
        }
    }
    return out;
}

void require_rank2(const Tensor& t, const char* op) {
    if (t.rank() != 2) {
        throw ShapeError(std::string(op) + ": expected a rank-2 tensor, got " + t.shape_string());
    }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (!a.same_shape(b)) {
        throw ShapeError(std::string(op) + ": shape mismatch " + a.shape_string() + " vs " +
                         b.shape_string());
    }
}

} // namespace

NodeId Graph::push(Tensor value, bool requires_grad,
                   std::function<void(Graph&, NodeId)> backprop, const char* op_name) {
    value.require_finite(op_name);
    nodes_.push_back(Node{std::move(value), Tensor{}, requires_grad, std::move(backprop)});
    return static_cast<NodeId>(nodes_.size() - 1);
}

Tensor& Graph::grad_slot(NodeId id) {
    Node& n = nodes_[id];
    if (n.grad.size() == 0) {
        n.grad = Tensor::zeros(n.value.shape());
    }
    return n.grad;
}

void Graph::accumulate(NodeId id, const Tensor& delta) {
    Tensor& g = grad_slot(id);
    kernels::active().axpy(1.0, delta.data().data(), g.data().data(), g.size());
}

NodeId Graph::leaf(Tensor value, bool requires_grad) {
    return push(std::move(value), requires_grad, nullptr, "leaf");
}

NodeId Graph::matmul(NodeId a, NodeId b) {
    const Tensor& ta = value(a);
    const Tensor& tb = value(b);
    require_rank2(ta, "matmul");
    require_rank2(tb, "matmul");
    if (ta.cols() != tb.rows()) {
        throw ShapeError("matmul: inner dimensions disagree, " + ta.shape_string() + " vs " +
                         tb.shape_string());
    }
    const std::size_t m = ta.rows(), k = ta.cols(), n = tb.cols();
    Tensor out({m, n});
    kernels::active().gemm_nn(m, k, n, ta.data().data(), tb.data().data(), out.data().data());

    const bool rg = wants_grad(a) || wants_grad(b);
    auto backprop = [a, b, m, k, n](Graph& g, NodeId self) {
        const Tensor& go = g.nodes_[self].grad;
        if (g.wants_grad(a)) {
            const Tensor bt = transpose_of(g.value(b));
            kernels::active().gemm_acc_nn(m, n, k, go.data().data(), bt.data().data(),
                                          g.grad_slot(a).data().data());
        }
        if (g.wants_grad(b)) {
            const Tensor at = transpose_of(g.value(a));
            kernels::active().gemm_acc_nn(k, m, n, at.data().data(), go.data().data(),
                                          g.grad_slot(b).data().data());
        }
    };
    return push(std::move(out), rg, rg ? backprop : std::function<void(Graph&, NodeId)>{},
                "matmul");
}

NodeId Graph::transpose(NodeId a) {
    const Tensor& ta = value(a);
    require_rank2(ta, "transpose");
    Tensor out = transpose_of(ta);
    const bool rg = wants_grad(a);
    auto backprop = [a](Graph& g, NodeId self) {
        g.accumulate(a, transpose_of(g.nodes_[self].grad));
    };
    return push(std::move(out), rg, rg ? backprop : std::function<void(Graph&, NodeId)>{},
                "transpose");
}

NodeId Graph::add(NodeId a, NodeId b) {
    const Tensor& ta = value(a);
    const Tensor& tb = value(b);
    require_same_shape(ta, tb, "add");
    Tensor out(ta.shape());
    kernels::active().add(ta.data().data(), tb.data().data(), out.data().data(), out.size());
    const bool rg = wants_grad(a) || wants_grad(b);
    auto backprop = [a, b](Graph& g, NodeId self) {
        const Tensor& go = g.nodes_[self].grad;
        if (g.wants_grad(a)) {
            g.accumulate(a, go);
        }
        if (g.wants_grad(b)) {
            g.accumulate(b, go);
        }
    };
    return push(std::move(out), rg, rg ? backprop : std::function<void(Graph&, NodeId)>{}, "add");
}

NodeId Graph::sub(NodeId a, NodeId b) {
    const Tensor& ta = value(a);
    const Tensor& tb = value(b);
    require_same_shape(ta, tb, "sub");
    Tensor out(ta.shape());
    kernels::active().sub(ta.data().data(), tb.data().data(), out.data().data(), out.size());
    const bool rg = wants_grad(a) || wants_grad(b);
    auto backprop = [a, b](Graph& g, NodeId self) {
        const Tensor& go = g.nodes_[self].grad;
        if (g.wants_grad(a)) {
            g.accumulate(a, go);
        }
        if (g.wants_grad(b)) {
            Tensor& gb = g.grad_slot(b);
            kernels::active().axpy(-1.0, go.data().data(), gb.data().data(), gb.size());
        }
    };
    return push(std::move(out), rg, rg ? backprop : std::function<void(Graph&, NodeId)>{}, "sub");
}

NodeId Graph::hadamard(NodeId a, NodeId b) {
    const Tensor& ta = value(a);
    const Tensor& tb = value(b);
    require_same_shape(ta, tb, "hadamard");
    Tensor out(ta.shape());
    kernels::active().mul(ta.data().data(), tb.data().data(), out.data().data(), out.size());
    const bool rg = wants_grad(a) || wants_grad(b);
    auto backprop = [a, b](Graph& g, NodeId self) {
        const Tensor& go = g.nodes_[self].grad;
        if (g.wants_grad(a)) {
            Tensor delta(go.shape());
            kernels::active().mul(go.data().data(), g.value(b).data().data(),
                                  delta.data().data(), delta.size());
            g.accumulate(a, delta);
        }
        if (g.wants_grad(b)) {
            Tensor delta(go.shape());
            kernels::active().mul(go.data().data(), g.value(a).data().data(),
                                  delta.data().data(), delta.size());
            g.accumulate(b, delta);
        }
    };
    return push(std::move(out), rg, rg ? backprop : std::function<void(Graph&, NodeId)>{},
                "hadamard");
}

NodeId Graph::add_row(NodeId m, NodeId v) {
    const Tensor& tm = value(m);
    const Tensor& tv = value(v);
    require_rank2(tm, "add_row");
    if (tv.rank() != 1 || tv.size() != tm.cols()) {
        throw ShapeError("add_row: vector " + tv.shape_string() + " does not match matrix " +
                         tm.shape_string());
    }
    Tensor out(tm.shape());
    for (std::size_t r = 0; r < tm.rows(); ++r) {
        kernels::active().add(tm.data().data() + r * tm.cols(), tv.data().data(),
                              out.data().data() + r * tm.cols(), tm.cols());
    }
    const bool rg = wants_grad(m) || wants_grad(v);
    auto backprop = [m, v](Graph& g, NodeId self) {
        const Tensor& go = g.nodes_[self].grad;
        if (g.wants_grad(m)) {
            g.accumulate(m, go);
        }
        if (g.wants_grad(v)) {
            Tensor& gv = g.grad_slot(v);
            for (std::size_t r = 0; r < go.rows(); ++r) {
                kernels::active().axpy(1.0, go.data().data() + r * go.cols(),
                                       gv.data().data(), gv.size());
            }
        }
    };
    return push(std::move(out), rg, rg ? backprop : std::function<void(Graph&, NodeId)>{},
                "add_row");
}

NodeId Graph::broadcast_row(NodeId v, std::size_t rows) {
    const Tensor& tv = value(v);
    if (tv.rank() != 1) {
        throw ShapeError("broadcast_row: expected a rank-1 tensor, got " + tv.shape_string());
    }
    const std::size_t d = tv.size();
    Tensor out({rows, d});
    for (std::size_t r = 0; r < rows; ++r) {
        std::copy(tv.data().begin(), tv.data().end(), out.data().begin() + r * d);
    }
    const bool rg = wants_grad(v);
    auto backprop = [v](Graph& g, NodeId self) {
        const Tensor& go = g.nodes_[self].grad;
        Tensor& gv = g.grad_slot(v);
        for (std::size_t r = 0; r < go.rows(); ++r) {
            kernels::active().axpy(1.0, go.data().data() + r * go.cols(), gv.data().data(),
                                   gv.size());
        }
    };
    return push(std::move(out), rg, rg ? backprop : std::function<void(Graph&, NodeId)>{},
                "broadcast_row");
}

NodeId Graph::scale(NodeId a, double s) {
    const Tensor& ta = value(a);
    Tensor out(ta.shape());
    kernels::active().scale(ta.data().data(), s, out.data().data(), out.size());
    const bool rg = wants_grad(a);
    auto backprop = [a, s](Graph& g, NodeId self) {
        const Tensor& go = g.nodes_[self].grad;
        Tensor& ga = g.grad_slot(a);
        kernels::active().axpy(s, go.data().data(), ga.data().data(), ga.size());
    };
    return push(std::move(out), rg, rg ? backprop : std::function<void(Graph&, NodeId)>{},
                "scale");
}

NodeId Graph::shift(NodeId a, double c) {
    const Tensor& ta = value(a);
    Tensor out(ta.shape());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.at(i) = ta.at(i) + c;
    }
    const bool rg = wants_grad(a);
    auto backprop = [a](Graph& g, NodeId self) { g.accumulate(a, g.nodes_[self].grad); };
    return push(std::move(out), rg, rg ? backprop : std::function<void(Graph&, NodeId)>{},
                "shift");
}

NodeId Graph::exp(NodeId a) {
    const Tensor& ta = value(a);
    Tensor out(ta.shape());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.at(i) = std::exp(ta.at(i));
    }
    const bool rg = wants_grad(a);
    auto backprop = [a](Graph& g, NodeId self) {
        const Tensor& go = g.nodes_[self].grad;
        const Tensor& y = g.value(self);
        Tensor delta(go.shape());
        kernels::active().mul(go.data().data(), y.data().data(), delta.data().data(),
                              delta.size());
        g.accumulate(a, delta);
    };
    return push(std::move(out), rg, rg ? backprop : std::function<void(Graph&, NodeId)>{}, "exp");
}

NodeId Graph::log(NodeId a) {
    const Tensor& ta = value(a);
    Tensor out(ta.shape());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.at(i) = std::log(ta.at(i));
    }
    const bool rg = wants_grad(a);
    auto backprop = [a](Graph& g, NodeId self) {
        const Tensor& go = g.nodes_[self].grad;
        const Tensor& x = g.value(a);
        Tensor delta(go.shape());
        for (std::size_t i = 0; i < delta.size(); ++i) {
            delta.at(i) = go.at(i) / x.at(i);
        }
        g.accumulate(a, delta);
    };
    return push(std::move(out), rg, rg ? backprop : std::function<void(Graph&, NodeId)>{}, "log");
}

NodeId Graph::tanh(NodeId a) {
    const Tensor& ta = value(a);
    Tensor out(ta.shape());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.at(i) = std::tanh(ta.at(i));
    }
    const bool rg = wants_grad(a);
    auto backprop = [a](Graph& g, NodeId self) {
        const Tensor& go = g.nodes_[self].grad;
        const Tensor& y = g.value(self);
        Tensor delta(go.shape());
        for (std::size_t i = 0; i < delta.size(); ++i) {
            delta.at(i) = go.at(i) * (1.0 - y.at(i) * y.at(i));
        }
        g.accumulate(a, delta);
    };
    return push(std::move(out), rg, rg ? backprop : std::function<void(Graph&, NodeId)>{},
                "tanh");
}

NodeId Graph::sigmoid(NodeId a) {
    const Tensor& ta = value(a);
    Tensor out(ta.shape());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double x = ta.at(i);
        out.at(i) = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                             : std::exp(x) / (1.0 + std::exp(x));
    }
    const bool rg = wants_grad(a);
    auto backprop = [a](Graph& g, NodeId self) {
        const Tensor& go = g.nodes_[self].grad;
        const Tensor& y = g.value(self);
        Tensor delta(go.shape());
        for (std::size_t i = 0; i < delta.size(); ++i) {
            delta.at(i) = go.at(i) * y.at(i) * (1.0 - y.at(i));
        }
        g.accumulate(a, delta);
    };
    return push(std::move(out), rg, rg ? backprop : std::function<void(Graph&, NodeId)>{},
                "sigmoid");
}

NodeId Graph::masked_softmax(NodeId logits, Mask mask) {
    const Tensor& x = value(logits);
    require_rank2(x, "masked_softmax");
    if (mask.rows != x.rows() || mask.cols != x.cols()) {
        throw ShapeError("masked_softmax: mask " + std::to_string(mask.rows) + "x" +
                         std::to_string(mask.cols) + " does not match logits " +
                         x.shape_string());
    }
    const std::size_t r = x.rows(), c = x.cols();
    Tensor out({r, c});
    for (std::size_t i = 0; i < r; ++i) {
        double maxv = -std::numeric_limits<double>::infinity();
        bool any = false;
        for (std::size_t j = 0; j < c; ++j) {
            if (mask.at(i, j)) {
                any = true;
                maxv = std::max(maxv, x.at(i, j));
            }
        }
        if (!any) {
            throw PreconditionError("masked_softmax: row " + std::to_string(i) +
                                    " has no allowed positions");
        }
        double denom = 0.0;
        for (std::size_t j = 0; j < c; ++j) {
            if (mask.at(i, j)) {
                const double e = std::exp(x.at(i, j) - maxv);
                out.at(i, j) = e;
                denom += e;
            }
        }
        for (std::size_t j = 0; j < c; ++j) {
            if (mask.at(i, j)) {
                out.at(i, j) /= denom;
            }
        }
    }
    const bool rg = wants_grad(logits);
    auto backprop = [logits, mask = std::move(mask)](Graph& g, NodeId self) {
        const Tensor& go = g.nodes_[self].grad;
        const Tensor& y = g.value(self);
        Tensor delta(go.shape());
        for (std::size_t i = 0; i < y.rows(); ++i) {
            double dot = 0.0;
            for (std::size_t j = 0; j < y.cols(); ++j) {
                if (mask.at(i, j)) {
                    dot += go.at(i, j) * y.at(i, j);
                }
            }
            for (std::size_t j = 0; j < y.cols(); ++j) {
                if (mask.at(i, j)) {
                    delta.at(i, j) = y.at(i, j) * (go.at(i, j) - dot);
                }
            }
        }
        g.accumulate(logits, delta);
    };
    return push(std::move(out), rg, rg ? backprop : std::function<void(Graph&, NodeId)>{},
                "masked_softmax");
}

NodeId Graph::layer_norm(NodeId x, NodeId gain, NodeId bias, double eps) {
    const Tensor& tx = value(x);
    const Tensor& tg = value(gain);
    const Tensor& tb = value(bias);
    require_rank2(tx, "layer_norm");
    const std::size_t r = tx.rows(), d = tx.cols();
    if (tg.rank() != 1 || tg.size() != d || tb.rank() != 1 || tb.size() != d) {
        throw ShapeError("layer_norm: gain " + tg.shape_string() + " / bias " +
                         tb.shape_string() + " do not match " + tx.shape_string());
    }
    Tensor out({r, d});
    // Normalized rows and inverse stddev are needed again in the backward pass.
    auto xhat = std::make_shared<Tensor>(Tensor::zeros({r, d}));
    auto inv_std = std::make_shared<std::vector<double>>(r, 0.0);
    for (std::size_t i = 0; i < r; ++i) {
        double mean = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            mean += tx.at(i, j);
        }
        mean /= static_cast<double>(d);
        double var = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double dx = tx.at(i, j) - mean;
            var += dx * dx;
        }
        var /= static_cast<double>(d);
        const double inv = 1.0 / std::sqrt(var + eps);
        (*inv_std)[i] = inv;
        for (std::size_t j = 0; j < d; ++j) {
            const double xh = (tx.at(i, j) - mean) * inv;
            xhat->at(i, j) = xh;
            out.at(i, j) = tg.at(j) * xh + tb.at(j);
        }
    }
    const bool rg = wants_grad(x) || wants_grad(gain) || wants_grad(bias);
    auto backprop = [x, gain, bias, xhat, inv_std](Graph& g, NodeId self) {
        const Tensor& go = g.nodes_[self].grad;
        const std::size_t r = go.rows(), d = go.cols();
        if (g.wants_grad(gain)) {
            Tensor& gg = g.grad_slot(gain);
            for (std::size_t i = 0; i < r; ++i) {
                for (std::size_t j = 0; j < d; ++j) {
                    gg.at(j) += go.at(i, j) * xhat->at(i, j);
                }
            }
        }
        if (g.wants_grad(bias)) {
            Tensor& gb = g.grad_slot(bias);
            for (std::size_t i = 0; i < r; ++i) {
                for (std::size_t j = 0; j < d; ++j) {
                    gb.at(j) += go.at(i, j);
                }
            }
        }
        if (g.wants_grad(x)) {
            const Tensor& tg = g.value(gain);
            Tensor delta({r, d});
            for (std::size_t i = 0; i < r; ++i) {
                double m1 = 0.0, m2 = 0.0;
                for (std::size_t j = 0; j < d; ++j) {
                    const double h = go.at(i, j) * tg.at(j);
                    m1 += h;
                    m2 += h * xhat->at(i, j);
                }
                m1 /= static_cast<double>(d);
                m2 /= static_cast<double>(d);
                for (std::size_t j = 0; j < d; ++j) {
                    const double h = go.at(i, j) * tg.at(j);
                    delta.at(i, j) = (*inv_std)[i] * (h - m1 - xhat->at(i, j) * m2);
                }
            }
            g.accumulate(x, delta);
        }
    };
    return push(std::move(out), rg, rg ? backprop : std::function<void(Graph&, NodeId)>{},
                "layer_norm");
}

NodeId Graph::slice_rows(NodeId a, std::size_t r0, std::size_t r1) {
    const Tensor& ta = value(a);
    require_rank2(ta, "slice_rows");
    if (r0 >= r1 || r1 > ta.rows()) {
        throw ShapeError("slice_rows: range [" + std::to_string(r0) + ", " + std::to_string(r1) +
                         ") out of bounds for " + ta.shape_string());
    }
    const std::size_t c = ta.cols();
    Tensor out({r1 - r0, c});
    std::copy(ta.data().begin() + r0 * c, ta.data().begin() + r1 * c, out.data().begin());
    const bool rg = wants_grad(a);
    auto backprop = [a, r0, c](Graph& g, NodeId self) {
        const Tensor& go = g.nodes_[self].grad;
        Tensor& ga = g.grad_slot(a);
        kernels::active().axpy(1.0, go.data().data(), ga.data().data() + r0 * c, go.size());
    };
    return push(std::move(out), rg, rg ? backprop : std::function<void(Graph&, NodeId)>{},
                "slice_rows");
}

NodeId Graph::slice_cols(NodeId a, std::size_t c0, std::size_t c1) {
    const Tensor& ta = value(a);
    require_rank2(ta, "slice_cols");
    if (c0 >= c1 || c1 > ta.cols()) {
        throw ShapeError("slice_cols: range [" + std::to_string(c0) + ", " + std::to_string(c1) +
                         ") out of bounds for " + ta.shape_string());
    }
    const std::size_t r = ta.rows(), c = ta.cols(), w = c1 - c0;
    Tensor out({r, w});
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < w; ++j) {
            out.at(i, j) = ta.at(i, c0 + j);
        }
    }
    const bool rg = wants_grad(a);
    auto backprop = [a, c0, w](Graph& g, NodeId self) {
        const Tensor& go = g.nodes_[self].grad;
        Tensor& ga = g.grad_slot(a);
        for (std::size_t i = 0; i < go.rows(); ++i) {
            for (std::size_t j = 0; j < w; ++j) {
                ga.at(i, c0 + j) += go.at(i, j);
            }
        }
    };
    return push(std::move(out), rg, rg ? backprop : std::function<void(Graph&, NodeId)>{},
                "slice_cols");
}

NodeId Graph::concat_rows(std::span<const NodeId> parts) {
    if (parts.empty()) {
        throw ShapeError("concat_rows: no inputs");
    }
    const std::size_t c = value(parts[0]).cols();
    std::size_t total = 0;
    bool rg = false;
    for (NodeId p : parts) {
        const Tensor& t = value(p);
        require_rank2(t, "concat_rows");
        if (t.cols() != c) {
            throw ShapeError("concat_rows: column mismatch, " + std::to_string(c) + " vs " +
                             t.shape_string());
        }
        total += t.rows();
        rg = rg || wants_grad(p);
    }
    Tensor out({total, c});
    std::size_t r = 0;
    for (NodeId p : parts) {
        const Tensor& t = value(p);
        std::copy(t.data().begin(), t.data().end(), out.data().begin() + r * c);
        r += t.rows();
    }
    std::vector<NodeId> owned(parts.begin(), parts.end());
    auto backprop = [owned, c](Graph& g, NodeId self) {
        const Tensor& go = g.nodes_[self].grad;
        std::size_t r = 0;
        for (NodeId p : owned) {
            const std::size_t pr = g.value(p).rows();
            if (g.wants_grad(p)) {
                Tensor& gp = g.grad_slot(p);
                kernels::active().axpy(1.0, go.data().data() + r * c, gp.data().data(),
                                       gp.size());
            }
            r += pr;
        }
    };
    return push(std::move(out), rg, rg ? backprop : std::function<void(Graph&, NodeId)>{},
                "concat_rows");
}

NodeId Graph::concat_cols(std::span<const NodeId> parts) {
    if (parts.empty()) {
        throw ShapeError("concat_cols: no inputs");
    }
    const std::size_t r = value(parts[0]).rows();
    std::size_t total = 0;
    bool rg = false;
    for (NodeId p : parts) {
        const Tensor& t = value(p);
        require_rank2(t, "concat_cols");
        if (t.rows() != r) {
            throw ShapeError("concat_cols: row mismatch, " + std::to_string(r) + " vs " +
                             t.shape_string());
        }
        total += t.cols();
        rg = rg || wants_grad(p);
    }
    Tensor out({r, total});
    std::size_t c = 0;
    for (NodeId p : parts) {
        const Tensor& t = value(p);
        for (std::size_t i = 0; i < r; ++i) {
            for (std::size_t j = 0; j < t.cols(); ++j) {
                out.at(i, c + j) = t.at(i, j);
            }
        }
        c += t.cols();
    }
    std::vector<NodeId> owned(parts.begin(), parts.end());
    auto backprop = [owned](Graph& g, NodeId self) {
        const Tensor& go = g.nodes_[self].grad;
        std::size_t c = 0;
        for (NodeId p : owned) {
            const std::size_t pc = g.value(p).cols();
            if (g.wants_grad(p)) {
                Tensor& gp = g.grad_slot(p);
                for (std::size_t i = 0; i < go.rows(); ++i) {
                    for (std::size_t j = 0; j < pc; ++j) {
                        gp.at(i, j) += go.at(i, c + j);
                    }
                }
            }
            c += pc;
        }
    };
    return push(std::move(out), rg, rg ? backprop : std::function<void(Graph&, NodeId)>{},
                "concat_cols");
}

NodeId Graph::select_rows(NodeId a, std::vector<std::size_t> indices) {
    const Tensor& ta = value(a);
    require_rank2(ta, "select_rows");
    const std::size_t c = ta.cols();
    Tensor out({indices.size(), c});
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] >= ta.rows()) {
            throw ShapeError("select_rows: index " + std::to_string(indices[i]) +
                             " out of bounds for " + ta.shape_string());
        }
        for (std::size_t j = 0; j < c; ++j) {
            out.at(i, j) = ta.at(indices[i], j);
        }
    }
    const bool rg = wants_grad(a);
    auto backprop = [a, indices = std::move(indices)](Graph& g, NodeId self) {
        const Tensor& go = g.nodes_[self].grad;
        Tensor& ga = g.grad_slot(a);
        for (std::size_t i = 0; i < indices.size(); ++i) {
            for (std::size_t j = 0; j < go.cols(); ++j) {
                ga.at(indices[i], j) += go.at(i, j);
            }
        }
    };
    return push(std::move(out), rg, rg ? backprop : std::function<void(Graph&, NodeId)>{},
                "select_rows");
}

NodeId Graph::sum_all(NodeId a) {
    const Tensor& ta = value(a);
    double s = 0.0;
    for (std::size_t i = 0; i < ta.size(); ++i) {
        s += ta.at(i);
    }
    const bool rg = wants_grad(a);
    auto backprop = [a](Graph& g, NodeId self) {
        const double go = g.nodes_[self].grad.at(0);
        Tensor& ga = g.grad_slot(a);
        for (std::size_t i = 0; i < ga.size(); ++i) {
            ga.at(i) += go;
        }
    };
    return push(Tensor::scalar(s), rg, rg ? backprop : std::function<void(Graph&, NodeId)>{},
                "sum_all");
}

NodeId Graph::mean_all(NodeId a) {
    const Tensor& ta = value(a);
    const double n = static_cast<double>(ta.size());
    double s = 0.0;
    for (std::size_t i = 0; i < ta.size(); ++i) {
        s += ta.at(i);
    }
    const bool rg = wants_grad(a);
    auto backprop = [a, n](Graph& g, NodeId self) {
        const double go = g.nodes_[self].grad.at(0) / n;
        Tensor& ga = g.grad_slot(a);
        for (std::size_t i = 0; i < ga.size(); ++i) {
            ga.at(i) += go;
        }
    };
    return push(Tensor::scalar(s / n), rg,
                rg ? backprop : std::function<void(Graph&, NodeId)>{}, "mean_all");
}

void Graph::backward(NodeId root) {
    if (value(root).size() != 1) {
        throw PreconditionError("backward: root must hold a single value, got shape " +
                                value(root).shape_string());
    }
    for (Node& n : nodes_) {
        n.grad = Tensor{};
    }
    grad_slot(root).at(0) = 1.0;
    for (NodeId id = root + 1; id-- > 0;) {
        Node& n = nodes_[id];
        if (n.grad.size() == 0 || !n.backprop) {
            continue;
        }
        n.backprop(*this, id);
    }
}

const Tensor& Graph::grad(NodeId id) {
    return grad_slot(id);
}

} // namespace listrank
