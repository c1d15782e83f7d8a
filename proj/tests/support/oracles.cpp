#include "support/oracles.hpp"

#include <cmath>
#include <stdexcept>

namespace oracles {

using listrank::BoundModel;
using listrank::Graph;
using listrank::NodeId;
using listrank::Tensor;

Vec to_vec(const Tensor& t) {
    return Vec(t.data().begin(), t.data().end());
}

Vec naive_matmul(std::size_t m, std::size_t k, std::size_t n, const Vec& a, const Vec& b) {
    Vec c(m * n, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t kk = 0; kk < k; ++kk) {
                acc += a[i * k + kk] * b[kk * n + j];
            }
            c[i * n + j] = acc;
        }
    }
    return c;
}

Vec scalar_layer_norm(const Vec& row, double gain, double bias, double eps) {
    const double n = static_cast<double>(row.size());
    double mean = 0.0;
    for (double x : row) {
        mean += x;
    }
    mean /= n;
    double var = 0.0;
    for (double x : row) {
        var += (x - mean) * (x - mean);
    }
    var /= n;
    Vec out(row.size());
    for (std::size_t i = 0; i < row.size(); ++i) {
        out[i] = gain * (row[i] - mean) / std::sqrt(var + eps) + bias;
    }
    return out;
}

namespace {

// Row-vector times matrix: y[j] = sum_i x[i] * w[i][j], w given as a Tensor.
Vec vec_times(const Vec& x, const Tensor& w) {
    const std::size_t rows = w.rows(), cols = w.cols();
    if (x.size() != rows) {
        throw std::runtime_error("oracle vec_times: size mismatch");
    }
    Vec y(cols, 0.0);
    for (std::size_t j = 0; j < cols; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < rows; ++i) {
            acc += x[i] * w.at(i, j);
        }
        y[j] = acc;
    }
    return y;
}

double dot(const Vec& a, const Vec& b, std::size_t offset, std::size_t len) {
    double acc = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
        acc += a[offset + i] * b[offset + i];
    }
    return acc;
}

bool mask_allows(listrank::AttentionVariant variant, std::size_t i, std::size_t j) {
    switch (variant) {
    case listrank::AttentionVariant::LIST:
        return i == 0 ? j == 0 : true;
    case listrank::AttentionVariant::BIDIRECTIONAL:
        return true;
    case listrank::AttentionVariant::PASSAGE:
        return i == 0 ? true : (j == 0 || j == i);
    }
    return false;
}

Vec layer_norm_affine(const Vec& row, const Tensor& gain, const Tensor& bias) {
    const double n = static_cast<double>(row.size());
    double mean = 0.0;
    for (double x : row) {
        mean += x;
    }
    mean /= n;
    double var = 0.0;
    for (double x : row) {
        var += (x - mean) * (x - mean);
    }
    var /= n;
    const double inv = 1.0 / std::sqrt(var + 1e-5);
    Vec out(row.size());
    for (std::size_t i = 0; i < row.size(); ++i) {
        out[i] = gain.at(i) * (row[i] - mean) * inv + bias.at(i);
    }
    return out;
}

double mlp_pair(const ParamStore& params, const std::string& prefix, const Vec& left,
                const Vec& right) {
    Vec x;
    x.reserve(left.size() + right.size());
    x.insert(x.end(), left.begin(), left.end());
    x.insert(x.end(), right.begin(), right.end());
    const Tensor& w1 = params.at(prefix + ".w1");
    const Tensor& b1 = params.at(prefix + ".b1");
    const Tensor& w2 = params.at(prefix + ".w2");
    const Tensor& b2 = params.at(prefix + ".b2");
    Vec hidden = vec_times(x, w1);
    for (std::size_t i = 0; i < hidden.size(); ++i) {
        hidden[i] = std::tanh(hidden[i] + b1.at(i));
    }
    Vec out = vec_times(hidden, w2);
    return out[0] + b2.at(0);
}

} // namespace

EncodeOut straight_line_encode(const ModelConfig& cfg, const ParamStore& params, const Vec& h_q,
                               const std::vector<Vec>& h_list) {
    const std::size_t d = cfg.d;
    const std::size_t n = h_list.size();
    const std::size_t s = n + 1;
    const std::size_t dh = d / cfg.heads;
    const Tensor& e_q = params.at("e_q");
    const Tensor& e_p = params.at("e_p");

    std::vector<Vec> z(s, Vec(d, 0.0));
    for (std::size_t j = 0; j < d; ++j) {
        z[0][j] = h_q[j] + e_q.at(j);
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            z[i + 1][j] = h_list[i][j] + e_p.at(j);
        }
    }

    for (std::size_t l = 0; l < cfg.layers; ++l) {
        const std::string p = "layer" + std::to_string(l) + ".";
        std::vector<Vec> q(s), k(s), v(s);
        for (std::size_t i = 0; i < s; ++i) {
            q[i] = vec_times(z[i], params.at(p + "attn.w_q"));
            k[i] = vec_times(z[i], params.at(p + "attn.w_k"));
            v[i] = vec_times(z[i], params.at(p + "attn.w_v"));
        }
        std::vector<Vec> mixed_in(s, Vec(d, 0.0));
        for (std::size_t h = 0; h < cfg.heads; ++h) {
            const std::size_t off = h * dh;
            for (std::size_t i = 0; i < s; ++i) {
                Vec logits(s, 0.0);
                double maxv = -1e300;
                for (std::size_t j = 0; j < s; ++j) {
                    if (!mask_allows(cfg.attention_variant, i, j)) {
                        continue;
                    }
                    logits[j] = dot(q[i], k[j], off, dh) / std::sqrt(static_cast<double>(dh));
                    maxv = std::max(maxv, logits[j]);
                }
                double denom = 0.0;
                Vec w(s, 0.0);
                for (std::size_t j = 0; j < s; ++j) {
                    if (mask_allows(cfg.attention_variant, i, j)) {
                        w[j] = std::exp(logits[j] - maxv);
                        denom += w[j];
                    }
                }
                for (std::size_t j = 0; j < s; ++j) {
                    if (!mask_allows(cfg.attention_variant, i, j)) {
                        continue;
                    }
                    const double a = w[j] / denom;
                    for (std::size_t c = 0; c < dh; ++c) {
                        mixed_in[i][off + c] += a * v[j][off + c];
                    }
                }
            }
        }
        for (std::size_t i = 0; i < s; ++i) {
            const Vec mixed = vec_times(mixed_in[i], params.at(p + "attn.w_o"));
            Vec res(d);
            for (std::size_t j = 0; j < d; ++j) {
                res[j] = z[i][j] + mixed[j];
            }
            z[i] = layer_norm_affine(res, params.at(p + "ln1.gain"), params.at(p + "ln1.bias"));

            Vec hidden = vec_times(z[i], params.at(p + "ffn.w1"));
            const Tensor& b1 = params.at(p + "ffn.b1");
            for (std::size_t j = 0; j < hidden.size(); ++j) {
                hidden[j] = std::tanh(hidden[j] + b1.at(j));
            }
            Vec ffn = vec_times(hidden, params.at(p + "ffn.w2"));
            const Tensor& b2 = params.at(p + "ffn.b2");
            Vec res2(d);
            for (std::size_t j = 0; j < d; ++j) {
                res2[j] = z[i][j] + ffn[j] + b2.at(j);
            }
            z[i] = layer_norm_affine(res2, params.at(p + "ln2.gain"), params.at(p + "ln2.bias"));
        }
    }

    EncodeOut out;
    out.z_q = z[0];
    out.z_p.assign(z.begin() + 1, z.end());
    return out;
}

std::vector<ScoreOut> straight_line_score(const ModelConfig& cfg, const ParamStore& params,
                                          const Vec& h_q, const std::vector<Vec>& h_list) {
    std::vector<ScoreOut> out(h_list.size());
    const bool need_encode = cfg.feature_mode != listrank::FeatureMode::ORIGINAL_ONLY;
    EncodeOut enc;
    if (need_encode) {
        enc = straight_line_encode(cfg, params, h_q, h_list);
    }
    for (std::size_t i = 0; i < h_list.size(); ++i) {
        double s_origin = 0.0, s_list = 0.0, logit = 0.0;
        switch (cfg.feature_mode) {
        case listrank::FeatureMode::ORIGINAL_ONLY:
            s_origin = mlp_pair(params, "mlp_ori", h_q, h_list[i]);
            logit = s_origin;
            break;
        case listrank::FeatureMode::LISTWISE_ONLY:
            s_list = mlp_pair(params, "mlp_list", enc.z_q, enc.z_p[i]);
            logit = s_list;
            break;
        case listrank::FeatureMode::FUSED: {
            s_origin = mlp_pair(params, "mlp_ori", h_q, h_list[i]);
            s_list = mlp_pair(params, "mlp_list", enc.z_q, enc.z_p[i]);
            logit = mlp_pair(params, "mlp_fused", {s_origin}, {s_list});
            break;
        }
        }
        out[i] = ScoreOut{s_origin, s_list, 1.0 / (1.0 + std::exp(-logit))};
    }
    return out;
}

double brute_force_ap(const std::vector<std::size_t>& ranks, const std::vector<int>& labels) {
    std::size_t positives = 0;
    for (int l : labels) {
        positives += (l == 1);
    }
    if (positives == 0) {
        throw std::runtime_error("brute_force_ap: no positives");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < ranks.size(); ++i) {
        if (labels[i] != 1) {
            continue;
        }
        std::size_t better_or_equal = 0;
        for (std::size_t j = 0; j < ranks.size(); ++j) {
            if (labels[j] == 1 && ranks[j] <= ranks[i]) {
                ++better_or_equal;
            }
        }
        sum += static_cast<double>(better_or_equal) / static_cast<double>(ranks[i]);
    }
    return sum / static_cast<double>(positives);
}

GradCheck check_gradients(const ModelConfig& cfg, const ParamStore& params,
                          const LossBuilder& build, double h, double floor) {
    Graph g;
    BoundModel bound(g, cfg, params, true);
    const NodeId loss = build(g, bound);
    g.backward(loss);

    ParamStore analytic;
    for (const auto& [name, node] : bound.leaves()) {
        analytic.add(name, g.grad(node));
    }

    const listrank::ScalarFn f = [&](const ParamStore& probe) {
        Graph pg;
        BoundModel pb(pg, cfg, probe, false);
        return pg.value(build(pg, pb)).at(0);
    };
    const ParamStore numeric = listrank::finite_diff_grad(f, params, h);

    GradCheck result;
    for (std::size_t i = 0; i < numeric.size(); ++i) {
        const Tensor& a = analytic.at(numeric.name(i));
        const Tensor& n = numeric.tensor(i);
        for (std::size_t j = 0; j < n.size(); ++j) {
            const double err = listrank::relative_error(a.at(j), n.at(j), floor);
            if (err > result.max_rel_err) {
                result.max_rel_err = err;
                result.worst_param = numeric.name(i) + "[" + std::to_string(j) + "]";
            }
        }
    }
    return result;
}

} // namespace oracles
