#include "listrank/model.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "config_json.hpp"
#include "listrank/error.hpp"
#include "listrank/rng.hpp"

namespace listrank {

std::string to_string(AttentionVariant v) {
    switch (v) {
    case AttentionVariant::LIST: return "list";
    case AttentionVariant::BIDIRECTIONAL: return "bidirectional";
    case AttentionVariant::PASSAGE: return "passage";
    }
    return "unknown";
}

std::string to_string(FeatureMode m) {
    switch (m) {
    case FeatureMode::FUSED: return "fused";
    case FeatureMode::LISTWISE_ONLY: return "listwise_only";
    case FeatureMode::ORIGINAL_ONLY: return "original_only";
    }
    return "unknown";
}

AttentionVariant attention_variant_from_string(const std::string& s) {
    if (s == "list") {
        return AttentionVariant::LIST;
    }
    if (s == "bidirectional") {
        return AttentionVariant::BIDIRECTIONAL;
    }
    if (s == "passage") {
        return AttentionVariant::PASSAGE;
    }
    throw ConfigError("unknown attention variant: \"" + s +
                      "\" (expected list | bidirectional | passage)");
}

FeatureMode feature_mode_from_string(const std::string& s) {
    if (s == "fused") {
        return FeatureMode::FUSED;
    }
    if (s == "listwise_only") {
        return FeatureMode::LISTWISE_ONLY;
    }
    if (s == "original_only") {
        return FeatureMode::ORIGINAL_ONLY;
    }
    throw ConfigError("unknown feature mode: \"" + s +
                      "\" (expected fused | listwise_only | original_only)");
}

void ModelConfig::validate() const {
    if (d == 0 || layers == 0 || heads == 0 || ffn_dim == 0) {
        throw ConfigError("model config: d, layers, heads and ffn_dim must be positive");
    }
    if (d % heads != 0) {
        throw ConfigError("model config: d=" + std::to_string(d) +
                          " is not divisible by heads=" + std::to_string(heads));
    }
}

Mask build_mask(AttentionVariant variant, std::size_t n_passages) {
    const std::size_t s = n_passages + 1;
    Mask mask(s, s, false);
    switch (variant) {
    case AttentionVariant::LIST:
        mask.set(0, 0, true);
        for (std::size_t i = 1; i < s; ++i) {
            for (std::size_t j = 0; j < s; ++j) {
                mask.set(i, j, true);
            }
        }
        break;
    case AttentionVariant::BIDIRECTIONAL:
        for (std::size_t i = 0; i < s; ++i) {
            for (std::size_t j = 0; j < s; ++j) {
                mask.set(i, j, true);
            }
        }
        break;
    case AttentionVariant::PASSAGE:
        for (std::size_t j = 0; j < s; ++j) {
            mask.set(0, j, true);
        }
        for (std::size_t i = 1; i < s; ++i) {
            mask.set(i, 0, true);
            mask.set(i, i, true);
        }
        break;
    }
    return mask;
}

namespace {

enum class Init { UNIFORM, ZEROS, ONES, IDENTITY };

struct TensorSpec {
    std::string name;
    std::vector<std::size_t> shape;
    Init init;
    std::size_t fan_in; // for UNIFORM
};

std::vector<TensorSpec> tensor_specs(const ModelConfig& c) {
    std::vector<TensorSpec> specs;
    const std::size_t d = c.d;
    const std::size_t f = c.ffn_dim;
    specs.push_back({"e_q", {d}, Init::UNIFORM, d});
    specs.push_back({"e_p", {d}, Init::UNIFORM, d});
    for (std::size_t l = 0; l < c.layers; ++l) {
        const std::string p = "layer" + std::to_string(l) + ".";
        specs.push_back({p + "attn.w_q", {d, d}, Init::UNIFORM, d});
        specs.push_back({p + "attn.w_k", {d, d}, Init::UNIFORM, d});
        specs.push_back({p + "attn.w_v", {d, d}, Init::UNIFORM, d});
        specs.push_back({p + "attn.w_o", {d, d}, Init::UNIFORM, d});
        specs.push_back({p + "ln1.gain", {d}, Init::ONES, 0});
        specs.push_back({p + "ln1.bias", {d}, Init::ZEROS, 0});
        specs.push_back({p + "ffn.w1", {d, f}, Init::UNIFORM, d});
        specs.push_back({p + "ffn.b1", {f}, Init::UNIFORM, d});
        specs.push_back({p + "ffn.w2", {f, d}, Init::UNIFORM, f});
        specs.push_back({p + "ffn.b2", {d}, Init::UNIFORM, f});
        specs.push_back({p + "ln2.gain", {d}, Init::ONES, 0});
        specs.push_back({p + "ln2.bias", {d}, Init::ZEROS, 0});
    }
    for (const char* mlp : {"mlp_ori", "mlp_list"}) {
        const std::string p = std::string(mlp) + ".";
        specs.push_back({p + "w1", {2 * d, d}, Init::UNIFORM, 2 * d});
        specs.push_back({p + "b1", {d}, Init::UNIFORM, 2 * d});
        specs.push_back({p + "w2", {d, 1}, Init::UNIFORM, d});
        specs.push_back({p + "b2", {1}, Init::UNIFORM, d});
    }
    specs.push_back({"mlp_fused.w1", {2, 4}, Init::UNIFORM, 2});
    specs.push_back({"mlp_fused.b1", {4}, Init::UNIFORM, 2});
    specs.push_back({"mlp_fused.w2", {4, 1}, Init::UNIFORM, 4});
    specs.push_back({"mlp_fused.b2", {1}, Init::UNIFORM, 4});
    specs.push_back({"adapter.weight", {d, d}, Init::IDENTITY, 0});
    specs.push_back({"adapter.bias", {d}, Init::ZEROS, 0});
    return specs;
}

} // namespace

ParamStore init_params(const ModelConfig& config) {
    config.validate();
    Rng rng(config.seed);
    ParamStore store;
    for (const TensorSpec& spec : tensor_specs(config)) {
        Tensor t(spec.shape);
        switch (spec.init) {
        case Init::UNIFORM: {
            const double bound = 1.0 / std::sqrt(static_cast<double>(spec.fan_in));
            for (std::size_t i = 0; i < t.size(); ++i) {
                t.at(i) = rng.uniform(-bound, bound);
            }
            break;
        }
        case Init::ZEROS:
            break;
        case Init::ONES:
            for (std::size_t i = 0; i < t.size(); ++i) {
                t.at(i) = 1.0;
            }
            break;
        case Init::IDENTITY:
            t = Tensor::identity(spec.shape[0]);
            break;
        }
        store.add(spec.name, std::move(t));
    }
    return store;
}

std::size_t param_scalar_count(const ModelConfig& config) {
    std::size_t n = 0;
    for (const TensorSpec& spec : tensor_specs(config)) {
        std::size_t s = 1;
        for (std::size_t e : spec.shape) {
            s *= e;
        }
        n += s;
    }
    return n;
}

BoundModel::BoundModel(Graph& graph, const ModelConfig& config, const ParamStore& params,
                       bool with_grad, const std::set<std::string>* frozen)
    : graph_(&graph), config_(&config) {
    config.validate();
    for (const TensorSpec& spec : tensor_specs(config)) {
        if (!params.contains(spec.name)) {
            throw ConfigError("parameter store is missing tensor \"" + spec.name + "\"");
        }
        const bool rg = with_grad && (frozen == nullptr || frozen->count(spec.name) == 0);
        const NodeId id = graph_->leaf(params.at(spec.name), rg);
        leaves_.emplace_back(spec.name, id);
        by_name_.emplace(spec.name, id);
    }
}

NodeId BoundModel::param(const std::string& name) const {
    auto it = by_name_.find(name);
    if (it == by_name_.end()) {
        throw ConfigError("unknown parameter name: " + name);
    }
    return it->second;
}

NodeId BoundModel::adapt(NodeId features) const {
    Graph& g = *graph_;
    // Rows hold feature vectors, so weight.v becomes v . W^T per row.
    const NodeId wt = g.transpose(param("adapter.weight"));
    return g.add_row(g.matmul(features, wt), param("adapter.bias"));
}

std::pair<NodeId, NodeId> BoundModel::encode(NodeId h_q, NodeId h_p) const {
    Graph& g = *graph_;
    const ModelConfig& c = *config_;
    const std::size_t n = g.value(h_p).rows();
    if (g.value(h_p).size() == 0 || n == 0) {
        throw PreconditionError("list_encode: empty passage list");
    }
    const std::size_t dh = c.d / c.heads;
    const Mask mask = build_mask(c.attention_variant, n);

    const NodeId q_row = g.add_row(h_q, param("e_q"));
    const NodeId p_rows = g.add_row(h_p, param("e_p"));
    const std::array<NodeId, 2> z0_parts = {q_row, p_rows};
    NodeId z = g.concat_rows(z0_parts);

    for (std::size_t l = 0; l < c.layers; ++l) {
        const std::string p = "layer" + std::to_string(l) + ".";
        const NodeId q = g.matmul(z, param(p + "attn.w_q"));
        const NodeId k = g.matmul(z, param(p + "attn.w_k"));
        const NodeId v = g.matmul(z, param(p + "attn.w_v"));

        std::vector<NodeId> heads;
        heads.reserve(c.heads);
        for (std::size_t h = 0; h < c.heads; ++h) {
            const std::size_t c0 = h * dh, c1 = (h + 1) * dh;
            const NodeId qh = g.slice_cols(q, c0, c1);
            const NodeId kh = g.slice_cols(k, c0, c1);
            const NodeId vh = g.slice_cols(v, c0, c1);
            const NodeId logits =
                g.scale(g.matmul(qh, g.transpose(kh)), 1.0 / std::sqrt(static_cast<double>(dh)));
            const NodeId attn = g.masked_softmax(logits, mask);
            heads.push_back(g.matmul(attn, vh));
        }
        const NodeId mixed = g.matmul(g.concat_cols(heads), param(p + "attn.w_o"));
        z = g.layer_norm(g.add(z, mixed), param(p + "ln1.gain"), param(p + "ln1.bias"));

        const NodeId hidden = g.tanh(g.add_row(g.matmul(z, param(p + "ffn.w1")), param(p + "ffn.b1")));
        const NodeId ffn = g.add_row(g.matmul(hidden, param(p + "ffn.w2")), param(p + "ffn.b2"));
        z = g.layer_norm(g.add(z, ffn), param(p + "ln2.gain"), param(p + "ln2.bias"));
    }

    const NodeId z_q = g.slice_rows(z, 0, 1);
    const NodeId z_p = g.slice_rows(z, 1, n + 1);
    return {z_q, z_p};
}

NodeId BoundModel::pair_mlp(const std::string& prefix, NodeId q_row, NodeId rows) const {
    Graph& g = *graph_;
    const std::size_t n = g.value(rows).rows();
    const std::array<NodeId, 2> joined = {g.broadcast_row(q_row, n), rows};
    const NodeId x = g.concat_cols(joined);
    const NodeId hidden =
        g.tanh(g.add_row(g.matmul(x, param(prefix + ".w1")), param(prefix + ".b1")));
    return g.add_row(g.matmul(hidden, param(prefix + ".w2")), param(prefix + ".b2"));
}

BoundModel::Scores BoundModel::score(NodeId h_q, NodeId h_p) const {
    Graph& g = *graph_;
    const std::size_t n = g.value(h_p).rows();
    Scores out{};
    switch (config_->feature_mode) {
    case FeatureMode::ORIGINAL_ONLY: {
        out.origin = pair_mlp("mlp_ori", h_q, h_p);
        out.list = g.constant(Tensor::zeros({n, 1}));
        out.final_ = g.sigmoid(out.origin);
        break;
    }
    case FeatureMode::LISTWISE_ONLY: {
        const auto [z_q, z_p] = encode(h_q, h_p);
        out.origin = g.constant(Tensor::zeros({n, 1}));
        out.list = pair_mlp("mlp_list", z_q, z_p);
        out.final_ = g.sigmoid(out.list);
        break;
    }
    case FeatureMode::FUSED: {
        out.origin = pair_mlp("mlp_ori", h_q, h_p);
        const auto [z_q, z_p] = encode(h_q, h_p);
        out.list = pair_mlp("mlp_list", z_q, z_p);
        const std::array<NodeId, 2> pair = {out.origin, out.list};
        const NodeId x = g.concat_cols(pair);
        const NodeId hidden =
            g.tanh(g.add_row(g.matmul(x, param("mlp_fused.w1")), param("mlp_fused.b1")));
        const NodeId fused =
            g.add_row(g.matmul(hidden, param("mlp_fused.w2")), param("mlp_fused.b2"));
        out.final_ = g.sigmoid(fused);
        break;
    }
    }
    return out;
}

Tensor stack_rows(const std::vector<Tensor>& rows) {
    if (rows.empty()) {
        throw PreconditionError("stack_rows: empty input");
    }
    const std::size_t d = rows[0].size();
    Tensor out({rows.size(), d});
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != d) {
            throw ShapeError("stack_rows: row " + std::to_string(i) + " has length " +
                             std::to_string(rows[i].size()) + ", expected " + std::to_string(d));
        }
        for (std::size_t j = 0; j < d; ++j) {
            out.at(i, j) = rows[i].at(j);
        }
    }
    return out;
}

namespace {

Tensor as_row(const Tensor& v, std::size_t d, const char* what) {
    if (v.size() != d) {
        throw ShapeError(std::string(what) + " has length " + std::to_string(v.size()) +
                         ", model dimension is " + std::to_string(d));
    }
    return Tensor({1, d}, std::vector<double>(v.data().begin(), v.data().end()));
}

} // namespace

std::pair<Tensor, std::vector<Tensor>> list_encode(const ModelConfig& config,
                                                   const ParamStore& params, const Tensor& h_q,
                                                   const std::vector<Tensor>& h_list) {
    if (h_list.empty()) {
        throw PreconditionError("list_encode: empty passage list");
    }
    Graph g;
    BoundModel model(g, config, params);
    const NodeId q = g.constant(as_row(h_q, config.d, "query feature"));
    const NodeId p = g.constant(stack_rows(h_list));
    const auto [z_q, z_p] = model.encode(q, p);
    const Tensor& zq = g.value(z_q);
    const Tensor& zp = g.value(z_p);
    Tensor zq_vec({config.d}, std::vector<double>(zq.data().begin(), zq.data().end()));
    std::vector<Tensor> zs;
    zs.reserve(h_list.size());
    for (std::size_t i = 0; i < h_list.size(); ++i) {
        std::vector<double> row(zp.data().begin() + i * config.d,
                                zp.data().begin() + (i + 1) * config.d);
        zs.emplace_back(std::vector<std::size_t>{config.d}, std::move(row));
    }
    return {std::move(zq_vec), std::move(zs)};
}

std::vector<ScoreBreakdown> score(const ModelConfig& config, const ParamStore& params,
                                  const Tensor& h_q, const std::vector<Tensor>& h_list) {
    if (h_list.empty()) {
        throw PreconditionError("score: empty passage list");
    }
    Graph g;
    BoundModel model(g, config, params);
    const NodeId q = g.constant(as_row(h_q, config.d, "query feature"));
    const NodeId p = g.constant(stack_rows(h_list));
    const BoundModel::Scores nodes = model.score(q, p);
    const Tensor& so = g.value(nodes.origin);
    const Tensor& sl = g.value(nodes.list);
    const Tensor& sf = g.value(nodes.final_);
    std::vector<ScoreBreakdown> out(h_list.size());
    for (std::size_t i = 0; i < h_list.size(); ++i) {
        out[i] = ScoreBreakdown{so.at(i, 0), sl.at(i, 0), sf.at(i, 0)};
    }
    return out;
}

// --- checkpoint -------------------------------------------------------------

namespace detail {

nlohmann::json model_config_to_json(const ModelConfig& c) {
    return nlohmann::json{
        {"d", c.d},
        {"layers", c.layers},
        {"heads", c.heads},
        {"ffn_dim", c.ffn_dim},
        {"attention_variant", to_string(c.attention_variant)},
        {"feature_mode", to_string(c.feature_mode)},
        {"seed", c.seed},
    };
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
    ModelConfig c;
    try {
        c.d = j.at("d").get<std::size_t>();
        c.layers = j.at("layers").get<std::size_t>();
        c.heads = j.at("heads").get<std::size_t>();
        c.ffn_dim = j.at("ffn_dim").get<std::size_t>();
        c.attention_variant = attention_variant_from_string(j.at("attention_variant"));
        c.feature_mode = feature_mode_from_string(j.at("feature_mode"));
        c.seed = j.at("seed").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad model config: ") + e.what());
    }
    c.validate();
    return c;
}

} // namespace detail

namespace {
using detail::model_config_from_json;
using detail::model_config_to_json;
} // namespace

void save_checkpoint(const std::filesystem::path& path, const ModelConfig& config,
                     const ParamStore& params) {
    nlohmann::json tensors = nlohmann::json::object();
    for (std::size_t i = 0; i < params.size(); ++i) {
        const Tensor& t = params.tensor(i);
        tensors[params.name(i)] = {
            {"shape", t.shape()},
            {"data", std::vector<double>(t.data().begin(), t.data().end())},
        };
    }
    const nlohmann::json doc = {
        {"format_version", 1},
        {"config", model_config_to_json(config)},
        {"tensors", tensors},
    };
    std::ofstream os(path);
    if (!os) {
        throw ConfigError("cannot open checkpoint for writing: " + path.string());
    }
    os << doc.dump();
    os << "\n";
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open checkpoint: " + path.string());
    }
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("checkpoint " + path.string() + ": " + e.what());
    }
    if (!doc.contains("format_version") || !doc["format_version"].is_number_integer()) {
        throw ConfigError("checkpoint " + path.string() + ": missing format_version");
    }
    const int version = doc["format_version"].get<int>();
    if (version != 1) {
        throw ConfigError("checkpoint " + path.string() + ": unsupported format_version " +
                          std::to_string(version));
    }
    Checkpoint ckpt;
    ckpt.config = model_config_from_json(doc.at("config"));

    const auto specs = tensor_specs(ckpt.config);
    if (!doc.contains("tensors") || !doc["tensors"].is_object()) {
        throw ConfigError("checkpoint " + path.string() + ": missing tensors object");
    }
    const nlohmann::json& tensors = doc["tensors"];
    for (const auto& spec : specs) {
        if (!tensors.contains(spec.name)) {
            throw ConfigError("checkpoint " + path.string() + ": missing tensor \"" +
                              spec.name + "\"");
        }
        const nlohmann::json& entry = tensors.at(spec.name);
        std::vector<std::size_t> shape;
        std::vector<double> data;
        try {
            shape = entry.at("shape").get<std::vector<std::size_t>>();
            data = entry.at("data").get<std::vector<double>>();
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("checkpoint " + path.string() + ": tensor \"" + spec.name +
                              "\": " + e.what());
        }
        if (shape != spec.shape) {
            throw ConfigError("checkpoint " + path.string() + ": tensor \"" + spec.name +
                              "\" has wrong shape for the declared config");
        }
        Tensor t(shape, std::move(data));
        t.require_finite("checkpoint tensor " + spec.name);
        ckpt.params.add(spec.name, std::move(t));
    }
    if (tensors.size() != specs.size()) {
        for (auto it = tensors.begin(); it != tensors.end(); ++it) {
            bool known = false;
            for (const auto& spec : specs) {
                if (spec.name == it.key()) {
                    known = true;
                    break;
                }
            }
            if (!known) {
                throw ConfigError("checkpoint " + path.string() + ": unknown tensor \"" +
                                  it.key() + "\"");
            }
        }
    }
    return ckpt;
}

std::string config_hash(const ModelConfig& config) {
    const std::string canon = model_config_to_json(config).dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : canon) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

} // namespace listrank
