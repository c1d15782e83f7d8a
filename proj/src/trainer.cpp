#include "listrank/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <unordered_map>

#include <json.hpp>

#include "config_json.hpp"
#include "listrank/embedder.hpp"
#include "listrank/error.hpp"
#include "listrank/rng.hpp"

namespace listrank {

std::string to_string(LossKind k) {
    return k == LossKind::CIRCLE ? "circle" : "bce";
}

LossKind loss_kind_from_string(const std::string& s) {
    if (s == "circle") {
        return LossKind::CIRCLE;
    }
    if (s == "bce") {
        return LossKind::BCE;
    }
    throw ConfigError("unknown loss kind: \"" + s + "\" (expected circle | bce)");
}

void TrainConfig::validate() const {
    model.validate();
    if (settings.group_size < 2) {
        throw ConfigError("train config: group_size must be >= 2");
    }
    if (!(settings.gamma > 0.0)) {
        throw ConfigError("train config: gamma must be positive");
    }
    if (stages.empty()) {
        throw ConfigError("train config: at least one stage required");
    }
    for (const StageConfig& s : stages) {
        if (s.epochs == 0 || s.batch_size == 0) {
            throw ConfigError("train config: stage epochs and batch_size must be positive");
        }
        if (!(s.learning_rate > 0.0)) {
            throw ConfigError("train config: learning rate must be positive");
        }
    }
}

BatchPlan make_batches(const RankingDataset& data, std::size_t group_size,
                       std::size_t batch_size, std::uint64_t seed) {
    if (data.records.empty()) {
        throw PreconditionError("make_batches: empty dataset");
    }
    if (group_size < 2) {
        throw PreconditionError("make_batches: group_size must be >= 2");
    }
    if (batch_size == 0) {
        throw PreconditionError("make_batches: batch_size must be positive");
    }
    Rng rng(seed);
    std::vector<QueryGroup> groups;
    BatchPlan plan;
    for (const QueryRecord& q : data.records) {
        std::vector<std::size_t> pos, neg;
        for (std::size_t i = 0; i < q.passages.size(); ++i) {
            (q.passages[i].label == 1 ? pos : neg).push_back(i);
        }
        if (q.passages.empty()) {
            ++plan.skipped_queries;
            continue;
        }
        QueryGroup group;
        group.query_id = q.query_id;
        group.query = q.query;
        const std::size_t keep_pos = std::min(pos.size(), group_size - 1);
        std::vector<std::size_t> chosen_pos =
            keep_pos == pos.size() ? pos : [&] {
                std::vector<std::size_t> picked;
                for (std::size_t k : rng.sample_without_replacement(pos.size(), keep_pos)) {
                    picked.push_back(pos[k]);
                }
                return picked;
            }();
        for (std::size_t i : chosen_pos) {
            group.passages.push_back(q.passages[i]);
        }
        const std::size_t fill = std::min(neg.size(), group_size - chosen_pos.size());
        for (std::size_t k : rng.sample_without_replacement(neg.size(), fill)) {
            group.passages.push_back(q.passages[neg[k]]);
        }
        groups.push_back(std::move(group));
    }
    rng.shuffle(groups);
    for (std::size_t i = 0; i < groups.size(); i += batch_size) {
        Batch batch;
        for (std::size_t j = i; j < std::min(i + batch_size, groups.size()); ++j) {
            batch.push_back(std::move(groups[j]));
        }
        plan.batches.push_back(std::move(batch));
    }
    return plan;
}

namespace {

struct AdamState {
    std::vector<Tensor> m;
    std::vector<Tensor> v;
    std::size_t t = 0;

    explicit AdamState(const ParamStore& params) {
        for (std::size_t i = 0; i < params.size(); ++i) {
            m.push_back(Tensor::zeros(params.tensor(i).shape()));
            v.push_back(Tensor::zeros(params.tensor(i).shape()));
        }
    }
};

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

std::uint64_t mix_seed(std::uint64_t seed, std::size_t stage, std::size_t epoch) {
    return seed + 1000003ull * (stage + 1) + 101ull * epoch;
}

Tensor as_row_matrix(const Tensor& v) {
    return Tensor({1, v.size()}, std::vector<double>(v.data().begin(), v.data().end()));
}

} // namespace

StageResult train_stage(const ModelConfig& model_cfg, ParamStore& params,
                        const RankingDataset& data, const StageConfig& stage,
                        const TrainSettings& settings, std::size_t stage_index) {
    for (const std::string& name : stage.freeze) {
        params.at(name); // throws ConfigError when the name is unknown
    }
    const HashEmbedder embedder(model_cfg.d);
    std::unordered_map<std::string, Tensor> cache;
    auto raw_feature = [&](const std::string& text) -> const Tensor& {
        auto it = cache.find(text);
        if (it == cache.end()) {
            it = cache.emplace(text, embedder.embed(text).values).first;
        }
        return it->second;
    };

    StageResult out;
    AdamState adam(params);
    const CircleLossConfig circle_cfg{stage.m, settings.gamma};

    auto write_checkpoint = [&] {
        if (!settings.checkpoint_path.empty()) {
            save_checkpoint(settings.checkpoint_path, model_cfg, params);
        }
    };

    std::size_t step = 0;
    for (std::size_t epoch = 0; epoch < stage.epochs; ++epoch) {
        BatchPlan plan = make_batches(data, settings.group_size, stage.batch_size,
                                      mix_seed(settings.seed, stage_index, epoch));
        out.skipped_queries += plan.skipped_queries;
        for (const Batch& batch : plan.batches) {
            const auto t0 = std::chrono::steady_clock::now();
            Graph g;
            double loss_value = 0.0;
            double grad_norm = 0.0;
            std::vector<std::pair<std::string, NodeId>> leaves;
            try {
                BoundModel bound(g, model_cfg, params, true, &stage.freeze);
                leaves = bound.leaves();
                std::vector<NodeId> losses;
                for (const QueryGroup& group : batch) {
                    std::vector<int> labels;
                    std::vector<Tensor> features;
                    for (const PassageRecord& p : group.passages) {
                        labels.push_back(p.label);
                        features.push_back(raw_feature(p.text));
                    }
                    const std::size_t positives =
                        static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
                    const bool usable = settings.loss == LossKind::CIRCLE
                                            ? positives > 0 && positives < labels.size()
                                            : !labels.empty();
                    if (!usable) {
                        ++out.skipped_groups;
                        continue;
                    }
                    const NodeId q_node = g.constant(as_row_matrix(raw_feature(group.query)));
                    const NodeId p_node = g.constant(stack_rows(features));
                    const BoundModel::Scores scores =
                        bound.score(bound.adapt(q_node), bound.adapt(p_node));
                    losses.push_back(settings.loss == LossKind::CIRCLE
                                         ? circle_loss_node(g, scores.final_, labels, circle_cfg)
                                         : bce_loss_node(g, scores.final_, labels));
                }
                if (losses.empty()) {
                    continue;
                }
                const NodeId batch_loss =
                    losses.size() == 1 ? losses[0] : g.mean_all(g.concat_rows(losses));
                loss_value = g.value(batch_loss).at(0);
                g.backward(batch_loss);
                double norm2 = 0.0;
                for (const auto& [name, node] : leaves) {
                    if (stage.freeze.count(name) != 0) {
                        continue;
                    }
                    const Tensor& grad = g.grad(node);
                    for (std::size_t i = 0; i < grad.size(); ++i) {
                        norm2 += grad.at(i) * grad.at(i);
                    }
                }
                grad_norm = std::sqrt(norm2);
            } catch (const DomainError& e) {
                write_checkpoint();
                throw TrainingAborted("stage " + std::to_string(stage_index) + " step " +
                                      std::to_string(step + 1) +
                                      ": non-finite value in forward/backward pass: " + e.what());
            }
            if (!std::isfinite(loss_value) || !std::isfinite(grad_norm)) {
                write_checkpoint();
                throw TrainingAborted("stage " + std::to_string(stage_index) + " step " +
                                      std::to_string(step + 1) + ": non-finite loss (" +
                                      std::to_string(loss_value) + ") or gradient norm");
            }

            // Adam with bias correction; frozen tensors are skipped entirely.
            ++adam.t;
            const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(adam.t));
            const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(adam.t));
            Graph& gref = g;
            for (std::size_t li = 0; li < leaves.size(); ++li) {
                const auto& [name, node] = leaves[li];
                if (stage.freeze.count(name) != 0) {
                    continue;
                }
                const Tensor& grad = gref.grad(node);
                Tensor& p = params.at(name);
                Tensor& m = adam.m[li];
                Tensor& v = adam.v[li];
                for (std::size_t i = 0; i < p.size(); ++i) {
                    const double gi = grad.at(i);
                    m.at(i) = kBeta1 * m.at(i) + (1.0 - kBeta1) * gi;
                    v.at(i) = kBeta2 * v.at(i) + (1.0 - kBeta2) * gi * gi;
                    const double mhat = m.at(i) / bc1;
                    const double vhat = v.at(i) / bc2;
                    p.at(i) -= stage.learning_rate * mhat / (std::sqrt(vhat) + kAdamEps);
                }
            }

            ++step;
            const double wall_ms =
                std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                    .count();
            out.records.push_back(TrainRecord{step, stage_index, loss_value, grad_norm, wall_ms});
            if (settings.checkpoint_every != 0 && step % settings.checkpoint_every == 0) {
                write_checkpoint();
            }
        }
    }
    write_checkpoint();
    return out;
}

TrainResult run_training(const TrainConfig& cfg, ParamStore& params,
                         const std::vector<RankingDataset>& stage_data) {
    cfg.validate();
    if (stage_data.size() != cfg.stages.size()) {
        throw ConfigError("run_training: " + std::to_string(stage_data.size()) +
                          " datasets for " + std::to_string(cfg.stages.size()) + " stages");
    }
    TrainResult result;
    for (std::size_t si = 0; si < cfg.stages.size(); ++si) {
        StageResult res =
            train_stage(cfg.model, params, stage_data[si], cfg.stages[si], cfg.settings, si);
        result.skipped_queries += res.skipped_queries;
        result.skipped_groups += res.skipped_groups;
        for (TrainRecord& r : res.records) {
            result.records.push_back(r);
        }
    }
    return result;
}

TrainConfig load_train_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open train config: " + path.string());
    }
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("train config " + path.string() + ": " + e.what());
    }
    TrainConfig cfg;
    try {
        cfg.model = detail::model_config_from_json(doc.at("model"));
        const nlohmann::json train = doc.value("train", nlohmann::json::object());
        cfg.settings.seed = train.value("seed", cfg.settings.seed);
        cfg.settings.group_size = train.value("group_size", cfg.settings.group_size);
        cfg.settings.gamma = train.value("gamma", cfg.settings.gamma);
        cfg.settings.loss =
            loss_kind_from_string(train.value("loss", std::string("circle")));
        cfg.settings.checkpoint_every =
            train.value("checkpoint_every", cfg.settings.checkpoint_every);
        cfg.settings.checkpoint_path =
            train.value("checkpoint_path", cfg.settings.checkpoint_path);

        if (!doc.contains("stages") || !doc["stages"].is_array() || doc["stages"].empty()) {
            throw ConfigError("train config: \"stages\" must be a non-empty array");
        }
        std::size_t index = 0;
        for (const auto& s : doc["stages"]) {
            StageConfig stage;
            stage.epochs = s.value("epochs", stage.epochs);
            stage.batch_size = s.value("batch_size", stage.batch_size);
            stage.m = s.value("m", index == 0 ? -0.2 : 0.1);
            stage.learning_rate = s.value("learning_rate", stage.learning_rate);
            if (s.contains("freeze")) {
                for (const auto& name : s.at("freeze")) {
                    stage.freeze.insert(name.get<std::string>());
                }
            } else if (index == 0) {
                stage.freeze = {"adapter.weight", "adapter.bias"};
            }
            stage.data_path = s.value("data", std::string());
            if (stage.data_path.empty()) {
                throw ConfigError("train config: stage " + std::to_string(index) +
                                  " is missing \"data\"");
            }
            cfg.stages.push_back(std::move(stage));
            ++index;
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("train config " + path.string() + ": " + e.what());
    }
    cfg.validate();
    return cfg;
}

} // namespace listrank
