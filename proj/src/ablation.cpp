#include "listrank/ablation.hpp"

#include <chrono>

#include "listrank/error.hpp"

namespace listrank {

namespace {

TrainConfig apply_axis(TrainConfig cfg, const std::string& axis, const std::string& value) {
    if (axis == "attention_variant") {
        cfg.model.attention_variant = attention_variant_from_string(value);
    } else if (axis == "feature_mode") {
        cfg.model.feature_mode = feature_mode_from_string(value);
    } else if (axis == "loss") {
        cfg.settings.loss = loss_kind_from_string(value);
    } else if (axis == "layers") {
        std::size_t layers = 0;
        try {
            layers = static_cast<std::size_t>(std::stoul(value));
        } catch (const std::exception&) {
            throw ConfigError("ablation: bad layer count \"" + value + "\"");
        }
        if (layers == 0) {
            throw ConfigError("ablation: layer count must be positive");
        }
        cfg.model.layers = layers;
    } else {
        throw ConfigError("ablation: unknown axis \"" + axis +
                          "\" (expected attention_variant | feature_mode | loss | layers)");
    }
    return cfg;
}

} // namespace

EvalReport ablation_run(const TrainConfig& base, const AblationSpec& spec,
                        const RankingDataset& train_data, const RankingDataset& eval_data,
                        const IterConfig& iter) {
    base.validate();
    if (spec.axes.empty()) {
        throw ConfigError("ablation: no axes given");
    }
    for (const auto& [axis, values] : spec.axes) {
        if (values.empty()) {
            throw ConfigError("ablation: axis \"" + axis + "\" has no values");
        }
    }

    // Cartesian product in axis-name order.
    std::vector<std::map<std::string, std::string>> cells = {{}};
    for (const auto& [axis, values] : spec.axes) {
        std::vector<std::map<std::string, std::string>> next;
        for (const auto& cell : cells) {
            for (const std::string& value : values) {
                auto extended = cell;
                extended[axis] = value;
                next.push_back(std::move(extended));
            }
        }
        cells = std::move(next);
    }

    const auto t0 = std::chrono::steady_clock::now();
    EvalReport report;
    report.mode = "ablation";
    for (const auto& cell : cells) {
        TrainConfig cfg = base;
        for (const auto& [axis, value] : cell) {
            cfg = apply_axis(std::move(cfg), axis, value);
        }
        const auto cell_start = std::chrono::steady_clock::now();
        ParamStore params = init_params(cfg.model);
        std::vector<RankingDataset> stage_data(cfg.stages.size(), train_data);
        run_training(cfg, params, stage_data);

        Engine engine(cfg.model, std::move(params), "ablation");
        AblationRow row;
        row.cell = cell;
        row.map_direct = evaluate(engine, eval_data, iter, RankMode::DIRECT).map;
        if (cfg.model.feature_mode == FeatureMode::ORIGINAL_ONLY) {
            row.note = "iterative inference not applicable (per-passage scores are independent)";
        } else {
            row.map_iterative = evaluate(engine, eval_data, iter, RankMode::ITERATIVE).map;
        }
        row.runtime_sec =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - cell_start).count();
        report.rows.push_back(std::move(row));
    }
    report.runtime_sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

} // namespace listrank
