#pragma once

#include <map>
#include <string>
#include <vector>

#include "listrank/evalkit.hpp"
#include "listrank/trainer.hpp"

namespace listrank {

/// Axes over {attention_variant, feature_mode, loss, layers}; each axis lists
/// the values to sweep. The cartesian product of all axes is trained and
/// evaluated with a shared seed, one report row per cell.
struct AblationSpec {
    std::map<std::string, std::vector<std::string>> axes;
};

/// Trains every cell from the base config on train_data and evaluates on
/// eval_data, in both direct and iterative modes. Cells running on
/// original-only features report direct ranking only, with a note that
/// iterative inference is not applicable there.
EvalReport ablation_run(const TrainConfig& base, const AblationSpec& spec,
                        const RankingDataset& train_data, const RankingDataset& eval_data,
                        const IterConfig& iter);

} // namespace listrank
