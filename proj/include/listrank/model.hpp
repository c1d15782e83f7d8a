#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "listrank/graph.hpp"
#include "listrank/params.hpp"
#include "listrank/tensor.hpp"

namespace listrank {

/// Attention masking over the [query, passages] sequence. LIST isolates the
/// query row (it attends only to itself) while passages attend everywhere;
/// BIDIRECTIONAL is a plain encoder; PASSAGE lets the query see everything but
/// restricts each passage to itself and the query.
enum class AttentionVariant { LIST, BIDIRECTIONAL, PASSAGE };

/// Which similarity signals feed the final score. FUSED combines the raw
/// pairwise score with the list-encoded score; the other two are ablations.
enum class FeatureMode { FUSED, LISTWISE_ONLY, ORIGINAL_ONLY };

std::string to_string(AttentionVariant v);
std::string to_string(FeatureMode m);
AttentionVariant attention_variant_from_string(const std::string& s);
FeatureMode feature_mode_from_string(const std::string& s);

struct ModelConfig {
    std::size_t d = 48;
    std::size_t layers = 2;
    std::size_t heads = 4;
    std::size_t ffn_dim = 96;
    AttentionVariant attention_variant = AttentionVariant::LIST;
    FeatureMode feature_mode = FeatureMode::FUSED;
    std::uint64_t seed = 1;

    void validate() const;
};

struct ScoreBreakdown {
    double s_origin = 0.0;
    double s_list = 0.0;
    double s_final = 0.0; // strictly in (0, 1)
};

/// (N+1) x (N+1) boolean mask; position 0 is the query.
Mask build_mask(AttentionVariant variant, std::size_t n_passages);

/// Fresh parameter store for a config: deterministic in the seed, weights
/// uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)], layer-norm gains 1 / biases 0,
/// embedding adapter at identity.
ParamStore init_params(const ModelConfig& config);

/// Total scalar count implied by a config.
std::size_t param_scalar_count(const ModelConfig& config);

/// Binds a parameter store into a graph and exposes the forward pieces. One
/// instance per Graph; all methods append nodes to that graph.
class BoundModel {
public:
    struct Scores {
        NodeId origin; // [N x 1]
        NodeId list;   // [N x 1]
        NodeId final_; // [N x 1], sigmoid output
    };

    BoundModel(Graph& graph, const ModelConfig& config, const ParamStore& params,
               bool with_grad = false, const std::set<std::string>* frozen = nullptr);

    NodeId param(const std::string& name) const;
    const std::vector<std::pair<std::string, NodeId>>& leaves() const { return leaves_; }

    /// Embedding adapter applied to each row of a [r x d] feature matrix.
    NodeId adapt(NodeId features) const;

    /// List encoding of a [1 x d] query row and an [N x d] passage block.
    /// Returns (z_q [1 x d], z_p [N x d]).
    std::pair<NodeId, NodeId> encode(NodeId h_q, NodeId h_p) const;

    /// Full scoring head over adapter-level features, honoring feature_mode.
    Scores score(NodeId h_q, NodeId h_p) const;

private:
    NodeId pair_mlp(const std::string& prefix, NodeId q_row, NodeId rows) const;

    Graph* graph_;
    const ModelConfig* config_;
    std::vector<std::pair<std::string, NodeId>> leaves_;
    std::unordered_map<std::string, NodeId> by_name_;
};

/// Value-level list encoding (Z rows split back into query and passages).
std::pair<Tensor, std::vector<Tensor>> list_encode(const ModelConfig& config,
                                                   const ParamStore& params, const Tensor& h_q,
                                                   const std::vector<Tensor>& h_list);

/// Value-level scoring; one breakdown per passage, input order preserved.
std::vector<ScoreBreakdown> score(const ModelConfig& config, const ParamStore& params,
                                  const Tensor& h_q, const std::vector<Tensor>& h_list);

/// Stacks rank-1 vectors of equal length into an [N x d] matrix.
Tensor stack_rows(const std::vector<Tensor>& rows);

// --- checkpoint file ------------------------------------------------------
struct Checkpoint {
    ModelConfig config;
    ParamStore params;
};

void save_checkpoint(const std::filesystem::path& path, const ModelConfig& config,
                     const ParamStore& params);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Stable hex digest of the config, reported by the service health endpoint.
std::string config_hash(const ModelConfig& config);

} // namespace listrank
