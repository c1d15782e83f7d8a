#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "listrank/tensor.hpp"

namespace listrank {

struct EmbeddingVector {
    Tensor values;         // rank-1, length d
    std::string source_id; // provider or record identifier
};

/// Text-to-vector provider. Implementations are read-only after construction
/// and safe to call from any number of threads.
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual EmbeddingVector embed(const std::string& text) const = 0;
    virtual std::size_t dim() const = 0;
};

/// Deterministic feature hashing of character 3-grams into d signed buckets,
/// L2-normalized. Byte-level trigrams with boundary sentinels, so it needs no
/// tokenizer and treats any UTF-8 text uniformly. Empty text maps to the zero
/// vector.
class HashEmbedder final : public EmbeddingProvider {
public:
    explicit HashEmbedder(std::size_t dim); // dim >= 8

    EmbeddingVector embed(const std::string& text) const override;
    std::size_t dim() const override { return dim_; }

private:
    std::size_t dim_;
};

/// Precomputed id-keyed vectors loaded from a JSON Lines file; one object per
/// line: {"id": string, "vector": [numbers]}. Duplicate ids and ragged
/// dimensions are rejected; parse failures carry the line number.
std::map<std::string, EmbeddingVector> load_embedding_file(const std::filesystem::path& path);

/// Inverse of load_embedding_file; values round-trip bit-exactly.
void write_embedding_file(const std::filesystem::path& path,
                          const std::map<std::string, EmbeddingVector>& vectors);

/// Provider over a loaded embedding file. The text argument is the record id.
class FileEmbedder final : public EmbeddingProvider {
public:
    explicit FileEmbedder(std::map<std::string, EmbeddingVector> vectors);

    EmbeddingVector embed(const std::string& id) const override;
    std::size_t dim() const override { return dim_; }

private:
    std::map<std::string, EmbeddingVector> vectors_;
    std::size_t dim_ = 0;
};

/// Trainable affine map sitting between the embedding provider and the model.
/// Starts as the identity so an untrained adapter is a no-op; stage-one
/// training keeps it frozen, stage two lets it move.
struct AdapterParams {
    Tensor weight; // d x d
    Tensor bias;   // d
    bool trainable = false;

    static AdapterParams identity(std::size_t d);
};

/// y[i] = sum_j weight[i][j] * v[j] + bias[i]
Tensor apply_adapter(const EmbeddingVector& v, const AdapterParams& a);

} // namespace listrank
