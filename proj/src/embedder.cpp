#include "listrank/embedder.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>

#include <json.hpp>

#include "listrank/error.hpp"

namespace listrank {

namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ull;
constexpr std::uint64_t kFnvPrime = 1099511628211ull;

std::uint64_t fnv1a(const unsigned char* data, std::size_t n) {
    std::uint64_t h = kFnvOffset;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= data[i];
        h *= kFnvPrime;
    }
    return h;
}

} // namespace

HashEmbedder::HashEmbedder(std::size_t dim) : dim_(dim) {
    if (dim < 8) {
        throw PreconditionError("HashEmbedder: dimension must be >= 8, got " +
                                std::to_string(dim));
    }
}

EmbeddingVector HashEmbedder::embed(const std::string& text) const {
    Tensor v({dim_});
    if (!text.empty()) {
        // Two sentinel bytes on each side give every non-empty text at least
        // three trigrams, so only "" maps to the zero vector.
        std::string padded;
        padded.reserve(text.size() + 4);
        padded.push_back('\x02');
        padded.push_back('\x02');
        padded += text;
        padded.push_back('\x03');
        padded.push_back('\x03');
        const auto* bytes = reinterpret_cast<const unsigned char*>(padded.data());
        for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
            const std::uint64_t h = fnv1a(bytes + i, 3);
            const std::size_t bucket = static_cast<std::size_t>((h >> 1) % dim_);
            v.at(bucket) += (h & 1u) ? 1.0 : -1.0;
        }
        double norm2 = 0.0;
        for (std::size_t i = 0; i < dim_; ++i) {
            norm2 += v.at(i) * v.at(i);
        }
        if (norm2 > 0.0) {
            const double inv = 1.0 / std::sqrt(norm2);
            for (std::size_t i = 0; i < dim_; ++i) {
                v.at(i) *= inv;
            }
        }
    }
    return EmbeddingVector{std::move(v), "hash3"};
}

std::map<std::string, EmbeddingVector> load_embedding_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open embedding file: " + path.string());
    }
    std::map<std::string, EmbeddingVector> out;
    std::size_t dim = 0;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        nlohmann::json rec;
        try {
            rec = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
        if (!rec.is_object() || !rec.contains("id") || !rec.contains("vector") ||
            !rec["id"].is_string() || !rec["vector"].is_array()) {
            throw ParseError(path.string() + ":" + std::to_string(line_no) +
                             ": expected {\"id\": string, \"vector\": [numbers]}");
        }
        const std::string id = rec["id"].get<std::string>();
        std::vector<double> values;
        values.reserve(rec["vector"].size());
        for (const auto& x : rec["vector"]) {
            if (!x.is_number()) {
                throw ParseError(path.string() + ":" + std::to_string(line_no) +
                                 ": non-numeric vector entry");
            }
            values.push_back(x.get<double>());
        }
        if (values.empty()) {
            throw ParseError(path.string() + ":" + std::to_string(line_no) + ": empty vector");
        }
        if (dim == 0) {
            dim = values.size();
        } else if (values.size() != dim) {
            throw ParseError(path.string() + ":" + std::to_string(line_no) +
                             ": vector length " + std::to_string(values.size()) +
                             " differs from earlier records of length " + std::to_string(dim));
        }
        if (out.count(id) != 0) {
            throw ParseError(path.string() + ":" + std::to_string(line_no) +
                             ": duplicate id \"" + id + "\"");
        }
        Tensor t = Tensor::vector(std::move(values));
        t.require_finite("load_embedding_file " + id);
        out.emplace(id, EmbeddingVector{std::move(t), id});
    }
    return out;
}

void write_embedding_file(const std::filesystem::path& path,
                          const std::map<std::string, EmbeddingVector>& vectors) {
    std::ofstream os(path);
    if (!os) {
        throw ParseError("cannot open embedding file for writing: " + path.string());
    }
    for (const auto& [id, vec] : vectors) {
        nlohmann::json rec;
        rec["id"] = id;
        rec["vector"] = std::vector<double>(vec.values.data().begin(), vec.values.data().end());
        os << rec.dump() << "\n";
    }
}

FileEmbedder::FileEmbedder(std::map<std::string, EmbeddingVector> vectors)
    : vectors_(std::move(vectors)) {
    if (vectors_.empty()) {
        throw PreconditionError("FileEmbedder: no vectors");
    }
    dim_ = vectors_.begin()->second.values.size();
}

EmbeddingVector FileEmbedder::embed(const std::string& id) const {
    auto it = vectors_.find(id);
    if (it == vectors_.end()) {
        throw PreconditionError("FileEmbedder: no vector for id \"" + id + "\"");
    }
    return it->second;
}

AdapterParams AdapterParams::identity(std::size_t d) {
    return AdapterParams{Tensor::identity(d), Tensor::zeros({d}), false};
}

Tensor apply_adapter(const EmbeddingVector& v, const AdapterParams& a) {
    const std::size_t d = v.values.size();
    if (a.weight.rank() != 2 || a.weight.rows() != d || a.weight.cols() != d ||
        a.bias.size() != d) {
        throw ShapeError("apply_adapter: adapter " + a.weight.shape_string() + "/" +
                         a.bias.shape_string() + " does not match vector of length " +
                         std::to_string(d));
    }
    Tensor out({d});
    for (std::size_t i = 0; i < d; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            acc += a.weight.at(i, j) * v.values.at(j);
        }
        out.at(i) = acc + a.bias.at(i);
    }
    out.require_finite("apply_adapter");
    return out;
}

} // namespace listrank
