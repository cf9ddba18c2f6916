#pragma once

#include "kgalign/kg.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace kgalign {

using EmbeddingVector = std::vector<float>;

struct EntityEmbedding {
    std::uint64_t entity = 0;
    EmbeddingVector name_vec;
    EmbeddingVector rel_vec;
    EmbeddingVector attr_vec;
    EmbeddingVector fused;  // name || rel || attr

    bool operator==(const EntityEmbedding&) const = default;
};

enum class SimilarityMetric { Cosine, Csls };

struct SimilarityConfig {
    SimilarityMetric metric = SimilarityMetric::Csls;
    int csls_k = 10;
    bool normalize = true;  // min-max normalize score rows into [0,1]
};

// Immutable per-side vector store. Rows are ordered by ascending entity id so
// every downstream matrix is deterministic.
class EmbeddingStore {
public:
    EmbeddingStore() = default;
    EmbeddingStore(Side side, std::size_t dim_name, std::size_t dim_rel, std::size_t dim_attr);

    void add(std::uint64_t entity, EmbeddingVector name, EmbeddingVector rel,
             EmbeddingVector attr);
    void finalize();  // sorts rows by id; call once after the last add

    Side side() const { return side_; }
    std::size_t size() const { return rows_.size(); }
    std::size_t dim_name() const { return dim_name_; }
    std::size_t dim_rel() const { return dim_rel_; }
    std::size_t dim_attr() const { return dim_attr_; }
    std::size_t fused_dim() const { return dim_name_ + dim_rel_ + dim_attr_; }

    const std::vector<EntityEmbedding>& rows() const { return rows_; }
    const EntityEmbedding& row(std::size_t i) const { return rows_.at(i); }
    const EntityEmbedding* find(std::uint64_t entity) const;
    std::vector<EntityId> entity_ids() const;

    bool operator==(const EmbeddingStore&) const = default;

private:
    Side side_ = Side::Source;
    std::size_t dim_name_ = 0;
    std::size_t dim_rel_ = 0;
    std::size_t dim_attr_ = 0;
    std::vector<EntityEmbedding> rows_;
    std::map<std::uint64_t, std::size_t> index_;
};

// Dense row-major score matrix.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
    double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

// name || rel || attr concatenation. Rejects non-finite inputs.
EmbeddingVector fuse(const EmbeddingVector& name, const EmbeddingVector& rel,
                     const EmbeddingVector& attr);

double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

// CSLS(x,y) = 2 cos(x,y) - rT(x) - rS(y), where rT(x) is the mean cosine of x
// to its csls_k nearest targets and rS(y) the symmetric term over sources.
// Pure function of the stores; row-parallel evaluation gives identical output.
Matrix csls_matrix(const EmbeddingStore& sources, const EmbeddingStore& targets,
                   const SimilarityConfig& cfg, unsigned workers = 1);

Matrix cosine_matrix(const EmbeddingStore& sources, const EmbeddingStore& targets,
                     unsigned workers = 1);

// Descending by score, ties broken by ascending index.
std::vector<std::pair<std::size_t, double>> top_k(const std::vector<double>& scores_row,
                                                  std::size_t k);

// Per-row min-max rescale into [0,1]; a constant row maps to 0.5.
void minmax_normalize_rows(Matrix& m);

// Binary format: ASCII header line "COUNT DIM_NAME DIM_REL DIM_ATTR\n", then
// per entity an 8-byte little-endian id followed by little-endian f32 values.
EmbeddingStore load_embeddings_binary(const std::string& path, Side side);
void save_embeddings_binary(const EmbeddingStore& store, const std::string& path);

// JSONL alternative: {"id":..., "name":[...], "rel":[...], "attr":[...]}.
// Loads to a store bit-identical to the binary path after f32 rounding.
EmbeddingStore load_embeddings_jsonl(const std::string& path, Side side);
void save_embeddings_jsonl(const EmbeddingStore& store, const std::string& path);

} // namespace kgalign
