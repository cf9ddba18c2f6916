#pragma once

#include "kgalign/embedding.hpp"
#include "kgalign/kg.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace kgalign {

// Seeded generator for desk-scale runs. Aligned pairs get near-identical
// fused vectors; name-collision groups get deliberately confusable ones so a
// tunable share of entities lands in the uncertain set.
struct SyntheticConfig {
    std::uint64_t seed = 1;
    std::size_t entities = 200;
    double name_collision_rate = 0.3;
    std::size_t collision_group_size = 4;
    double attribute_noise = 0.1;
    double seed_fraction = 0.3;  // share of pairs emitted as training seeds
    std::size_t avg_degree = 3;
    std::size_t dim_name = 16;
    std::size_t dim_rel = 8;
    std::size_t dim_attr = 8;
    double pair_noise = 0.06;       // jitter between aligned source/target vectors
    double collision_jitter = 0.06; // jitter within a collision group
};

struct SyntheticDataset {
    KnowledgeGraph source;
    KnowledgeGraph target;
    EmbeddingStore source_emb;
    EmbeddingStore target_emb;
    SeedPairs seeds;
    std::vector<std::pair<std::uint64_t, std::uint64_t>> test_pairs;
    std::map<std::uint64_t, std::uint64_t> truth;  // seeds plus test pairs
};

SyntheticDataset generate_synthetic(const SyntheticConfig& cfg);

// Writes DBP15K-style TSVs plus binary embeddings into `dir`:
// ent_ids_1/2, triples_1/2, attrs_1/2, sup_pairs, ref_pairs, emb_1.bin,
// emb_2.bin and a dataset_meta.json describing the files.
void write_synthetic_dataset(const SyntheticDataset& ds, const std::string& dir);

} // namespace kgalign
