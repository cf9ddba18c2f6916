#include "kgalign/synthetic.hpp"

#include "kgalign/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>

namespace kgalign {

namespace {

EmbeddingVector gaussian(std::mt19937_64& rng, std::size_t dim, double scale) {
    std::normal_distribution<double> dist(0.0, 1.0);
    EmbeddingVector v(dim);
    for (auto& x : v) {
        x = static_cast<float>(dist(rng) * scale);
    }
    return v;
}

EmbeddingVector jittered(const EmbeddingVector& base, std::mt19937_64& rng, double sigma) {
    std::normal_distribution<double> dist(0.0, sigma);
    EmbeddingVector v = base;
    for (auto& x : v) {
        x = static_cast<float>(x + dist(rng));
    }
    return v;
}

const char* const kAttributeKeys[] = {"founded", "located_in", "population",
                                      "category", "leader", "area"};
constexpr std::size_t kAttributeKeyCount = 6;
constexpr std::size_t kRelationLabelCount = 5;

} // namespace

SyntheticDataset generate_synthetic(const SyntheticConfig& cfg) {
    if (cfg.entities < 4) {
        throw_config("synthetic generator needs at least 4 entities");
    }
    std::mt19937_64 rng(cfg.seed);
    const std::size_t n = cfg.entities;

    // Target ids are a permutation of the source ids.
    std::vector<std::uint64_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);

    // Collision groups share a name and a nearby embedding base.
    std::size_t n_colliding = static_cast<std::size_t>(
        std::llround(cfg.name_collision_rate * static_cast<double>(n)));
    std::vector<std::int64_t> group_of(n, -1);
    std::size_t group_count = 0;
    {
        std::vector<std::uint64_t> shuffled(n);
        std::iota(shuffled.begin(), shuffled.end(), 0);
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        std::size_t assigned = 0;
        while (assigned + 2 <= n_colliding) {
            std::size_t remaining = n_colliding - assigned;
            std::size_t size = std::min(cfg.collision_group_size, remaining);
            if (size < 2) break;
            for (std::size_t k = 0; k < size; ++k) {
                group_of[shuffled[assigned + k]] = static_cast<std::int64_t>(group_count);
            }
            assigned += size;
            ++group_count;
        }
    }

    std::map<std::uint64_t, std::string> src_names;
    std::map<std::uint64_t, std::string> tgt_names;
    for (std::uint64_t i = 0; i < n; ++i) {
        std::string name = group_of[i] >= 0
                               ? "Shared Name " + std::to_string(group_of[i])
                               : "Entity " + std::to_string(i);
        src_names[i] = name;
        tgt_names[perm[i]] = name;
    }

    // Relation triples: random edges, mirrored onto the target side with a
    // little structural noise.
    std::uniform_int_distribution<std::uint64_t> pick_entity(0, n - 1);
    std::uniform_int_distribution<std::size_t> pick_rel(0, kRelationLabelCount - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<RelationTriple> src_rel;
    std::vector<RelationTriple> tgt_rel;
    for (std::uint64_t i = 0; i < n; ++i) {
        for (std::size_t d = 0; d < cfg.avg_degree; ++d) {
            std::uint64_t j = pick_entity(rng);
            if (j == i) j = (j + 1) % n;
            std::string rel = "rel_" + std::to_string(pick_rel(rng));
            src_rel.push_back({i, rel, j});
            if (unit(rng) >= cfg.attribute_noise) {
                tgt_rel.push_back({perm[i], rel, perm[j]});
            } else {
                std::uint64_t k = pick_entity(rng);
                if (k == i) k = (k + 1) % n;
                tgt_rel.push_back({perm[i], rel, perm[k]});
            }
        }
    }

    // Attributes: aligned entities share them, with noisy values on the
    // target side.
    std::uniform_int_distribution<std::size_t> pick_attr_count(2, 4);
    std::uniform_int_distribution<std::size_t> pick_attr_key(0, kAttributeKeyCount - 1);
    std::uniform_int_distribution<int> pick_value(0, 999);
    std::vector<AttributeTriple> src_attr;
    std::vector<AttributeTriple> tgt_attr;
    for (std::uint64_t i = 0; i < n; ++i) {
        std::size_t count = pick_attr_count(rng);
        for (std::size_t a = 0; a < count; ++a) {
            std::string key = kAttributeKeys[pick_attr_key(rng)];
            std::string value = "v" + std::to_string(pick_value(rng));
            src_attr.push_back({i, key, value});
            if (unit(rng) < cfg.attribute_noise) {
                value = "v" + std::to_string(pick_value(rng));
            }
            tgt_attr.push_back({perm[i], key, value});
        }
    }

    SyntheticDataset ds;
    ds.source = KnowledgeGraph(Side::Source, src_names, std::move(src_rel), std::move(src_attr));
    ds.target = KnowledgeGraph(Side::Target, tgt_names, std::move(tgt_rel), std::move(tgt_attr));

    // Embeddings: per-entity base vectors; collision-group members share a
    // group base so their fused vectors crowd together.
    std::vector<EmbeddingVector> group_base_name(group_count);
    std::vector<EmbeddingVector> group_base_rel(group_count);
    std::vector<EmbeddingVector> group_base_attr(group_count);
    for (std::size_t g = 0; g < group_count; ++g) {
        group_base_name[g] = gaussian(rng, cfg.dim_name, 1.0);
        group_base_rel[g] = gaussian(rng, cfg.dim_rel, 1.0);
        group_base_attr[g] = gaussian(rng, cfg.dim_attr, 1.0);
    }

    ds.source_emb = EmbeddingStore(Side::Source, cfg.dim_name, cfg.dim_rel, cfg.dim_attr);
    ds.target_emb = EmbeddingStore(Side::Target, cfg.dim_name, cfg.dim_rel, cfg.dim_attr);
    for (std::uint64_t i = 0; i < n; ++i) {
        EmbeddingVector name_v, rel_v, attr_v;
        if (group_of[i] >= 0) {
            auto g = static_cast<std::size_t>(group_of[i]);
            name_v = jittered(group_base_name[g], rng, cfg.collision_jitter);
            rel_v = jittered(group_base_rel[g], rng, cfg.collision_jitter);
            attr_v = jittered(group_base_attr[g], rng, cfg.collision_jitter);
        } else {
            name_v = gaussian(rng, cfg.dim_name, 1.0);
            rel_v = gaussian(rng, cfg.dim_rel, 1.0);
            attr_v = gaussian(rng, cfg.dim_attr, 1.0);
        }
        EmbeddingVector t_name = jittered(name_v, rng, cfg.pair_noise);
        EmbeddingVector t_rel = jittered(rel_v, rng, cfg.pair_noise);
        EmbeddingVector t_attr = jittered(attr_v, rng, cfg.pair_noise);
        ds.source_emb.add(i, std::move(name_v), std::move(rel_v), std::move(attr_v));
        ds.target_emb.add(perm[i], std::move(t_name), std::move(t_rel), std::move(t_attr));
    }
    ds.source_emb.finalize();
    ds.target_emb.finalize();

    std::size_t seed_count = static_cast<std::size_t>(
        std::llround(cfg.seed_fraction * static_cast<double>(n)));
    for (std::uint64_t i = 0; i < n; ++i) {
        ds.truth[i] = perm[i];
        if (i < seed_count) {
            ds.seeds.pairs.emplace_back(i, perm[i]);
        } else {
            ds.test_pairs.emplace_back(i, perm[i]);
        }
    }
    return ds;
}

void write_synthetic_dataset(const SyntheticDataset& ds, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);

    auto write_entities = [&](const KnowledgeGraph& g, const std::string& name) {
        std::ofstream out(dir + "/" + name);
        for (const auto& [id, ename] : g.entities()) {
            out << id << '\t' << ename << '\n';
        }
    };
    auto write_triples = [&](const KnowledgeGraph& g, const std::string& name) {
        std::ofstream out(dir + "/" + name);
        for (const auto& t : g.relation_triples()) {
            out << t.head << '\t' << t.relation << '\t' << t.tail << '\n';
        }
    };
    auto write_attrs = [&](const KnowledgeGraph& g, const std::string& name) {
        std::ofstream out(dir + "/" + name);
        for (const auto& a : g.attribute_triples()) {
            out << a.entity << '\t' << a.key << '\t' << a.value << '\n';
        }
    };
    write_entities(ds.source, "ent_ids_1");
    write_entities(ds.target, "ent_ids_2");
    write_triples(ds.source, "triples_1");
    write_triples(ds.target, "triples_2");
    write_attrs(ds.source, "attrs_1");
    write_attrs(ds.target, "attrs_2");

    {
        std::ofstream out(dir + "/sup_pairs");
        for (const auto& [s, t] : ds.seeds.pairs) {
            out << s << '\t' << t << '\n';
        }
    }
    {
        std::ofstream out(dir + "/ref_pairs");
        for (const auto& [s, t] : ds.test_pairs) {
            out << s << '\t' << t << '\n';
        }
    }
    save_embeddings_binary(ds.source_emb, dir + "/emb_1.bin");
    save_embeddings_binary(ds.target_emb, dir + "/emb_2.bin");

    nlohmann::ordered_json meta;
    meta["entities_per_side"] = ds.source.entity_count();
    meta["files"] = {"ent_ids_1", "ent_ids_2", "triples_1", "triples_2", "attrs_1",
                     "attrs_2",   "sup_pairs", "ref_pairs", "emb_1.bin", "emb_2.bin"};
    meta["embedding_format"] =
        "header 'COUNT DIM_NAME DIM_REL DIM_ATTR', then per entity: u64-le id + f32-le values";
    std::ofstream out(dir + "/dataset_meta.json");
    out << meta.dump(2) << '\n';
}

} // namespace kgalign
