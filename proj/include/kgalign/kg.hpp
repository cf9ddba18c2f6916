#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace kgalign {

enum class Side { Source, Target };

const char* side_name(Side s);

struct EntityId {
    std::uint64_t value = 0;
    Side side = Side::Source;

    auto operator<=>(const EntityId&) const = default;
};

struct RelationTriple {
    std::uint64_t head = 0;
    std::string relation;
    std::uint64_t tail = 0;

    auto operator<=>(const RelationTriple&) const = default;
};

struct AttributeTriple {
    std::uint64_t entity = 0;
    std::string key;
    std::string value;

    auto operator<=>(const AttributeTriple&) const = default;
};

// Relation/neighbor edge as seen from one entity.
struct Edge {
    std::string relation;
    std::uint64_t neighbor = 0;

    auto operator<=>(const Edge&) const = default;
};

// Text block describing one entity; the unit agents reason over.
// Attribute and relation lists are sorted so rendering is byte-deterministic.
struct Profile {
    std::uint64_t id = 0;
    std::string name;
    std::vector<std::pair<std::string, std::string>> attributes;  // (key, value)
    std::vector<std::pair<std::string, std::string>> relations;   // (relation, neighbor name)

    bool operator==(const Profile&) const = default;
};

// One side of the alignment task. Immutable after load; any number of
// concurrent readers is safe.
class KnowledgeGraph {
public:
    KnowledgeGraph() = default;
    KnowledgeGraph(Side side, std::map<std::uint64_t, std::string> entities,
                   std::vector<RelationTriple> relation_triples,
                   std::vector<AttributeTriple> attribute_triples);

    Side side() const { return side_; }
    std::size_t entity_count() const { return entities_.size(); }
    std::size_t relation_triple_count() const { return relation_triples_.size(); }
    std::size_t attribute_triple_count() const { return attribute_triples_.size(); }

    bool contains(std::uint64_t id) const { return entities_.count(id) != 0; }
    const std::string& name(EntityId e) const;

    const std::map<std::uint64_t, std::string>& entities() const { return entities_; }
    const std::vector<RelationTriple>& relation_triples() const { return relation_triples_; }
    const std::vector<AttributeTriple>& attribute_triples() const { return attribute_triples_; }

    // Head- and tail-side neighbors, set semantics.
    const std::set<Edge>& neighbors(EntityId e) const;

    // Count of relation triples incident to e (head or tail); a self-loop
    // counts once.
    std::uint64_t degree(EntityId e) const;

    Profile entity_profile(EntityId e) const;

    std::vector<std::uint64_t> entity_ids() const;

    bool operator==(const KnowledgeGraph& other) const;

private:
    void check_side(EntityId e) const;
    void require_entity(EntityId e) const;

    Side side_ = Side::Source;
    std::map<std::uint64_t, std::string> entities_;
    std::vector<RelationTriple> relation_triples_;
    std::vector<AttributeTriple> attribute_triples_;
    std::map<std::uint64_t, std::set<Edge>> adjacency_;
    std::map<std::uint64_t, std::uint64_t> degree_;
    std::map<std::uint64_t, std::vector<std::pair<std::string, std::string>>> attrs_by_entity_;
};

struct SeedPairs {
    std::vector<std::pair<std::uint64_t, std::uint64_t>> pairs;  // (source id, target id)
};

// TSV loaders. UTF-8, tab separated, no header, blank lines ignored.
// Malformed rows and dangling ids are reported with file and line number.
KnowledgeGraph load_graph(const std::string& entity_file, const std::string& relation_file,
                          const std::string& attribute_file, Side side);

SeedPairs load_seed_pairs(const std::string& path, const KnowledgeGraph& source,
                          const KnowledgeGraph& target);

} // namespace kgalign
