#include "kgalign/kg.hpp"

#include "kgalign/error.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace kgalign {

const char* side_name(Side s) {
    return s == Side::Source ? "source" : "target";
}

KnowledgeGraph::KnowledgeGraph(Side side, std::map<std::uint64_t, std::string> entities,
                               std::vector<RelationTriple> relation_triples,
                               std::vector<AttributeTriple> attribute_triples)
    : side_(side),
      entities_(std::move(entities)),
      relation_triples_(std::move(relation_triples)),
      attribute_triples_(std::move(attribute_triples)) {
    // Deduplicate triples; duplicates would skew degree-based sampling.
    std::sort(relation_triples_.begin(), relation_triples_.end());
    relation_triples_.erase(std::unique(relation_triples_.begin(), relation_triples_.end()),
                            relation_triples_.end());
    std::sort(attribute_triples_.begin(), attribute_triples_.end());
    attribute_triples_.erase(std::unique(attribute_triples_.begin(), attribute_triples_.end()),
                             attribute_triples_.end());

    for (const auto& t : relation_triples_) {
        if (!contains(t.head)) {
            throw_data("relation triple references unknown " + std::string(side_name(side_)) +
                       " entity id " + std::to_string(t.head));
        }
        if (!contains(t.tail)) {
            throw_data("relation triple references unknown " + std::string(side_name(side_)) +
                       " entity id " + std::to_string(t.tail));
        }
        if (t.relation.empty()) {
            throw_data("relation triple with empty relation label (head " +
                       std::to_string(t.head) + ")");
        }
        adjacency_[t.head].insert({t.relation, t.tail});
        adjacency_[t.tail].insert({t.relation, t.head});
        degree_[t.head] += 1;
        if (t.tail != t.head) {
            degree_[t.tail] += 1;
        }
    }
    for (const auto& a : attribute_triples_) {
        if (!contains(a.entity)) {
            throw_data("attribute triple references unknown " + std::string(side_name(side_)) +
                       " entity id " + std::to_string(a.entity));
        }
        if (a.key.empty()) {
            throw_data("attribute triple with empty key (entity " + std::to_string(a.entity) + ")");
        }
        attrs_by_entity_[a.entity].emplace_back(a.key, a.value);
    }
    for (auto& [id, attrs] : attrs_by_entity_) {
        std::sort(attrs.begin(), attrs.end());
    }
}

void KnowledgeGraph::check_side(EntityId e) const {
    if (e.side != side_) {
        throw_not_found("entity id " + std::to_string(e.value) + " queried on wrong side (" +
                        side_name(e.side) + " vs graph " + side_name(side_) + ")");
    }
}

void KnowledgeGraph::require_entity(EntityId e) const {
    check_side(e);
    if (!contains(e.value)) {
        throw_not_found("unknown " + std::string(side_name(side_)) + " entity id " +
                        std::to_string(e.value));
    }
}

const std::string& KnowledgeGraph::name(EntityId e) const {
    require_entity(e);
    return entities_.at(e.value);
}

const std::set<Edge>& KnowledgeGraph::neighbors(EntityId e) const {
    require_entity(e);
    static const std::set<Edge> empty;
    auto it = adjacency_.find(e.value);
    return it == adjacency_.end() ? empty : it->second;
}

std::uint64_t KnowledgeGraph::degree(EntityId e) const {
    require_entity(e);
    auto it = degree_.find(e.value);
    return it == degree_.end() ? 0 : it->second;
}

Profile KnowledgeGraph::entity_profile(EntityId e) const {
    require_entity(e);
    Profile p;
    p.id = e.value;
    p.name = entities_.at(e.value);
    if (auto it = attrs_by_entity_.find(e.value); it != attrs_by_entity_.end()) {
        p.attributes = it->second;
    }
    for (const auto& edge : neighbors(e)) {
        p.relations.emplace_back(edge.relation, entities_.at(edge.neighbor));
    }
    std::sort(p.relations.begin(), p.relations.end());
    return p;
}

std::vector<std::uint64_t> KnowledgeGraph::entity_ids() const {
    std::vector<std::uint64_t> ids;
    ids.reserve(entities_.size());
    for (const auto& [id, _] : entities_) {
        ids.push_back(id);
    }
    return ids;
}

bool KnowledgeGraph::operator==(const KnowledgeGraph& other) const {
    return side_ == other.side_ && entities_ == other.entities_ &&
           relation_triples_ == other.relation_triples_ &&
           attribute_triples_ == other.attribute_triples_;
}

namespace {

struct TsvRow {
    std::vector<std::string> fields;
    std::size_t line_no = 0;
};

std::vector<TsvRow> read_tsv(const std::string& path, std::size_t min_fields) {
    std::ifstream in(path);
    if (!in) {
        throw_data("cannot open file: " + path);
    }
    std::vector<TsvRow> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        TsvRow row;
        row.line_no = line_no;
        std::size_t start = 0;
        while (true) {
            auto tab = line.find('\t', start);
            if (tab == std::string::npos) {
                row.fields.push_back(line.substr(start));
                break;
            }
            row.fields.push_back(line.substr(start, tab - start));
            start = tab + 1;
        }
        if (row.fields.size() < min_fields) {
            throw_data("malformed row in " + path + " line " + std::to_string(line_no) +
                       ": expected " + std::to_string(min_fields) + " tab-separated fields");
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::uint64_t parse_id(const std::string& field, const std::string& path, std::size_t line_no) {
    if (field.empty()) {
        throw_data("malformed row in " + path + " line " + std::to_string(line_no) +
                   ": empty id field");
    }
    std::uint64_t v = 0;
    for (char c : field) {
        if (c < '0' || c > '9') {
            throw_data("malformed row in " + path + " line " + std::to_string(line_no) +
                       ": non-numeric id '" + field + "'");
        }
        v = v * 10 + static_cast<std::uint64_t>(c - '0');
    }
    return v;
}

} // namespace

KnowledgeGraph load_graph(const std::string& entity_file, const std::string& relation_file,
                          const std::string& attribute_file, Side side) {
    std::map<std::uint64_t, std::string> entities;
    for (const auto& row : read_tsv(entity_file, 2)) {
        std::uint64_t id = parse_id(row.fields[0], entity_file, row.line_no);
        auto [_, inserted] = entities.emplace(id, row.fields[1]);
        if (!inserted) {
            throw_data("duplicate entity id " + std::to_string(id) + " in " + entity_file +
                       " line " + std::to_string(row.line_no));
        }
    }

    std::vector<RelationTriple> rel;
    for (const auto& row : read_tsv(relation_file, 3)) {
        RelationTriple t;
        t.head = parse_id(row.fields[0], relation_file, row.line_no);
        t.relation = row.fields[1];
        t.tail = parse_id(row.fields[2], relation_file, row.line_no);
        if (t.relation.empty()) {
            throw_data("malformed row in " + relation_file + " line " +
                       std::to_string(row.line_no) + ": empty relation label");
        }
        if (!entities.count(t.head)) {
            throw_data("dangling id " + std::to_string(t.head) + " in " + relation_file +
                       " line " + std::to_string(row.line_no));
        }
        if (!entities.count(t.tail)) {
            throw_data("dangling id " + std::to_string(t.tail) + " in " + relation_file +
                       " line " + std::to_string(row.line_no));
        }
        rel.push_back(std::move(t));
    }

    std::vector<AttributeTriple> attrs;
    if (!attribute_file.empty()) {
        for (const auto& row : read_tsv(attribute_file, 3)) {
            AttributeTriple a;
            a.entity = parse_id(row.fields[0], attribute_file, row.line_no);
            a.key = row.fields[1];
            a.value = row.fields[2];
            if (a.key.empty()) {
                throw_data("malformed row in " + attribute_file + " line " +
                           std::to_string(row.line_no) + ": empty attribute key");
            }
            if (!entities.count(a.entity)) {
                throw_data("dangling id " + std::to_string(a.entity) + " in " + attribute_file +
                           " line " + std::to_string(row.line_no));
            }
            attrs.push_back(std::move(a));
        }
    }

    return KnowledgeGraph(side, std::move(entities), std::move(rel), std::move(attrs));
}

SeedPairs load_seed_pairs(const std::string& path, const KnowledgeGraph& source,
                          const KnowledgeGraph& target) {
    SeedPairs seeds;
    std::set<std::uint64_t> seen;
    for (const auto& row : read_tsv(path, 2)) {
        std::uint64_t s = parse_id(row.fields[0], path, row.line_no);
        std::uint64_t t = parse_id(row.fields[1], path, row.line_no);
        if (!source.contains(s)) {
            throw_data("seed pair references unknown source id " + std::to_string(s) + " in " +
                       path + " line " + std::to_string(row.line_no));
        }
        if (!target.contains(t)) {
            throw_data("seed pair references unknown target id " + std::to_string(t) + " in " +
                       path + " line " + std::to_string(row.line_no));
        }
        if (!seen.insert(s).second) {
            throw_data("source id " + std::to_string(s) + " appears twice in " + path + " line " +
                       std::to_string(row.line_no));
        }
        seeds.pairs.emplace_back(s, t);
    }
    return seeds;
}

} // namespace kgalign
