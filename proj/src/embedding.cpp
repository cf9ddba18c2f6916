#include "kgalign/embedding.hpp"

#include "kgalign/error.hpp"
#include "kgalign/parallel.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

namespace kgalign {

namespace {

void check_finite(const EmbeddingVector& v, const char* what) {
    for (float x : v) {
        if (!std::isfinite(x)) {
            throw_data(std::string("invalid vector: non-finite entry in ") + what);
        }
    }
}

double dot(const EmbeddingVector& a, const EmbeddingVector& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    }
    return s;
}

double norm(const EmbeddingVector& a) {
    return std::sqrt(dot(a, a));
}

// Mean of the k largest values of `row`.
double mean_top_k(const std::vector<double>& row, std::size_t k) {
    std::vector<double> tmp(row);
    std::partial_sort(tmp.begin(), tmp.begin() + static_cast<std::ptrdiff_t>(k), tmp.end(),
                      std::greater<double>());
    double s = 0.0;
    for (std::size_t i = 0; i < k; ++i) s += tmp[i];
    return s / static_cast<double>(k);
}

} // namespace

EmbeddingStore::EmbeddingStore(Side side, std::size_t dim_name, std::size_t dim_rel,
                               std::size_t dim_attr)
    : side_(side), dim_name_(dim_name), dim_rel_(dim_rel), dim_attr_(dim_attr) {}

void EmbeddingStore::add(std::uint64_t entity, EmbeddingVector name, EmbeddingVector rel,
                         EmbeddingVector attr) {
    if (name.size() != dim_name_ || rel.size() != dim_rel_ || attr.size() != dim_attr_) {
        throw_data("embedding for entity " + std::to_string(entity) +
                   " does not match store dimensions");
    }
    if (index_.count(entity)) {
        throw_data("duplicate embedding for entity " + std::to_string(entity));
    }
    EntityEmbedding e;
    e.entity = entity;
    e.fused = fuse(name, rel, attr);
    e.name_vec = std::move(name);
    e.rel_vec = std::move(rel);
    e.attr_vec = std::move(attr);
    index_[entity] = rows_.size();
    rows_.push_back(std::move(e));
}

void EmbeddingStore::finalize() {
    std::sort(rows_.begin(), rows_.end(),
              [](const EntityEmbedding& a, const EntityEmbedding& b) { return a.entity < b.entity; });
    index_.clear();
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        index_[rows_[i].entity] = i;
    }
}

const EntityEmbedding* EmbeddingStore::find(std::uint64_t entity) const {
    auto it = index_.find(entity);
    return it == index_.end() ? nullptr : &rows_[it->second];
}

std::vector<EntityId> EmbeddingStore::entity_ids() const {
    std::vector<EntityId> ids;
    ids.reserve(rows_.size());
    for (const auto& r : rows_) {
        ids.push_back({r.entity, side_});
    }
    return ids;
}

EmbeddingVector fuse(const EmbeddingVector& name, const EmbeddingVector& rel,
                     const EmbeddingVector& attr) {
    check_finite(name, "name vector");
    check_finite(rel, "relation vector");
    check_finite(attr, "attribute vector");
    EmbeddingVector out;
    out.reserve(name.size() + rel.size() + attr.size());
    out.insert(out.end(), name.begin(), name.end());
    out.insert(out.end(), rel.begin(), rel.end());
    out.insert(out.end(), attr.begin(), attr.end());
    return out;
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.size() != b.size()) {
        throw_data("cosine: dimension mismatch (" + std::to_string(a.size()) + " vs " +
                   std::to_string(b.size()) + ")");
    }
    double na = norm(a);
    double nb = norm(b);
    if (na == 0.0 || nb == 0.0) {
        throw_data("cosine: undefined similarity for all-zero vector");
    }
    return dot(a, b) / (na * nb);
}

Matrix cosine_matrix(const EmbeddingStore& sources, const EmbeddingStore& targets,
                     unsigned workers) {
    if (sources.size() == 0 || targets.size() == 0) {
        throw_data("cosine_matrix: empty embedding store");
    }
    Matrix m(sources.size(), targets.size());
    parallel_for(sources.size(), workers, [&](std::size_t i) {
        const auto& src = sources.row(i).fused;
        for (std::size_t j = 0; j < targets.size(); ++j) {
            m.at(i, j) = cosine(src, targets.row(j).fused);
        }
    });
    return m;
}

Matrix csls_matrix(const EmbeddingStore& sources, const EmbeddingStore& targets,
                   const SimilarityConfig& cfg, unsigned workers) {
    if (sources.size() == 0 || targets.size() == 0) {
        throw_data("csls_matrix: empty embedding store");
    }
    if (cfg.csls_k < 1) {
        throw_config("csls_k must be positive");
    }
    // csls_k must leave at least one non-neighbor target; the degenerate
    // single-target store is allowed with k=1 (the only neighbor).
    std::size_t max_k = std::max<std::size_t>(1, targets.size() - 1);
    if (static_cast<std::size_t>(cfg.csls_k) > max_k) {
        throw_config("csls_k=" + std::to_string(cfg.csls_k) + " too large for " +
                     std::to_string(targets.size()) + " targets");
    }
    std::size_t k_t = std::min<std::size_t>(static_cast<std::size_t>(cfg.csls_k), targets.size());
    std::size_t k_s = std::min<std::size_t>(static_cast<std::size_t>(cfg.csls_k), sources.size());

    Matrix cos(sources.size(), targets.size());
    parallel_for(sources.size(), workers, [&](std::size_t i) {
        const auto& src = sources.row(i).fused;
        for (std::size_t j = 0; j < targets.size(); ++j) {
            cos.at(i, j) = cosine(src, targets.row(j).fused);
        }
    });

    std::vector<double> r_t(sources.size(), 0.0);  // penalty of each source row
    parallel_for(sources.size(), workers, [&](std::size_t i) {
        std::vector<double> row(cos.data.begin() + static_cast<std::ptrdiff_t>(i * cos.cols),
                                cos.data.begin() + static_cast<std::ptrdiff_t>((i + 1) * cos.cols));
        r_t[i] = mean_top_k(row, k_t);
    });

    std::vector<double> r_s(targets.size(), 0.0);  // penalty of each target column
    parallel_for(targets.size(), workers, [&](std::size_t j) {
        std::vector<double> col(sources.size());
        for (std::size_t i = 0; i < sources.size(); ++i) {
            col[i] = cos.at(i, j);
        }
        r_s[j] = mean_top_k(col, k_s);
    });

    Matrix out(sources.size(), targets.size());
    parallel_for(sources.size(), workers, [&](std::size_t i) {
        for (std::size_t j = 0; j < targets.size(); ++j) {
            out.at(i, j) = 2.0 * cos.at(i, j) - r_t[i] - r_s[j];
        }
    });
    return out;
}

std::vector<std::pair<std::size_t, double>> top_k(const std::vector<double>& scores_row,
                                                  std::size_t k) {
    if (k > scores_row.size()) {
        throw_data("top_k: k=" + std::to_string(k) + " exceeds row length " +
                   std::to_string(scores_row.size()));
    }
    std::vector<std::size_t> idx(scores_row.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (scores_row[a] != scores_row[b]) return scores_row[a] > scores_row[b];
        return a < b;
    });
    std::vector<std::pair<std::size_t, double>> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        out.emplace_back(idx[i], scores_row[idx[i]]);
    }
    return out;
}

void minmax_normalize_rows(Matrix& m) {
    for (std::size_t i = 0; i < m.rows; ++i) {
        double lo = m.at(i, 0);
        double hi = m.at(i, 0);
        for (std::size_t j = 1; j < m.cols; ++j) {
            lo = std::min(lo, m.at(i, j));
            hi = std::max(hi, m.at(i, j));
        }
        double range = hi - lo;
        for (std::size_t j = 0; j < m.cols; ++j) {
            m.at(i, j) = range == 0.0 ? 0.5 : (m.at(i, j) - lo) / range;
        }
    }
}

namespace {

void put_u64_le(std::ostream& out, std::uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) {
        buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    }
    out.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t get_u64_le(std::istream& in) {
    unsigned char buf[8];
    in.read(reinterpret_cast<char*>(buf), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
        v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    }
    return v;
}

void put_f32_le(std::ostream& out, float f) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    unsigned char buf[4];
    for (int i = 0; i < 4; ++i) {
        buf[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
    }
    out.write(reinterpret_cast<const char*>(buf), 4);
}

float get_f32_le(std::istream& in) {
    unsigned char buf[4];
    in.read(reinterpret_cast<char*>(buf), 4);
    std::uint32_t bits = 0;
    for (int i = 0; i < 4; ++i) {
        bits |= static_cast<std::uint32_t>(buf[i]) << (8 * i);
    }
    float f;
    std::memcpy(&f, &bits, 4);
    return f;
}

} // namespace

EmbeddingStore load_embeddings_binary(const std::string& path, Side side) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw_data("cannot open embedding file: " + path);
    }
    std::string header;
    std::getline(in, header);
    std::istringstream hs(header);
    std::uint64_t count = 0, dn = 0, dr = 0, da = 0;
    if (!(hs >> count >> dn >> dr >> da)) {
        throw_data("malformed embedding header in " + path);
    }
    EmbeddingStore store(side, dn, dr, da);
    for (std::uint64_t rec = 0; rec < count; ++rec) {
        std::uint64_t id = get_u64_le(in);
        EmbeddingVector name(dn), rel(dr), attr(da);
        for (auto& x : name) x = get_f32_le(in);
        for (auto& x : rel) x = get_f32_le(in);
        for (auto& x : attr) x = get_f32_le(in);
        if (!in) {
            throw_data("truncated embedding record " + std::to_string(rec) + " in " + path);
        }
        store.add(id, std::move(name), std::move(rel), std::move(attr));
    }
    store.finalize();
    return store;
}

void save_embeddings_binary(const EmbeddingStore& store, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw_data("cannot write embedding file: " + path);
    }
    out << store.size() << ' ' << store.dim_name() << ' ' << store.dim_rel() << ' '
        << store.dim_attr() << '\n';
    for (const auto& row : store.rows()) {
        put_u64_le(out, row.entity);
        for (float x : row.name_vec) put_f32_le(out, x);
        for (float x : row.rel_vec) put_f32_le(out, x);
        for (float x : row.attr_vec) put_f32_le(out, x);
    }
}

EmbeddingStore load_embeddings_jsonl(const std::string& path, Side side) {
    std::ifstream in(path);
    if (!in) {
        throw_data("cannot open embedding file: " + path);
    }
    EmbeddingStore store(side, 0, 0, 0);
    bool first = true;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("id") || !j.contains("name") ||
            !j.contains("rel") || !j.contains("attr")) {
            throw_data("malformed embedding record in " + path + " line " +
                       std::to_string(line_no));
        }
        auto vec = [](const nlohmann::json& arr) {
            EmbeddingVector v;
            v.reserve(arr.size());
            for (const auto& x : arr) {
                v.push_back(static_cast<float>(x.get<double>()));
            }
            return v;
        };
        EmbeddingVector name = vec(j["name"]);
        EmbeddingVector rel = vec(j["rel"]);
        EmbeddingVector attr = vec(j["attr"]);
        if (first) {
            store = EmbeddingStore(side, name.size(), rel.size(), attr.size());
            first = false;
        }
        store.add(j["id"].get<std::uint64_t>(), std::move(name), std::move(rel), std::move(attr));
    }
    store.finalize();
    return store;
}

void save_embeddings_jsonl(const EmbeddingStore& store, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw_data("cannot write embedding file: " + path);
    }
    for (const auto& row : store.rows()) {
        nlohmann::ordered_json j;
        j["id"] = row.entity;
        j["name"] = row.name_vec;
        j["rel"] = row.rel_vec;
        j["attr"] = row.attr_vec;
        out << j.dump() << '\n';
    }
}

} // namespace kgalign
