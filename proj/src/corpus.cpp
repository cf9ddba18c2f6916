#include "kgalign/corpus.hpp"

#include "kgalign/error.hpp"
#include "kgalign/hash.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <map>
#include <sstream>

namespace kgalign {

const char* const kInstructionText =
    "Determine whether entity A and entity B are the same entity in the real world. "
    "Answer Yes or No.";

const char* const kTemplateVersion = "v1";

std::vector<PreferencePair> name_negatives(const std::vector<std::uint64_t>& sources,
                                           const EmbeddingStore& source_store,
                                           const EmbeddingStore& target_store,
                                           const SeedPairs& seeds,
                                           const NameNegativeOptions& opts) {
    if (target_store.size() < 2) {
        throw_data("name_negatives: target pool smaller than 2");
    }
    std::map<std::uint64_t, std::uint64_t> seed_of;
    for (const auto& [s, t] : seeds.pairs) {
        seed_of[s] = t;
    }
    std::vector<PreferencePair> out;
    for (std::uint64_t src : sources) {
        auto seed_it = seed_of.find(src);
        if (seed_it == seed_of.end()) {
            throw_data("name_negatives: source " + std::to_string(src) +
                       " has no seed counterpart");
        }
        const EntityEmbedding* src_emb = source_store.find(src);
        if (!src_emb) {
            throw_data("name_negatives: source " + std::to_string(src) +
                       " has no name embedding");
        }
        std::uint64_t ground_truth = seed_it->second;
        bool found = false;
        std::uint64_t best_id = 0;
        double best_sim = 0.0;
        for (const auto& row : target_store.rows()) {
            if (row.entity == ground_truth) continue;
            double sim = cosine(src_emb->name_vec, row.name_vec);
            if (!found || sim > best_sim || (sim == best_sim && row.entity < best_id)) {
                found = true;
                best_sim = sim;
                best_id = row.entity;
            }
        }
        if (!found) {
            throw_data("name_negatives: no eligible counterpart for source " +
                       std::to_string(src));
        }
        if (best_sim < opts.similarity_floor) {
            continue;
        }
        PreferencePair p;
        p.source = src;
        p.counterpart = best_id;
        p.kind = PairKind::NameNegative;
        p.name_similarity = best_sim;
        out.push_back(p);
    }
    return out;
}

DegreeNegativeResult degree_negatives(const KnowledgeGraph& g,
                                      const std::vector<std::uint64_t>& sources) {
    DegreeNegativeResult result;
    for (std::uint64_t src : sources) {
        const auto& nbrs = g.neighbors({src, g.side()});
        if (nbrs.empty()) {
            result.skipped.push_back(src);
            continue;
        }
        bool found = false;
        std::uint64_t best_id = 0;
        std::uint64_t best_deg = 0;
        // Neighbor ids may repeat across relations; evaluate each id once.
        std::set<std::uint64_t> seen;
        for (const auto& edge : nbrs) {
            if (!seen.insert(edge.neighbor).second) continue;
            std::uint64_t deg = g.degree({edge.neighbor, g.side()});
            if (!found || deg > best_deg || (deg == best_deg && edge.neighbor < best_id)) {
                found = true;
                best_deg = deg;
                best_id = edge.neighbor;
            }
        }
        PreferencePair p;
        p.source = src;
        p.counterpart = best_id;
        p.kind = PairKind::DegreeNegative;
        result.pairs.push_back(p);
    }
    return result;
}

std::string render_pair_input(const Profile& a, const Profile& b) {
    auto join_attrs = [](const Profile& p) {
        std::string s;
        for (std::size_t i = 0; i < p.attributes.size(); ++i) {
            if (i) s += "; ";
            s += p.attributes[i].first + ": " + p.attributes[i].second;
        }
        return s;
    };
    auto join_rels = [](const Profile& p) {
        std::string s;
        for (std::size_t i = 0; i < p.relations.size(); ++i) {
            if (i) s += "; ";
            s += p.relations[i].first + "|" + p.relations[i].second;
        }
        return s;
    };
    std::string out;
    out += "Entity A Name: " + a.name + "\n";
    out += "Entity A Attributes: " + join_attrs(a) + "\n";
    out += "Entity A Relations: " + join_rels(a) + "\n";
    out += "Entity B Name: " + b.name + "\n";
    out += "Entity B Attributes: " + join_attrs(b) + "\n";
    out += "Entity B Relations: " + join_rels(b);
    return out;
}

namespace {

std::string template_fingerprint() {
    return sha256_hex(std::string(kInstructionText) +
                      "\nEntity A Name: {}\nEntity A Attributes: {}\nEntity A Relations: {}\n"
                      "Entity B Name: {}\nEntity B Attributes: {}\nEntity B Relations: {}");
}

InstructionRecord make_record(const Profile& a, const Profile& b, bool positive) {
    InstructionRecord r;
    r.instruction = kInstructionText;
    r.input = render_pair_input(a, b);
    r.chosen = positive ? "Yes" : "No";
    r.rejected = positive ? "No" : "Yes";
    return r;
}

} // namespace

CorpusBuildResult build_corpus(const SeedPairs& seeds,
                               const std::vector<PreferencePair>& name_negs,
                               const std::vector<PreferencePair>& degree_negs,
                               const KnowledgeGraph& g_s, const KnowledgeGraph& g_t,
                               const std::vector<std::string>& dataset_names,
                               double name_similarity_floor) {
    auto profile_or_throw = [](const KnowledgeGraph& g, std::uint64_t id, const char* role) {
        if (!g.contains(id)) {
            throw_data(std::string("build_corpus: unresolvable ") + role + " entity " +
                       std::to_string(id));
        }
        return g.entity_profile({id, g.side()});
    };

    CorpusBuildResult result;

    std::vector<std::pair<std::uint64_t, std::uint64_t>> positives = seeds.pairs;
    std::sort(positives.begin(), positives.end());
    for (const auto& [s, t] : positives) {
        result.records.push_back(
            make_record(profile_or_throw(g_s, s, "source"), profile_or_throw(g_t, t, "target"),
                        /*positive=*/true));
    }

    std::vector<PreferencePair> names = name_negs;
    std::sort(names.begin(), names.end(), [](const PreferencePair& a, const PreferencePair& b) {
        return a.source < b.source;
    });
    for (const auto& p : names) {
        result.records.push_back(make_record(profile_or_throw(g_s, p.source, "source"),
                                             profile_or_throw(g_t, p.counterpart, "target"),
                                             /*positive=*/false));
    }

    std::vector<PreferencePair> degrees = degree_negs;
    std::sort(degrees.begin(), degrees.end(),
              [](const PreferencePair& a, const PreferencePair& b) { return a.source < b.source; });
    for (const auto& p : degrees) {
        // Degree negatives live in the source graph on both sides of the record.
        result.records.push_back(make_record(profile_or_throw(g_s, p.source, "source"),
                                             profile_or_throw(g_s, p.counterpart, "neighbor"),
                                             /*positive=*/false));
    }

    result.manifest.positive_count = positives.size();
    result.manifest.name_negative_count = names.size();
    result.manifest.degree_negative_count = degrees.size();
    result.manifest.source_datasets = dataset_names;
    result.manifest.template_version = kTemplateVersion;
    result.manifest.template_sha256 = template_fingerprint();
    result.manifest.name_similarity_floor = name_similarity_floor;
    return result;
}

std::string serialize_corpus(const std::vector<InstructionRecord>& records) {
    std::string out;
    for (const auto& r : records) {
        nlohmann::ordered_json j;
        j["instruction"] = r.instruction;
        j["input"] = r.input;
        j["chosen"] = r.chosen;
        j["rejected"] = r.rejected;
        out += j.dump();
        out += '\n';
    }
    return out;
}

std::vector<InstructionRecord> parse_corpus(const std::string& jsonl) {
    std::vector<InstructionRecord> out;
    std::istringstream in(jsonl);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded()) {
            throw_data("malformed corpus record at line " + std::to_string(line_no));
        }
        InstructionRecord r;
        r.instruction = j.at("instruction").get<std::string>();
        r.input = j.at("input").get<std::string>();
        r.chosen = j.at("chosen").get<std::string>();
        r.rejected = j.at("rejected").get<std::string>();
        out.push_back(std::move(r));
    }
    return out;
}

std::string manifest_json(const CorpusManifest& manifest) {
    nlohmann::ordered_json j;
    j["counts"]["positive"] = manifest.positive_count;
    j["counts"]["name_negative"] = manifest.name_negative_count;
    j["counts"]["degree_negative"] = manifest.degree_negative_count;
    j["source_datasets"] = manifest.source_datasets;
    j["template_version"] = manifest.template_version;
    j["template_sha256"] = manifest.template_sha256;
    j["name_similarity_floor"] = manifest.name_similarity_floor;
    return j.dump(2) + "\n";
}

std::string trainer_config_json() {
    nlohmann::ordered_json j;
    j["method"] = "dpo";
    j["lora"]["r"] = 22;
    j["lora"]["alpha"] = 44;
    j["lora"]["dropout"] = 0.1;
    j["lora"]["modules"] = {"q_proj", "v_proj"};
    j["training"]["learning_rate"] = 1e-4;
    j["training"]["epochs"] = 1;
    j["training"]["precision"] = "bf16";
    return j.dump(2) + "\n";
}

} // namespace kgalign
