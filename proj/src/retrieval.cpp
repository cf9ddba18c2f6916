#include "kgalign/retrieval.hpp"

#include "kgalign/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace kgalign {

double CandidateSet::top1_score() const {
    if (candidates.empty()) {
        throw_data("candidate set for source " + std::to_string(source.value) + " is empty");
    }
    return candidates.front().score;
}

double CandidateSet::top2_score() const {
    if (candidates.size() < 2) {
        throw_data("candidate set for source " + std::to_string(source.value) +
                   " has fewer than 2 entries; gap undefined");
    }
    return candidates[1].score;
}

double gap(const CandidateSet& cs) {
    if (cs.candidates.size() < 2) {
        throw_data("gap undefined: candidate set for source " + std::to_string(cs.source.value) +
                   " has fewer than 2 entries");
    }
    double best = cs.candidates[0].score;
    double second = cs.candidates[1].score;
    if (second > best) std::swap(best, second);
    for (std::size_t i = 2; i < cs.candidates.size(); ++i) {
        double s = cs.candidates[i].score;
        if (s > best) {
            second = best;
            best = s;
        } else if (s > second) {
            second = s;
        }
    }
    return best - second;
}

std::string AlignmentDecision::provenance_string() const {
    switch (provenance) {
        case Provenance::Direct: return "direct";
        case Provenance::Ldv: return "ldv";
        case Provenance::Dda: return "dda-round-" + std::to_string(dda_round);
    }
    return "direct";
}

std::map<std::uint64_t, CandidateSet> build_candidates(const std::vector<EntityId>& sources,
                                                       const std::vector<EntityId>& targets,
                                                       const Matrix& scores, std::size_t K) {
    if (targets.empty()) {
        throw_data("build_candidates: empty target side");
    }
    if (K > targets.size()) {
        throw_data("build_candidates: K=" + std::to_string(K) + " exceeds target count " +
                   std::to_string(targets.size()));
    }
    if (scores.rows != sources.size() || scores.cols != targets.size()) {
        throw_data("build_candidates: score matrix shape does not match id lists");
    }
    std::map<std::uint64_t, CandidateSet> out;
    for (std::size_t i = 0; i < sources.size(); ++i) {
        std::vector<double> row(scores.data.begin() + static_cast<std::ptrdiff_t>(i * scores.cols),
                                scores.data.begin() +
                                    static_cast<std::ptrdiff_t>((i + 1) * scores.cols));
        auto ranked = top_k(row, K);
        CandidateSet cs;
        cs.source = sources[i];
        cs.created_from = CandidateOrigin::Embedding;
        cs.candidates.reserve(K);
        for (const auto& [idx, score] : ranked) {
            cs.candidates.push_back({targets[idx], score, std::nullopt});
        }
        out.emplace(sources[i].value, std::move(cs));
    }
    return out;
}

UncertainSet build_uncertain(const std::map<std::uint64_t, CandidateSet>& candidate_map,
                             double delta1) {
    if (delta1 < 0.0) {
        throw_config("delta1 must be non-negative");
    }
    UncertainSet u;
    u.threshold_used = delta1;
    for (const auto& [id, cs] : candidate_map) {
        if (gap(cs) < delta1) {
            u.members.insert(id);
        }
    }
    return u;
}

std::vector<AlignmentDecision> direct_decisions(
    const std::map<std::uint64_t, CandidateSet>& candidate_map, const UncertainSet& uncertain) {
    std::vector<AlignmentDecision> out;
    for (const auto& [id, cs] : candidate_map) {
        if (uncertain.members.count(id)) continue;
        AlignmentDecision d;
        d.source = cs.source;
        d.target = cs.candidates.front().target;
        d.score = cs.candidates.front().score;
        d.provenance = Provenance::Direct;
        out.push_back(d);
    }
    return out;
}

void dump_candidates_jsonl(const std::map<std::uint64_t, CandidateSet>& candidate_map,
                           const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw_data("cannot write candidate file: " + path);
    }
    for (const auto& [id, cs] : candidate_map) {
        nlohmann::ordered_json j;
        j["source"] = id;
        auto arr = nlohmann::ordered_json::array();
        for (const auto& c : cs.candidates) {
            arr.push_back({c.target.value, c.score});
        }
        j["candidates"] = std::move(arr);
        j["gap"] = gap(cs);
        out << j.dump() << '\n';
    }
}

std::map<std::uint64_t, CandidateSet> load_candidates_jsonl(const std::string& path,
                                                            Side source_side, Side target_side) {
    std::ifstream in(path);
    if (!in) {
        throw_data("cannot open candidate file: " + path);
    }
    std::map<std::uint64_t, CandidateSet> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.contains("source") || !j.contains("candidates")) {
            throw_data("malformed candidate record in " + path + " line " +
                       std::to_string(line_no));
        }
        CandidateSet cs;
        cs.source = {j["source"].get<std::uint64_t>(), source_side};
        for (const auto& pair : j["candidates"]) {
            cs.candidates.push_back(
                {{pair.at(0).get<std::uint64_t>(), target_side}, pair.at(1).get<double>(),
                 std::nullopt});
        }
        out.emplace(cs.source.value, std::move(cs));
    }
    return out;
}

void write_decisions_tsv(const std::vector<AlignmentDecision>& decisions,
                         const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw_data("cannot write decisions file: " + path);
    }
    for (const auto& d : decisions) {
        std::ostringstream score;
        score.precision(17);
        score << d.score;
        out << d.source.value << '\t' << d.target.value << '\t' << score.str() << '\t'
            << d.provenance_string() << '\n';
    }
}

} // namespace kgalign
