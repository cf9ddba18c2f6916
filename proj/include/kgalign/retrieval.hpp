#pragma once

#include "kgalign/embedding.hpp"
#include "kgalign/kg.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace kgalign {

enum class CandidateOrigin { Embedding, LdvRerank };

struct Candidate {
    EntityId target;
    double score = 0.0;  // embedding similarity prior, kept through reranking
    // Referee score from verification; absent candidates rank by prior.
    std::optional<double> ldv_score;
};

// Ranked target candidates for one source entity. Embedding-origin sets are
// ordered by descending score (ties by ascending id); reranked sets order by
// referee score first, prior second.
struct CandidateSet {
    EntityId source;
    std::vector<Candidate> candidates;
    CandidateOrigin created_from = CandidateOrigin::Embedding;

    double top1_score() const;
    double top2_score() const;
};

// s1 - s2 over the set's scores, order-independent (max minus second max).
double gap(const CandidateSet& cs);

struct UncertainSet {
    std::set<std::uint64_t> members;  // source-side entity ids
    double threshold_used = 0.0;
};

enum class Provenance { Direct, Ldv, Dda };

struct AlignmentDecision {
    EntityId source;
    EntityId target;
    double score = 0.0;
    Provenance provenance = Provenance::Direct;
    int dda_round = 0;  // meaningful when provenance == Dda

    std::string provenance_string() const;
};

// Top-K candidates per source from a scores matrix whose rows follow
// `sources` and columns follow `targets`. Ties break by ascending target id.
std::map<std::uint64_t, CandidateSet> build_candidates(const std::vector<EntityId>& sources,
                                                       const std::vector<EntityId>& targets,
                                                       const Matrix& scores, std::size_t K);

// Membership iff s1 - s2 < delta1 (strict).
UncertainSet build_uncertain(const std::map<std::uint64_t, CandidateSet>& candidate_map,
                             double delta1);

// Direct decisions for every source not in the uncertain set, targeting Top-1.
std::vector<AlignmentDecision> direct_decisions(
    const std::map<std::uint64_t, CandidateSet>& candidate_map, const UncertainSet& uncertain);

// JSONL dump: {"source": id, "candidates": [[target_id, score], ...], "gap": g}
void dump_candidates_jsonl(const std::map<std::uint64_t, CandidateSet>& candidate_map,
                           const std::string& path);
std::map<std::uint64_t, CandidateSet> load_candidates_jsonl(const std::string& path,
                                                            Side source_side, Side target_side);

// Decision file: TSV `source_id \t target_id \t score \t provenance`.
void write_decisions_tsv(const std::vector<AlignmentDecision>& decisions,
                         const std::string& path);

} // namespace kgalign
