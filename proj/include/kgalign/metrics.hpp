#pragma once

#include "kgalign/debate.hpp"

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

namespace kgalign {

// Rank of the true counterpart per test entity; kUnranked marks entities
// whose truth never appears in the evaluated ranking.
struct RankList {
    static constexpr std::uint32_t kUnranked = std::numeric_limits<std::uint32_t>::max();
    std::vector<std::uint32_t> ranks;
};

// (1/N) * sum 1[rank_i <= K]; unranked entries never count.
double hits_at_k(const RankList& ranks, std::uint32_t K);

// (1/N) * sum 1/rank_i; unranked entries contribute 0.
double mrr(const RankList& ranks);

struct ProvenanceStats {
    std::uint64_t count = 0;
    double hits1 = 0.0;
    double mrr = 0.0;
};

struct MetricReport {
    std::uint64_t N = 0;
    std::map<std::uint32_t, double> hits;  // K -> Hits@K
    double mrr = 0.0;
    std::map<std::string, ProvenanceStats> by_provenance;
};

struct CostReport {
    std::uint64_t total_tokens = 0;
    double mean_tokens_per_entity = 0.0;
    std::uint64_t entities = 0;
};

CostReport report_cost(const std::vector<DebateTranscript>& transcripts);

} // namespace kgalign
