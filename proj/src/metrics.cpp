#include "kgalign/metrics.hpp"

#include "kgalign/error.hpp"

namespace kgalign {

double hits_at_k(const RankList& ranks, std::uint32_t K) {
    if (K < 1) {
        throw_data("hits_at_k: K must be >= 1");
    }
    if (ranks.ranks.empty()) {
        throw_data("hits_at_k: empty rank list");
    }
    std::uint64_t hits = 0;
    for (std::uint32_t r : ranks.ranks) {
        if (r != RankList::kUnranked && r <= K) {
            ++hits;
        }
    }
    return static_cast<double>(hits) / static_cast<double>(ranks.ranks.size());
}

double mrr(const RankList& ranks) {
    if (ranks.ranks.empty()) {
        throw_data("mrr: empty rank list");
    }
    double sum = 0.0;
    for (std::uint32_t r : ranks.ranks) {
        if (r != RankList::kUnranked) {
            sum += 1.0 / static_cast<double>(r);
        }
    }
    return sum / static_cast<double>(ranks.ranks.size());
}

CostReport report_cost(const std::vector<DebateTranscript>& transcripts) {
    CostReport report;
    report.entities = transcripts.size();
    for (const auto& t : transcripts) {
        report.total_tokens += t.usage.total();
    }
    report.mean_tokens_per_entity =
        transcripts.empty() ? 0.0
                            : static_cast<double>(report.total_tokens) /
                                  static_cast<double>(transcripts.size());
    return report;
}

} // namespace kgalign
