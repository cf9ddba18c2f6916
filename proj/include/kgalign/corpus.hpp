#pragma once

#include "kgalign/embedding.hpp"
#include "kgalign/kg.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace kgalign {

enum class PairKind { Positive, NameNegative, DegreeNegative };

struct PreferencePair {
    std::uint64_t source = 0;       // source-graph entity
    std::uint64_t counterpart = 0;  // target-graph entity, or source-graph neighbor for
                                    // degree negatives
    PairKind kind = PairKind::Positive;
    double name_similarity = 0.0;   // filled for name negatives

    bool operator==(const PreferencePair&) const = default;
};

struct InstructionRecord {
    std::string instruction;
    std::string input;
    std::string chosen;    // "Yes" | "No"
    std::string rejected;  // opposite of chosen

    bool operator==(const InstructionRecord&) const = default;
};

struct CorpusManifest {
    std::uint64_t positive_count = 0;
    std::uint64_t name_negative_count = 0;
    std::uint64_t degree_negative_count = 0;
    std::vector<std::string> source_datasets;
    std::string template_version;
    std::string template_sha256;
    double name_similarity_floor = 0.0;
};

struct NameNegativeOptions {
    // Pairs whose best non-counterpart name similarity falls below the floor
    // are dropped. 0.0 keeps everything for the usual non-negative encoders;
    // pass -1 to disable entirely.
    double similarity_floor = 0.0;
};

struct DegreeNegativeResult {
    std::vector<PreferencePair> pairs;
    std::vector<std::uint64_t> skipped;  // sources with no neighbors
};

// For each source with a seed counterpart: the target entity most similar in
// name that is not the ground-truth counterpart. Ties break by ascending id.
std::vector<PreferencePair> name_negatives(const std::vector<std::uint64_t>& sources,
                                           const EmbeddingStore& source_store,
                                           const EmbeddingStore& target_store,
                                           const SeedPairs& seeds,
                                           const NameNegativeOptions& opts = {});

// For each source: its highest-degree neighbor within the source graph.
// Sources without neighbors are skipped and reported.
DegreeNegativeResult degree_negatives(const KnowledgeGraph& g,
                                      const std::vector<std::uint64_t>& sources);

extern const char* const kInstructionText;
extern const char* const kTemplateVersion;

// Renders the fixed two-entity comparison block.
std::string render_pair_input(const Profile& a, const Profile& b);

struct CorpusBuildResult {
    std::vector<InstructionRecord> records;
    CorpusManifest manifest;
};

// One record per pair, ordered by (kind, source id). Positive pairs answer
// Yes; negatives answer No.
CorpusBuildResult build_corpus(const SeedPairs& seeds,
                               const std::vector<PreferencePair>& name_negs,
                               const std::vector<PreferencePair>& degree_negs,
                               const KnowledgeGraph& g_s, const KnowledgeGraph& g_t,
                               const std::vector<std::string>& dataset_names = {},
                               double name_similarity_floor = 0.0);

// One JSON object per line, keys exactly instruction/input/chosen/rejected.
std::string serialize_corpus(const std::vector<InstructionRecord>& records);
std::vector<InstructionRecord> parse_corpus(const std::string& jsonl);

std::string manifest_json(const CorpusManifest& manifest);

// Passive LoRA/DPO trainer settings for external consumption.
std::string trainer_config_json();

} // namespace kgalign
