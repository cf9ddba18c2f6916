#pragma once

#include "kgalign/backend.hpp"
#include "kgalign/corpus.hpp"
#include "kgalign/debate.hpp"
#include "kgalign/embedding.hpp"
#include "kgalign/kg.hpp"
#include "kgalign/metrics.hpp"
#include "kgalign/retrieval.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace kgalign {

// All knobs live in a flat `module.key` namespace shared by the JSON config
// file and the CLI flags.
struct PipelineConfig {
    // data.*
    std::string ent1, ent2, rel1, rel2, attr1, attr2;
    std::string seeds_path, test_path;
    std::string emb1, emb2;
    std::string emb_format = "binary";  // binary | jsonl
    std::vector<std::string> dataset_names;
    // similarity.*
    SimilarityConfig similarity;
    // retrieval.*
    std::size_t retrieval_k = 20;
    // debate.* (delta1 is shared between retrieval and the termination rule)
    DebateConfig debate;
    // corpus.*
    double name_similarity_floor = 0.0;
    // backend.*
    BackendConfig backend;
    // run.*
    std::string mode = "offline";  // offline | live
    std::string out_dir = "out";
    unsigned workers = 1;
    std::vector<std::uint32_t> eval_ks = {1, 5, 10, 20};
    // prompts.*
    std::string prompts_dir;  // empty uses the built-in templates
    bool verify_prompt_checksums = true;

    static PipelineConfig from_json_file(const std::string& path);
    static const std::vector<std::string>& known_keys();
    void set(const std::string& key, const nlohmann::json& value);
    void set_from_string(const std::string& key, const std::string& value);
    void validate() const;
};

struct StageTiming {
    std::string stage;
    double seconds = 0.0;
};

struct PipelineResult {
    MetricReport report;
    std::map<std::uint32_t, double> retrieval_hits;  // over the same test pairs
    std::size_t retrieval_k_used = 0;
    std::vector<AlignmentDecision> decisions;             // sorted by source id
    std::vector<DebateTranscript> transcripts;            // debated entities only
    std::map<std::uint64_t, CandidateSet> candidates;
    std::map<std::uint64_t, std::vector<std::uint64_t>> final_rankings;
    std::size_t uncertain_count = 0;
    std::size_t forwarded_count = 0;
    CostReport cost;
    std::vector<StageTiming> timings;  // informational; kept out of report.json
};

struct PipelineInputs {
    const KnowledgeGraph* source_graph = nullptr;
    const KnowledgeGraph* target_graph = nullptr;
    const EmbeddingStore* source_emb = nullptr;
    const EmbeddingStore* target_emb = nullptr;
    const SeedPairs* seeds = nullptr;
    const std::vector<std::pair<std::uint64_t, std::uint64_t>>* test_pairs = nullptr;
};

// Retrieval -> partition -> verification -> deep debate -> decisions ->
// metrics, entirely in memory.
PipelineResult run_pipeline(const PipelineInputs& inputs, const PipelineConfig& cfg);

// File-based variant: loads the graphs, pairs and embeddings named in the
// config, runs the pipeline, and writes all artifacts into cfg.out_dir.
PipelineResult run_pipeline_files(const PipelineConfig& cfg);

// Deterministic report body (no wall-clock content).
nlohmann::ordered_json report_json(const PipelineResult& result, const PipelineConfig& cfg);

// decisions.tsv, transcripts.jsonl, candidates.jsonl, report.json plus the
// non-deterministic timings.json.
void write_pipeline_artifacts(const PipelineResult& result, const PipelineConfig& cfg);

} // namespace kgalign
