#pragma once

#include "kgalign/backend.hpp"
#include "kgalign/kg.hpp"
#include "kgalign/prompts.hpp"
#include "kgalign/retrieval.hpp"
#include "kgalign/verdict.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace kgalign {

struct DebateConfig {
    double delta1 = 0.05;   // uncertainty threshold, shared with the termination gap
    double delta2 = 0.5;    // expansion threshold on the current top-1 score
    int max_rounds = 3;     // n
    std::vector<int> ladder = {5, 10, 15, 20};
    double w_sim = 0.3;
    double w_agents = 0.7;
    double compression_budget = 0.15;
    double ldv_confidence_floor = 0.6;
    int agent_retries = 2;  // re-calls after unparseable output

    void validate() const;
};

struct FrequencyTable {
    std::map<std::string, std::uint64_t> attribute_keys;
    std::map<std::string, std::uint64_t> relation_labels;
};

FrequencyTable build_frequency_table(const KnowledgeGraph& g);

struct CompressedProfile {
    std::uint64_t id = 0;
    std::string name;
    std::vector<std::pair<std::string, std::string>> kept_attributes;
    std::vector<std::pair<std::string, std::string>> kept_relations;
    std::uint64_t token_estimate = 0;
    std::uint64_t original_token_estimate = 0;
};

// Keeps the corpus-frequent attributes/relations until the token budget
// (compression_budget x original estimate, floor 32 tokens) is reached.
// The name is always kept.
CompressedProfile compress_profile(const Profile& profile, const FrequencyTable& corpus_stats,
                                   const DebateConfig& cfg);

ProfileText to_profile_text(const Profile& p);
ProfileText to_profile_text(const CompressedProfile& p);

// Supplies rendered entity descriptions to the debate stages: compressed for
// verification, original for the deep rounds.
class ProfileProvider {
public:
    virtual ~ProfileProvider() = default;
    virtual ProfileText ldv_profile(EntityId e) const = 0;
    virtual ProfileText dda_profile(EntityId e) const = 0;
};

class GraphProfileProvider : public ProfileProvider {
public:
    GraphProfileProvider(const KnowledgeGraph& source_graph, const KnowledgeGraph& target_graph,
                         const DebateConfig& cfg);
    ProfileText ldv_profile(EntityId e) const override;
    ProfileText dda_profile(EntityId e) const override;

private:
    const KnowledgeGraph& graph(Side side) const;
    const KnowledgeGraph& source_graph_;
    const KnowledgeGraph& target_graph_;
    DebateConfig cfg_;
    FrequencyTable stats_source_;
    FrequencyTable stats_target_;
};

struct LdvAgents {
    std::shared_ptr<AgentBackend> proponent;
    std::shared_ptr<AgentBackend> opponent;
    std::shared_ptr<AgentBackend> referee;
};

struct DdaAgents {
    std::shared_ptr<AgentBackend> alias;
    std::shared_ptr<AgentBackend> type;
    std::shared_ptr<AgentBackend> attribute;
    std::shared_ptr<AgentBackend> neighborhood;
    std::shared_ptr<AgentBackend> attack;
    std::shared_ptr<AgentBackend> judge;
};

struct LdvRecord {
    bool ran = false;
    std::vector<AgentVerdict> proponent;
    std::vector<AgentVerdict> opponent;
    std::vector<AgentVerdict> referee;
    std::optional<std::uint64_t> proponent_top;
    std::optional<std::uint64_t> opponent_top;
    std::optional<std::uint64_t> referee_top;
    double referee_top_score = 0.0;
    bool forwarded = false;
    std::vector<std::string> events;
    TokenUsage usage;
};

struct LdvResult {
    CandidateSet reranked;
    bool forwarded = false;
    LdvRecord record;
};

struct RoundRecord {
    int round = 1;
    int subset_k = 0;  // effective subset size this round
    std::vector<AgentVerdict> specialist_verdicts;
    std::vector<AttackVerdict> attack_verdicts;
    JudgeVerdict judge;
    std::map<std::uint64_t, double> aggregate;  // candidate -> total score
    int v = 0;        // non-abstain specialist verdicts on the aggregate top-1
    int v_agree = 0;  // align=true among them
    bool expanded = false;
    bool terminated = false;
    std::vector<std::string> events;
    TokenUsage usage;
};

struct DebateTranscript {
    std::uint64_t source = 0;
    std::optional<LdvRecord> ldv;
    std::vector<RoundRecord> rounds;
    AlignmentDecision decision;
    bool degraded = false;  // backend failures forced a fallback decision
    TokenUsage usage;
    std::vector<std::string> events;
};

// Single-round three-agent verification: the referee's scores rerank the
// candidate set; disagreement or low referee confidence forwards the entity
// to the deep stage.
LdvResult run_ldv(EntityId e, const CandidateSet& cs, const LdvAgents& agents,
                  const ProfileProvider& profiles, const DebateConfig& cfg,
                  const PromptLibrary& lib = PromptLibrary::builtin());

// Expansion predicate: s1 < delta2  AND  v_agree/v <= 0.5  AND  judge false.
// v == 0 satisfies the vote clause vacuously. Never true at the last rung.
bool should_expand(const RoundRecord& state, const DebateConfig& cfg);

// Termination: ((gap > delta1 OR v_agree/v > 0.5) AND judge true) OR round = n.
// The gap is taken over the round's aggregate scores; v == 0 leaves the vote
// clause unsatisfied.
bool should_terminate(const RoundRecord& state, const DebateConfig& cfg);

// total(c) = w_sim*prior(c) + w_agents*mean(non-abstain specialist scores)
//            - penalty(c) + sum(judge deltas). Candidates without usable
// specialist scores fall back to the prior for the agent term.
std::map<std::uint64_t, double> aggregate_scores(const std::vector<AgentVerdict>& verdicts,
                                                 const std::vector<AttackVerdict>& attacks,
                                                 const JudgeVerdict& judge,
                                                 const std::map<std::uint64_t, double>& sim_prior,
                                                 const DebateConfig& cfg,
                                                 std::vector<std::string>* events = nullptr);

// Multi-round six-role debate with progressive candidate expansion.
DebateTranscript run_dda(EntityId e, const CandidateSet& cs, const DdaAgents& agents,
                         const ProfileProvider& profiles, const DebateConfig& cfg,
                         const PromptLibrary& lib = PromptLibrary::builtin());

nlohmann::ordered_json transcript_to_json(const DebateTranscript& t);
void write_transcripts_jsonl(const std::vector<DebateTranscript>& transcripts,
                             const std::string& path);

} // namespace kgalign
