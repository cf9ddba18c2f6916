#include "kgalign/debate.hpp"

#include "kgalign/error.hpp"
#include "kgalign/tokens.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>

namespace kgalign {

void DebateConfig::validate() const {
    if (max_rounds < 1) {
        throw_config("debate rounds must be >= 1");
    }
    if (ladder.empty()) {
        throw_config("candidate ladder must not be empty");
    }
    for (std::size_t i = 0; i < ladder.size(); ++i) {
        if (ladder[i] < 1 || (i > 0 && ladder[i] <= ladder[i - 1])) {
            throw_config("candidate ladder must be strictly increasing and positive");
        }
    }
    if (compression_budget <= 0.0 || compression_budget > 1.0) {
        throw_config("compression budget must lie in (0, 1]");
    }
    if (delta1 < 0.0) {
        throw_config("delta1 must be non-negative");
    }
    if (agent_retries < 0) {
        throw_config("agent retries must be non-negative");
    }
}

FrequencyTable build_frequency_table(const KnowledgeGraph& g) {
    FrequencyTable t;
    for (const auto& a : g.attribute_triples()) {
        t.attribute_keys[a.key] += 1;
    }
    for (const auto& r : g.relation_triples()) {
        t.relation_labels[r.relation] += 1;
    }
    return t;
}

namespace {

constexpr std::uint64_t kBudgetFloorTokens = 32;

std::uint64_t item_words(const std::pair<std::string, std::string>& item, bool attribute) {
    // Mirrors the rendered fragments "key: value" / "relation|name".
    if (attribute) {
        return word_count(item.first + ": " + item.second);
    }
    return word_count(item.first + "|" + item.second);
}

} // namespace

CompressedProfile compress_profile(const Profile& profile, const FrequencyTable& corpus_stats,
                                   const DebateConfig& cfg) {
    CompressedProfile out;
    out.id = profile.id;
    out.name = profile.name;

    // "Name: <name>" plus the two section headers.
    std::uint64_t base_words = word_count("Name: " + profile.name) + 2;

    struct Item {
        bool attribute;
        std::size_t index;
        std::uint64_t freq;
        std::uint64_t words;
    };
    std::vector<Item> items;
    items.reserve(profile.attributes.size() + profile.relations.size());
    std::uint64_t total_words = base_words;
    for (std::size_t i = 0; i < profile.attributes.size(); ++i) {
        auto freq_it = corpus_stats.attribute_keys.find(profile.attributes[i].first);
        std::uint64_t freq = freq_it == corpus_stats.attribute_keys.end() ? 0 : freq_it->second;
        std::uint64_t words = item_words(profile.attributes[i], true);
        items.push_back({true, i, freq, words});
        total_words += words;
    }
    for (std::size_t i = 0; i < profile.relations.size(); ++i) {
        auto freq_it = corpus_stats.relation_labels.find(profile.relations[i].first);
        std::uint64_t freq = freq_it == corpus_stats.relation_labels.end() ? 0 : freq_it->second;
        std::uint64_t words = item_words(profile.relations[i], false);
        items.push_back({false, i, freq, words});
        total_words += words;
    }

    out.original_token_estimate = estimate_tokens_from_words(total_words);
    double budget = std::max(static_cast<double>(kBudgetFloorTokens),
                             cfg.compression_budget *
                                 static_cast<double>(out.original_token_estimate));

    // Descending corpus frequency; attributes before relations on ties, then
    // the profile's own sorted order.
    std::stable_sort(items.begin(), items.end(), [&](const Item& a, const Item& b) {
        if (a.freq != b.freq) return a.freq > b.freq;
        if (a.attribute != b.attribute) return a.attribute;
        return a.index < b.index;
    });

    std::uint64_t kept_words = base_words;
    std::vector<std::size_t> kept_attr_idx;
    std::vector<std::size_t> kept_rel_idx;
    for (const auto& item : items) {
        double projected =
            static_cast<double>(estimate_tokens_from_words(kept_words + item.words));
        if (projected > budget) {
            break;
        }
        kept_words += item.words;
        (item.attribute ? kept_attr_idx : kept_rel_idx).push_back(item.index);
    }
    std::sort(kept_attr_idx.begin(), kept_attr_idx.end());
    std::sort(kept_rel_idx.begin(), kept_rel_idx.end());
    for (std::size_t i : kept_attr_idx) out.kept_attributes.push_back(profile.attributes[i]);
    for (std::size_t i : kept_rel_idx) out.kept_relations.push_back(profile.relations[i]);
    out.token_estimate = estimate_tokens_from_words(kept_words);
    return out;
}

namespace {

std::string join_attributes(const std::vector<std::pair<std::string, std::string>>& attrs) {
    std::string s;
    for (std::size_t i = 0; i < attrs.size(); ++i) {
        if (i) s += "; ";
        s += attrs[i].first + ": " + attrs[i].second;
    }
    return s;
}

std::string join_relations(const std::vector<std::pair<std::string, std::string>>& rels) {
    std::string s;
    for (std::size_t i = 0; i < rels.size(); ++i) {
        if (i) s += "; ";
        s += rels[i].first + "|" + rels[i].second;
    }
    return s;
}

} // namespace

ProfileText to_profile_text(const Profile& p) {
    return {p.id, p.name, join_attributes(p.attributes), join_relations(p.relations)};
}

ProfileText to_profile_text(const CompressedProfile& p) {
    return {p.id, p.name, join_attributes(p.kept_attributes), join_relations(p.kept_relations)};
}

GraphProfileProvider::GraphProfileProvider(const KnowledgeGraph& source_graph,
                                           const KnowledgeGraph& target_graph,
                                           const DebateConfig& cfg)
    : source_graph_(source_graph),
      target_graph_(target_graph),
      cfg_(cfg),
      stats_source_(build_frequency_table(source_graph)),
      stats_target_(build_frequency_table(target_graph)) {}

const KnowledgeGraph& GraphProfileProvider::graph(Side side) const {
    return side == Side::Source ? source_graph_ : target_graph_;
}

ProfileText GraphProfileProvider::ldv_profile(EntityId e) const {
    const auto& stats = e.side == Side::Source ? stats_source_ : stats_target_;
    return to_profile_text(compress_profile(graph(e.side).entity_profile(e), stats, cfg_));
}

ProfileText GraphProfileProvider::dda_profile(EntityId e) const {
    return to_profile_text(graph(e.side).entity_profile(e));
}

namespace {

struct AgentCallResult {
    ParsedVerdicts parsed;
    std::string raw_text;
    TokenUsage usage;
    bool backend_failed = false;
    std::vector<std::string> events;
};

// One agent interaction: backend call plus parse, re-calling after
// unparseable output up to cfg.agent_retries, then substituting abstain.
AgentCallResult call_and_parse(AgentBackend& backend, const std::string& prompt,
                               const std::vector<std::uint64_t>& expected, Role role,
                               int retries) {
    AgentCallResult result;
    for (int attempt = 0; attempt <= retries; ++attempt) {
        RawAgentOutput raw;
        try {
            raw = backend.call(prompt);
        } catch (const Error& e) {
            result.backend_failed = true;
            result.events.push_back(std::string(role_name(role)) +
                                    " backend failure: " + e.what());
            result.parsed = abstain_fill(expected, role);
            return result;
        }
        result.usage.prompt_tokens += raw.usage.prompt_tokens;
        result.usage.completion_tokens += raw.usage.completion_tokens;
        ParsedVerdicts parsed = parse_verdicts(raw.text, expected, role);
        if (parsed.ok) {
            result.parsed = std::move(parsed);
            result.raw_text = std::move(raw.text);
            for (const auto& w : result.parsed.warnings) {
                result.events.push_back(std::string(role_name(role)) + ": " + w);
            }
            return result;
        }
        result.events.push_back(std::string(role_name(role)) + " parse failure (attempt " +
                                std::to_string(attempt + 1) + "): " + parsed.error);
    }
    result.parsed = abstain_fill(expected, role);
    result.events.push_back(std::string(role_name(role)) +
                            " output unusable after retries; substituted abstain");
    return result;
}

std::optional<std::uint64_t> top_by_score(const std::vector<AgentVerdict>& verdicts) {
    std::optional<std::uint64_t> best_id;
    double best = 0.0;
    for (const auto& v : verdicts) {
        if (!v.score) continue;
        if (!best_id || *v.score > best || (*v.score == best && v.candidate < *best_id)) {
            best_id = v.candidate;
            best = *v.score;
        }
    }
    return best_id;
}

std::string format_score(double v) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(6) << v;
    return os.str();
}

} // namespace

LdvResult run_ldv(EntityId e, const CandidateSet& cs, const LdvAgents& agents,
                  const ProfileProvider& profiles, const DebateConfig& cfg,
                  const PromptLibrary& lib) {
    cfg.validate();
    if (cs.candidates.empty()) {
        throw_data("run_ldv: empty candidate set for source " + std::to_string(e.value));
    }

    LdvResult result;
    result.record.ran = true;

    PromptContext ctx;
    ctx.source = profiles.ldv_profile(e);
    std::vector<std::uint64_t> ids;
    for (const auto& c : cs.candidates) {
        ctx.candidates.push_back(profiles.ldv_profile(c.target));
        ids.push_back(c.target.value);
    }
    std::sort(ids.begin(), ids.end());

    auto run_role = [&](Role role, AgentBackend& backend,
                        PromptContext role_ctx) -> AgentCallResult {
        std::string prompt = render_prompt(lib, role, role_ctx);
        auto r = call_and_parse(backend, prompt, ids, role, cfg.agent_retries);
        result.record.usage.prompt_tokens += r.usage.prompt_tokens;
        result.record.usage.completion_tokens += r.usage.completion_tokens;
        for (auto& ev : r.events) result.record.events.push_back(std::move(ev));
        return r;
    };

    auto proponent = run_role(Role::Proponent, *agents.proponent, ctx);
    auto opponent = run_role(Role::Opponent, *agents.opponent, ctx);

    PromptContext referee_ctx = ctx;
    referee_ctx.proponent_output =
        proponent.backend_failed ? "(unavailable)" : proponent.raw_text;
    referee_ctx.opponent_output = opponent.backend_failed ? "(unavailable)" : opponent.raw_text;
    auto referee = run_role(Role::Referee, *agents.referee, referee_ctx);

    result.record.proponent = proponent.parsed.agents;
    result.record.opponent = opponent.parsed.agents;
    result.record.referee = referee.parsed.agents;

    if (proponent.backend_failed && opponent.backend_failed && referee.backend_failed) {
        // Nothing usable: forward with the original ordering.
        result.record.events.push_back("all verification agents failed; force-forwarded");
        result.record.forwarded = true;
        result.forwarded = true;
        result.reranked = cs;
        return result;
    }

    std::map<std::uint64_t, std::optional<double>> referee_score;
    for (const auto& v : referee.parsed.agents) {
        referee_score[v.candidate] = v.score;
    }

    result.reranked = cs;
    result.reranked.created_from = CandidateOrigin::LdvRerank;
    for (auto& c : result.reranked.candidates) {
        auto it = referee_score.find(c.target.value);
        c.ldv_score = it == referee_score.end() ? std::nullopt : it->second;
    }
    std::stable_sort(result.reranked.candidates.begin(), result.reranked.candidates.end(),
                     [](const Candidate& a, const Candidate& b) {
                         double ra = a.ldv_score.value_or(0.0);
                         double rb = b.ldv_score.value_or(0.0);
                         if (ra != rb) return ra > rb;
                         if (a.score != b.score) return a.score > b.score;
                         return a.target.value < b.target.value;
                     });

    std::uint64_t embedding_top = cs.candidates.front().target.value;
    std::uint64_t referee_top = result.reranked.candidates.front().target.value;
    double referee_top_score =
        result.reranked.candidates.front().ldv_score.value_or(0.0);
    auto proponent_top = top_by_score(proponent.parsed.agents);
    auto opponent_top = top_by_score(opponent.parsed.agents);

    result.record.referee_top = referee_top;
    result.record.referee_top_score = referee_top_score;
    result.record.proponent_top = proponent_top;
    result.record.opponent_top = opponent_top;

    bool disagreement = referee_top != embedding_top ||
                        (proponent_top && *proponent_top != referee_top) ||
                        (proponent_top && opponent_top && *proponent_top != *opponent_top);
    bool low_confidence = referee_top_score < cfg.ldv_confidence_floor;
    result.record.forwarded = disagreement || low_confidence;
    result.forwarded = result.record.forwarded;
    return result;
}

bool should_expand(const RoundRecord& state, const DebateConfig& cfg) {
    if (!cfg.ladder.empty() && state.subset_k >= cfg.ladder.back()) {
        return false;
    }
    if (state.aggregate.empty()) {
        return false;
    }
    double s1 = -std::numeric_limits<double>::infinity();
    for (const auto& [_, score] : state.aggregate) {
        s1 = std::max(s1, score);
    }
    bool vote_clause = state.v == 0 ||
                       static_cast<double>(state.v_agree) / static_cast<double>(state.v) <= 0.5;
    return s1 < cfg.delta2 && vote_clause && !state.judge.verdict_flag;
}

bool should_terminate(const RoundRecord& state, const DebateConfig& cfg) {
    if (state.round >= cfg.max_rounds) {
        return true;
    }
    double s1 = -std::numeric_limits<double>::infinity();
    double s2 = -std::numeric_limits<double>::infinity();
    for (const auto& [_, score] : state.aggregate) {
        if (score > s1) {
            s2 = s1;
            s1 = score;
        } else if (score > s2) {
            s2 = score;
        }
    }
    // A single-candidate subset has nothing to confuse; treat the gap as open.
    double gap_value = state.aggregate.size() < 2 ? std::numeric_limits<double>::infinity()
                                                  : s1 - s2;
    bool vote_clause = state.v > 0 &&
                       static_cast<double>(state.v_agree) / static_cast<double>(state.v) > 0.5;
    return (gap_value > cfg.delta1 || vote_clause) && state.judge.verdict_flag;
}

std::map<std::uint64_t, double> aggregate_scores(const std::vector<AgentVerdict>& verdicts,
                                                 const std::vector<AttackVerdict>& attacks,
                                                 const JudgeVerdict& judge,
                                                 const std::map<std::uint64_t, double>& sim_prior,
                                                 const DebateConfig& cfg,
                                                 std::vector<std::string>* events) {
    auto log = [&](const std::string& msg) {
        if (events) events->push_back(msg);
    };

    std::map<std::uint64_t, std::pair<double, int>> score_sums;  // candidate -> (sum, count)
    for (const auto& v : verdicts) {
        if (!sim_prior.count(v.candidate)) {
            log("verdict for unknown candidate " + std::to_string(v.candidate) + " rejected");
            continue;
        }
        if (v.align == Align::Abstain || !v.score) {
            continue;
        }
        auto& [sum, count] = score_sums[v.candidate];
        sum += *v.score;
        count += 1;
    }

    std::map<std::uint64_t, double> penalty;
    for (const auto& a : attacks) {
        if (!sim_prior.count(a.candidate)) {
            log("attack verdict for unknown candidate " + std::to_string(a.candidate) +
                " rejected");
            continue;
        }
        penalty[a.candidate] += a.penalty;
    }

    std::map<std::uint64_t, double> deltas;
    for (const auto& adj : judge.adjustments) {
        if (!sim_prior.count(adj.candidate)) {
            log("judge adjustment for unknown candidate " + std::to_string(adj.candidate) +
                " rejected");
            continue;
        }
        deltas[adj.candidate] += std::clamp(adj.delta, -0.2, 0.2);
    }

    std::map<std::uint64_t, double> totals;
    for (const auto& [candidate, prior] : sim_prior) {
        double agent_term = prior;
        if (auto it = score_sums.find(candidate); it != score_sums.end() && it->second.second > 0) {
            agent_term = it->second.first / static_cast<double>(it->second.second);
        }
        double p = penalty.count(candidate) ? penalty.at(candidate) : 0.0;
        double d = deltas.count(candidate) ? deltas.at(candidate) : 0.0;
        totals[candidate] = cfg.w_sim * prior + cfg.w_agents * agent_term - p + d;
    }
    return totals;
}

namespace {

std::uint64_t aggregate_top1(const std::map<std::uint64_t, double>& totals) {
    std::uint64_t best_id = totals.begin()->first;
    double best = totals.begin()->second;
    for (const auto& [id, score] : totals) {
        if (score > best) {
            best = score;
            best_id = id;
        }
    }
    return best_id;  // map iteration is ascending, so ties keep the lowest id
}

void compute_votes(RoundRecord& rec) {
    if (rec.aggregate.empty()) {
        rec.v = 0;
        rec.v_agree = 0;
        return;
    }
    std::uint64_t top1 = aggregate_top1(rec.aggregate);
    rec.v = 0;
    rec.v_agree = 0;
    for (const auto& v : rec.specialist_verdicts) {
        if (v.candidate != top1 || v.align == Align::Abstain) continue;
        rec.v += 1;
        if (v.align == Align::True) rec.v_agree += 1;
    }
}

nlohmann::ordered_json verdict_json(const AgentVerdict& v) {
    nlohmann::ordered_json j;
    j["role"] = role_name(v.role);
    j["candidate"] = v.candidate;
    if (v.score) {
        j["score"] = *v.score;
    } else {
        j["score"] = nullptr;
    }
    j["align"] = align_name(v.align);
    j["evidence"] = v.evidence;
    return j;
}

nlohmann::ordered_json attack_json(const AttackVerdict& v) {
    nlohmann::ordered_json j;
    j["candidate"] = v.candidate;
    j["issues"] = v.issues;
    j["evidence"] = v.evidence;
    j["penalty"] = v.penalty;
    return j;
}

nlohmann::ordered_json judge_json(const JudgeVerdict& v) {
    nlohmann::ordered_json j;
    if (v.endorse) {
        j["endorse"] = *v.endorse;
    } else {
        j["endorse"] = nullptr;
    }
    auto arr = nlohmann::ordered_json::array();
    for (const auto& adj : v.adjustments) {
        arr.push_back({{"candidate", adj.candidate}, {"delta", adj.delta}, {"note", adj.note}});
    }
    j["adjustments"] = std::move(arr);
    j["verdict"] = v.verdict_flag;
    return j;
}

nlohmann::ordered_json round_json(const RoundRecord& r) {
    nlohmann::ordered_json j;
    j["round"] = r.round;
    j["subset_k"] = r.subset_k;
    auto specialists = nlohmann::ordered_json::array();
    for (const auto& v : r.specialist_verdicts) specialists.push_back(verdict_json(v));
    j["specialists"] = std::move(specialists);
    auto attacks = nlohmann::ordered_json::array();
    for (const auto& v : r.attack_verdicts) attacks.push_back(attack_json(v));
    j["attack"] = std::move(attacks);
    j["judge"] = judge_json(r.judge);
    nlohmann::ordered_json agg = nlohmann::ordered_json::object();
    for (const auto& [id, score] : r.aggregate) {
        agg[std::to_string(id)] = score;
    }
    j["aggregate"] = std::move(agg);
    j["v"] = r.v;
    j["v_agree"] = r.v_agree;
    j["expanded"] = r.expanded;
    j["terminated"] = r.terminated;
    j["events"] = r.events;
    j["tokens"] = {{"prompt", r.usage.prompt_tokens}, {"completion", r.usage.completion_tokens}};
    return j;
}

// Serialized view of a finished round handed to the next round's agents.
std::string round_outputs_text(const RoundRecord& r) {
    return round_json(r).dump();
}

} // namespace

DebateTranscript run_dda(EntityId e, const CandidateSet& cs, const DdaAgents& agents,
                         const ProfileProvider& profiles, const DebateConfig& cfg,
                         const PromptLibrary& lib) {
    cfg.validate();
    if (cs.candidates.empty()) {
        throw_data("run_dda: empty candidate set for source " + std::to_string(e.value));
    }

    DebateTranscript transcript;
    transcript.source = e.value;

    ProfileText source_profile = profiles.dda_profile(e);
    std::vector<ProfileText> candidate_profiles;
    candidate_profiles.reserve(cs.candidates.size());
    for (const auto& c : cs.candidates) {
        candidate_profiles.push_back(profiles.dda_profile(c.target));
    }

    std::size_t ladder_idx = 0;
    std::optional<std::string> prior_round_text;

    const std::array<std::pair<Role, AgentBackend*>, 4> specialists = {{
        {Role::Alias, agents.alias.get()},
        {Role::Type, agents.type.get()},
        {Role::Attribute, agents.attribute.get()},
        {Role::Neighborhood, agents.neighborhood.get()},
    }};

    for (int round = 1; round <= cfg.max_rounds; ++round) {
        std::size_t rung = static_cast<std::size_t>(cfg.ladder[ladder_idx]);
        std::size_t subset_size = std::min(rung, cs.candidates.size());

        RoundRecord rec;
        rec.round = round;
        rec.subset_k = static_cast<int>(subset_size);

        PromptContext ctx;
        ctx.source = source_profile;
        ctx.round = round;
        ctx.prior_round_outputs = prior_round_text;
        std::vector<std::uint64_t> subset_ids;
        std::map<std::uint64_t, double> sim_prior;
        for (std::size_t i = 0; i < subset_size; ++i) {
            ctx.candidates.push_back(candidate_profiles[i]);
            subset_ids.push_back(cs.candidates[i].target.value);
            sim_prior[cs.candidates[i].target.value] = cs.candidates[i].score;
        }
        std::sort(subset_ids.begin(), subset_ids.end());

        int backend_failures = 0;
        std::string current_outputs;

        auto track = [&](Role role, const AgentCallResult& r) {
            rec.usage.prompt_tokens += r.usage.prompt_tokens;
            rec.usage.completion_tokens += r.usage.completion_tokens;
            for (const auto& ev : r.events) rec.events.push_back(ev);
            if (r.backend_failed) ++backend_failures;
            current_outputs += std::string(role_name(role)) + ": " +
                               (r.backend_failed ? "(unavailable)" : r.raw_text) + "\n";
        };

        for (const auto& [role, backend] : specialists) {
            std::string prompt = render_prompt(lib, role, ctx);
            auto r = call_and_parse(*backend, prompt, subset_ids, role, cfg.agent_retries);
            track(role, r);
            for (auto& v : r.parsed.agents) rec.specialist_verdicts.push_back(std::move(v));
        }

        {
            std::string prompt = render_prompt(lib, Role::Attack, ctx);
            auto r = call_and_parse(*agents.attack, prompt, subset_ids, Role::Attack,
                                    cfg.agent_retries);
            track(Role::Attack, r);
            rec.attack_verdicts = std::move(r.parsed.attacks);
        }

        {
            PromptContext judge_ctx = ctx;
            std::string priors_text;
            for (const auto& [id, prior] : sim_prior) {
                priors_text += "candidate " + std::to_string(id) + ": " + format_score(prior) +
                               "\n";
            }
            judge_ctx.sim_priors = priors_text;
            judge_ctx.current_round_outputs = current_outputs;
            std::string prompt = render_prompt(lib, Role::Judge, judge_ctx);
            auto r = call_and_parse(*agents.judge, prompt, subset_ids, Role::Judge,
                                    cfg.agent_retries);
            track(Role::Judge, r);
            if (r.parsed.judge) {
                rec.judge = *r.parsed.judge;
            }
        }

        rec.aggregate = aggregate_scores(rec.specialist_verdicts, rec.attack_verdicts, rec.judge,
                                         sim_prior, cfg, &rec.events);
        compute_votes(rec);

        bool all_failed = backend_failures == 6;
        if (all_failed) {
            transcript.degraded = true;
            rec.events.push_back("all agents failed this round; falling back to aggregate top-1");
        }

        bool terminated = all_failed || should_terminate(rec, cfg);
        rec.terminated = terminated;
        if (!terminated) {
            bool can_advance =
                ladder_idx + 1 < cfg.ladder.size() && subset_size < cs.candidates.size();
            rec.expanded = should_expand(rec, cfg) && can_advance;
            if (rec.expanded) {
                ++ladder_idx;
            }
        }

        transcript.usage.prompt_tokens += rec.usage.prompt_tokens;
        transcript.usage.completion_tokens += rec.usage.completion_tokens;

        if (terminated) {
            std::uint64_t winner = aggregate_top1(rec.aggregate);
            // Judge endorsement breaks exact score ties.
            if (rec.judge.endorse && rec.aggregate.count(*rec.judge.endorse) &&
                rec.aggregate.at(*rec.judge.endorse) == rec.aggregate.at(winner)) {
                winner = *rec.judge.endorse;
            }
            transcript.decision.source = e;
            transcript.decision.target = {winner, cs.candidates.front().target.side};
            transcript.decision.score = rec.aggregate.at(winner);
            transcript.decision.provenance = Provenance::Dda;
            transcript.decision.dda_round = round;
            transcript.rounds.push_back(std::move(rec));
            break;
        }

        prior_round_text = round_outputs_text(rec);
        transcript.rounds.push_back(std::move(rec));
    }

    return transcript;
}

nlohmann::ordered_json transcript_to_json(const DebateTranscript& t) {
    nlohmann::ordered_json j;
    j["schema_version"] = 1;
    j["source"] = t.source;
    if (t.ldv) {
        nlohmann::ordered_json l;
        l["ran"] = t.ldv->ran;
        auto dump_verdicts = [](const std::vector<AgentVerdict>& vs) {
            auto arr = nlohmann::ordered_json::array();
            for (const auto& v : vs) arr.push_back(verdict_json(v));
            return arr;
        };
        l["proponent"] = dump_verdicts(t.ldv->proponent);
        l["opponent"] = dump_verdicts(t.ldv->opponent);
        l["referee"] = dump_verdicts(t.ldv->referee);
        l["referee_top"] = t.ldv->referee_top ? nlohmann::ordered_json(*t.ldv->referee_top)
                                              : nlohmann::ordered_json(nullptr);
        l["referee_top_score"] = t.ldv->referee_top_score;
        l["forwarded"] = t.ldv->forwarded;
        l["events"] = t.ldv->events;
        l["tokens"] = {{"prompt", t.ldv->usage.prompt_tokens},
                       {"completion", t.ldv->usage.completion_tokens}};
        j["ldv"] = std::move(l);
    } else {
        j["ldv"] = nullptr;
    }
    auto rounds = nlohmann::ordered_json::array();
    for (const auto& r : t.rounds) rounds.push_back(round_json(r));
    j["rounds"] = std::move(rounds);
    j["decision"] = {{"source", t.decision.source.value},
                     {"target", t.decision.target.value},
                     {"score", t.decision.score},
                     {"provenance", t.decision.provenance_string()}};
    j["degraded"] = t.degraded;
    j["tokens"] = {{"prompt", t.usage.prompt_tokens}, {"completion", t.usage.completion_tokens}};
    j["events"] = t.events;
    return j;
}

void write_transcripts_jsonl(const std::vector<DebateTranscript>& transcripts,
                             const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw_data("cannot write transcript file: " + path);
    }
    for (const auto& t : transcripts) {
        out << transcript_to_json(t).dump() << '\n';
    }
}

} // namespace kgalign
