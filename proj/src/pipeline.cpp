#include "kgalign/pipeline.hpp"

#include "kgalign/error.hpp"
#include "kgalign/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace kgalign {

namespace {

using nlohmann::json;

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

BackendKind parse_backend_kind(const std::string& s) {
    if (s == "http") return BackendKind::Http;
    if (s == "scripted") return BackendKind::Scripted;
    if (s == "oracle") return BackendKind::Oracle;
    throw_config("unknown backend kind: " + s);
}

} // namespace

const std::vector<std::string>& PipelineConfig::known_keys() {
    static const std::vector<std::string> keys = {
        "data.ent1", "data.ent2", "data.rel1", "data.rel2", "data.attr1", "data.attr2",
        "data.seeds", "data.test", "data.emb1", "data.emb2", "data.emb_format",
        "data.dataset_names",
        "similarity.metric", "similarity.csls_k", "similarity.normalize",
        "retrieval.k", "retrieval.delta1",
        "debate.delta1", "debate.delta2", "debate.rounds", "debate.ladder", "debate.w_sim",
        "debate.w_agents", "debate.compression_budget", "debate.ldv_confidence_floor",
        "debate.agent_retries",
        "corpus.name_similarity_floor",
        "backend.kind", "backend.endpoint", "backend.model", "backend.temperature",
        "backend.retries", "backend.timeout_ms", "backend.max_inflight", "backend.api_key_env",
        "backend.fixtures", "backend.default_response",
        "run.mode", "run.out", "run.workers", "run.eval_ks",
        "prompts.dir", "prompts.verify_checksums",
    };
    return keys;
}

void PipelineConfig::set(const std::string& key, const json& value) {
    try {
        if (key == "data.ent1") ent1 = value.get<std::string>();
        else if (key == "data.ent2") ent2 = value.get<std::string>();
        else if (key == "data.rel1") rel1 = value.get<std::string>();
        else if (key == "data.rel2") rel2 = value.get<std::string>();
        else if (key == "data.attr1") attr1 = value.get<std::string>();
        else if (key == "data.attr2") attr2 = value.get<std::string>();
        else if (key == "data.seeds") seeds_path = value.get<std::string>();
        else if (key == "data.test") test_path = value.get<std::string>();
        else if (key == "data.emb1") emb1 = value.get<std::string>();
        else if (key == "data.emb2") emb2 = value.get<std::string>();
        else if (key == "data.emb_format") emb_format = value.get<std::string>();
        else if (key == "data.dataset_names") {
            dataset_names = value.is_string() ? split_list(value.get<std::string>())
                                              : value.get<std::vector<std::string>>();
        } else if (key == "similarity.metric") {
            std::string m = value.get<std::string>();
            if (m == "cosine") similarity.metric = SimilarityMetric::Cosine;
            else if (m == "csls") similarity.metric = SimilarityMetric::Csls;
            else throw_config("unknown similarity metric: " + m);
        } else if (key == "similarity.csls_k") similarity.csls_k = value.get<int>();
        else if (key == "similarity.normalize") similarity.normalize = value.get<bool>();
        else if (key == "retrieval.k") retrieval_k = value.get<std::size_t>();
        else if (key == "retrieval.delta1" || key == "debate.delta1")
            debate.delta1 = value.get<double>();
        else if (key == "debate.delta2") debate.delta2 = value.get<double>();
        else if (key == "debate.rounds") debate.max_rounds = value.get<int>();
        else if (key == "debate.ladder") {
            if (value.is_string()) {
                debate.ladder.clear();
                for (const auto& item : split_list(value.get<std::string>())) {
                    debate.ladder.push_back(std::stoi(item));
                }
            } else {
                debate.ladder = value.get<std::vector<int>>();
            }
        } else if (key == "debate.w_sim") debate.w_sim = value.get<double>();
        else if (key == "debate.w_agents") debate.w_agents = value.get<double>();
        else if (key == "debate.compression_budget")
            debate.compression_budget = value.get<double>();
        else if (key == "debate.ldv_confidence_floor")
            debate.ldv_confidence_floor = value.get<double>();
        else if (key == "debate.agent_retries") debate.agent_retries = value.get<int>();
        else if (key == "corpus.name_similarity_floor")
            name_similarity_floor = value.get<double>();
        else if (key == "backend.kind") backend.kind = parse_backend_kind(value.get<std::string>());
        else if (key == "backend.endpoint") backend.endpoint = value.get<std::string>();
        else if (key == "backend.model") backend.model = value.get<std::string>();
        else if (key == "backend.temperature") backend.temperature = value.get<double>();
        else if (key == "backend.retries") backend.max_retries = value.get<int>();
        else if (key == "backend.timeout_ms") backend.timeout_ms = value.get<int>();
        else if (key == "backend.max_inflight") backend.max_inflight = value.get<int>();
        else if (key == "backend.api_key_env") backend.api_key_env = value.get<std::string>();
        else if (key == "backend.fixtures") backend.fixtures_path = value.get<std::string>();
        else if (key == "backend.default_response")
            backend.default_response = value.get<std::string>();
        else if (key == "run.mode") mode = value.get<std::string>();
        else if (key == "run.out") out_dir = value.get<std::string>();
        else if (key == "run.workers") workers = value.get<unsigned>();
        else if (key == "run.eval_ks") {
            if (value.is_string()) {
                eval_ks.clear();
                for (const auto& item : split_list(value.get<std::string>())) {
                    eval_ks.push_back(static_cast<std::uint32_t>(std::stoul(item)));
                }
            } else {
                eval_ks = value.get<std::vector<std::uint32_t>>();
            }
        } else if (key == "prompts.dir") prompts_dir = value.get<std::string>();
        else if (key == "prompts.verify_checksums")
            verify_prompt_checksums = value.get<bool>();
        else throw_config("unknown config key: " + key);
    } catch (const json::exception& e) {
        throw_config("bad value for config key " + key + ": " + e.what());
    }
}

void PipelineConfig::set_from_string(const std::string& key, const std::string& value) {
    json parsed = json::parse(value, nullptr, false);
    if (parsed.is_discarded() || parsed.is_object()) {
        set(key, json(value));
    } else {
        try {
            set(key, parsed);
        } catch (const Error&) {
            // e.g. bare words that parse as JSON but the key wants a string
            set(key, json(value));
        }
    }
}

PipelineConfig PipelineConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw_config("cannot open config file: " + path);
    }
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw_config("config file is not a JSON object: " + path);
    }
    PipelineConfig cfg;
    for (const auto& [key, value] : j.items()) {
        cfg.set(key, value);
    }
    return cfg;
}

void PipelineConfig::validate() const {
    if (mode != "offline" && mode != "live") {
        throw_config("run.mode must be 'offline' or 'live'");
    }
    if (mode == "live") {
        if (backend.kind != BackendKind::Http) {
            throw_config("live mode requires backend.kind=http");
        }
        if (backend.endpoint.empty()) {
            throw_config("live mode requires backend.endpoint");
        }
    } else if (backend.kind == BackendKind::Http) {
        throw_config("offline mode cannot use the http backend");
    }
    if (backend.kind == BackendKind::Scripted && backend.fixtures_path.empty() &&
        backend.default_response.empty()) {
        throw_config("scripted backend requires backend.fixtures or backend.default_response");
    }
    debate.validate();
    if (retrieval_k < 2) {
        throw_config("retrieval.k must be >= 2 (the uncertainty gap needs two candidates)");
    }
}

namespace {

class StageClock {
public:
    explicit StageClock(std::vector<StageTiming>& sink) : sink_(sink) {}

    template <typename Fn>
    auto time(const std::string& stage, Fn&& fn) {
        auto start = std::chrono::steady_clock::now();
        if constexpr (std::is_void_v<decltype(fn())>) {
            fn();
            record(stage, start);
        } else {
            auto result = fn();
            record(stage, start);
            return result;
        }
    }

private:
    void record(const std::string& stage, std::chrono::steady_clock::time_point start) {
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                          .count();
        sink_.push_back({stage, secs});
    }

    std::vector<StageTiming>& sink_;
};

struct EntityOutcome {
    DebateTranscript transcript;
    std::vector<std::uint64_t> ranking;
};

std::vector<std::uint64_t> ranking_from_candidates(const CandidateSet& cs) {
    std::vector<std::uint64_t> out;
    out.reserve(cs.candidates.size());
    for (const auto& c : cs.candidates) {
        out.push_back(c.target.value);
    }
    return out;
}

// Decided target first; the final round subset ordered by aggregate score;
// any candidates beyond the subset keep their verified order.
std::vector<std::uint64_t> ranking_from_debate(const CandidateSet& reranked,
                                               const DebateTranscript& t) {
    std::vector<std::uint64_t> out;
    out.push_back(t.decision.target.value);
    if (!t.rounds.empty()) {
        const auto& aggregate = t.rounds.back().aggregate;
        std::vector<std::pair<std::uint64_t, double>> scored(aggregate.begin(), aggregate.end());
        std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        for (const auto& [id, _] : scored) {
            if (id != t.decision.target.value) out.push_back(id);
        }
    }
    for (const auto& c : reranked.candidates) {
        if (std::find(out.begin(), out.end(), c.target.value) == out.end()) {
            out.push_back(c.target.value);
        }
    }
    return out;
}

std::uint32_t rank_of(const std::vector<std::uint64_t>& ranking, std::uint64_t truth) {
    for (std::size_t i = 0; i < ranking.size(); ++i) {
        if (ranking[i] == truth) {
            return static_cast<std::uint32_t>(i + 1);
        }
    }
    return RankList::kUnranked;
}

} // namespace

PipelineResult run_pipeline(const PipelineInputs& in, const PipelineConfig& cfg) {
    cfg.validate();
    if (!in.source_graph || !in.target_graph || !in.source_emb || !in.target_emb || !in.seeds ||
        !in.test_pairs) {
        throw Error(ErrorKind::Internal, "run_pipeline: incomplete inputs");
    }

    PipelineResult result;
    StageClock clock(result.timings);

    Matrix scores = clock.time("similarity", [&] {
        Matrix m = cfg.similarity.metric == SimilarityMetric::Csls
                       ? csls_matrix(*in.source_emb, *in.target_emb, cfg.similarity, cfg.workers)
                       : cosine_matrix(*in.source_emb, *in.target_emb, cfg.workers);
        if (cfg.similarity.normalize) {
            minmax_normalize_rows(m);
        }
        return m;
    });

    std::size_t k_used = std::min(cfg.retrieval_k, in.target_emb->size());
    result.retrieval_k_used = k_used;
    result.candidates = clock.time("retrieval", [&] {
        return build_candidates(in.source_emb->entity_ids(), in.target_emb->entity_ids(), scores,
                                k_used);
    });

    UncertainSet uncertain = build_uncertain(result.candidates, cfg.debate.delta1);
    result.uncertain_count = uncertain.members.size();
    std::vector<AlignmentDecision> decisions = direct_decisions(result.candidates, uncertain);
    for (const auto& d : decisions) {
        result.final_rankings[d.source.value] =
            ranking_from_candidates(result.candidates.at(d.source.value));
    }

    clock.time("debate", [&] {
        PromptLibrary lib = cfg.prompts_dir.empty()
                                ? PromptLibrary::builtin()
                                : PromptLibrary::load(cfg.prompts_dir,
                                                      cfg.verify_prompt_checksums);

        std::map<std::uint64_t, std::uint64_t> truth;
        for (const auto& [s, t] : in.seeds->pairs) truth[s] = t;
        for (const auto& [s, t] : *in.test_pairs) truth[s] = t;

        auto backend = make_backend(cfg.backend, &truth);
        LdvAgents ldv_agents{backend, backend, backend};
        DdaAgents dda_agents{backend, backend, backend, backend, backend, backend};
        GraphProfileProvider profiles(*in.source_graph, *in.target_graph, cfg.debate);

        std::vector<std::uint64_t> debated(uncertain.members.begin(), uncertain.members.end());
        std::vector<EntityOutcome> outcomes(debated.size());

        parallel_for(debated.size(), cfg.workers, [&](std::size_t i) {
            EntityId e{debated[i], Side::Source};
            const CandidateSet& cs = result.candidates.at(e.value);
            EntityOutcome& outcome = outcomes[i];

            LdvResult ldv = run_ldv(e, cs, ldv_agents, profiles, cfg.debate, lib);
            if (!ldv.forwarded) {
                outcome.transcript.source = e.value;
                outcome.transcript.ldv = ldv.record;
                outcome.transcript.usage = ldv.record.usage;
                outcome.transcript.decision.source = e;
                outcome.transcript.decision.target = ldv.reranked.candidates.front().target;
                outcome.transcript.decision.score = ldv.record.referee_top_score;
                outcome.transcript.decision.provenance = Provenance::Ldv;
                outcome.ranking = ranking_from_candidates(ldv.reranked);
                return;
            }
            DebateTranscript dda = run_dda(e, ldv.reranked, dda_agents, profiles, cfg.debate, lib);
            dda.ldv = ldv.record;
            dda.usage.prompt_tokens += ldv.record.usage.prompt_tokens;
            dda.usage.completion_tokens += ldv.record.usage.completion_tokens;
            outcome.ranking = ranking_from_debate(ldv.reranked, dda);
            outcome.transcript = std::move(dda);
        });

        for (std::size_t i = 0; i < outcomes.size(); ++i) {
            result.forwarded_count +=
                outcomes[i].transcript.ldv && outcomes[i].transcript.ldv->forwarded ? 1 : 0;
            decisions.push_back(outcomes[i].transcript.decision);
            result.final_rankings[debated[i]] = std::move(outcomes[i].ranking);
            result.transcripts.push_back(std::move(outcomes[i].transcript));
        }
    });

    std::sort(decisions.begin(), decisions.end(),
              [](const AlignmentDecision& a, const AlignmentDecision& b) {
                  return a.source.value < b.source.value;
              });
    result.decisions = std::move(decisions);
    std::sort(result.transcripts.begin(), result.transcripts.end(),
              [](const DebateTranscript& a, const DebateTranscript& b) {
                  return a.source < b.source;
              });

    clock.time("metrics", [&] {
        std::map<std::uint64_t, const AlignmentDecision*> by_source;
        for (const auto& d : result.decisions) {
            by_source[d.source.value] = &d;
        }

        RankList pipeline_ranks;
        RankList retrieval_ranks;
        std::map<std::string, std::pair<RankList, std::uint64_t>> grouped;
        for (const auto& [s, t_true] : *in.test_pairs) {
            auto ranking_it = result.final_rankings.find(s);
            std::uint32_t r = ranking_it == result.final_rankings.end()
                                  ? RankList::kUnranked
                                  : rank_of(ranking_it->second, t_true);
            pipeline_ranks.ranks.push_back(r);

            auto cs_it = result.candidates.find(s);
            retrieval_ranks.ranks.push_back(
                cs_it == result.candidates.end()
                    ? RankList::kUnranked
                    : rank_of(ranking_from_candidates(cs_it->second), t_true));

            auto d_it = by_source.find(s);
            std::string prov = d_it == by_source.end()
                                   ? "missing"
                                   : (d_it->second->provenance == Provenance::Direct ? "direct"
                                      : d_it->second->provenance == Provenance::Ldv ? "ldv"
                                                                                    : "dda");
            grouped[prov].first.ranks.push_back(r);
            grouped[prov].second += 1;
        }

        result.report.N = pipeline_ranks.ranks.size();
        for (std::uint32_t k : cfg.eval_ks) {
            result.report.hits[k] = hits_at_k(pipeline_ranks, k);
        }
        result.report.mrr = mrr(pipeline_ranks);
        for (const auto& [prov, entry] : grouped) {
            ProvenanceStats stats;
            stats.count = entry.second;
            stats.hits1 = hits_at_k(entry.first, 1);
            stats.mrr = mrr(entry.first);
            result.report.by_provenance[prov] = stats;
        }

        std::vector<std::uint32_t> ks(cfg.eval_ks.begin(), cfg.eval_ks.end());
        ks.push_back(static_cast<std::uint32_t>(result.retrieval_k_used));
        for (std::uint32_t k : ks) {
            result.retrieval_hits[k] = hits_at_k(retrieval_ranks, k);
        }

        // Decisions only ever pick from retrieved candidates, so the final
        // Hits@1 is bounded by the retrieval Hits@K.
        double bound = result.retrieval_hits.at(
            static_cast<std::uint32_t>(result.retrieval_k_used));
        if (result.report.hits.count(1) && result.report.hits.at(1) > bound + 1e-12) {
            throw Error(ErrorKind::Internal,
                        "invariant violation: pipeline Hits@1 exceeds retrieval Hits@K");
        }
    });

    result.cost = report_cost(result.transcripts);
    return result;
}

PipelineResult run_pipeline_files(const PipelineConfig& cfg) {
    cfg.validate();
    if (cfg.ent1.empty() || cfg.ent2.empty() || cfg.rel1.empty() || cfg.rel2.empty()) {
        throw_config("data.ent1/ent2/rel1/rel2 are required");
    }
    if (cfg.emb1.empty() || cfg.emb2.empty()) {
        throw_config("data.emb1/emb2 are required");
    }
    if (cfg.test_path.empty()) {
        throw_config("data.test is required for evaluation");
    }

    KnowledgeGraph gs = load_graph(cfg.ent1, cfg.rel1, cfg.attr1, Side::Source);
    KnowledgeGraph gt = load_graph(cfg.ent2, cfg.rel2, cfg.attr2, Side::Target);
    EmbeddingStore es = cfg.emb_format == "jsonl" ? load_embeddings_jsonl(cfg.emb1, Side::Source)
                                                  : load_embeddings_binary(cfg.emb1, Side::Source);
    EmbeddingStore et = cfg.emb_format == "jsonl" ? load_embeddings_jsonl(cfg.emb2, Side::Target)
                                                  : load_embeddings_binary(cfg.emb2, Side::Target);
    SeedPairs seeds;
    if (!cfg.seeds_path.empty()) {
        seeds = load_seed_pairs(cfg.seeds_path, gs, gt);
    }
    SeedPairs test = load_seed_pairs(cfg.test_path, gs, gt);

    PipelineInputs inputs;
    inputs.source_graph = &gs;
    inputs.target_graph = &gt;
    inputs.source_emb = &es;
    inputs.target_emb = &et;
    inputs.seeds = &seeds;
    inputs.test_pairs = &test.pairs;

    PipelineResult result = run_pipeline(inputs, cfg);
    write_pipeline_artifacts(result, cfg);
    return result;
}

nlohmann::ordered_json report_json(const PipelineResult& result, const PipelineConfig& cfg) {
    nlohmann::ordered_json j;
    j["schema_version"] = 1;
    j["N"] = result.report.N;
    nlohmann::ordered_json hits = nlohmann::ordered_json::object();
    for (const auto& [k, v] : result.report.hits) {
        hits[std::to_string(k)] = v;
    }
    j["hits"] = std::move(hits);
    j["mrr"] = result.report.mrr;
    nlohmann::ordered_json prov = nlohmann::ordered_json::object();
    for (const auto& [name, stats] : result.report.by_provenance) {
        prov[name] = {{"count", stats.count}, {"hits1", stats.hits1}, {"mrr", stats.mrr}};
    }
    j["by_provenance"] = std::move(prov);
    nlohmann::ordered_json rhits = nlohmann::ordered_json::object();
    for (const auto& [k, v] : result.retrieval_hits) {
        rhits[std::to_string(k)] = v;
    }
    j["retrieval_hits"] = std::move(rhits);
    j["retrieval_k"] = result.retrieval_k_used;
    j["uncertain_count"] = result.uncertain_count;
    j["forwarded_count"] = result.forwarded_count;
    j["tokens"] = {{"total", result.cost.total_tokens},
                   {"mean_per_debated_entity", result.cost.mean_tokens_per_entity},
                   {"debated_entities", result.cost.entities}};
    j["ranking_convention"] =
        "debated: decided target first, then final-round aggregate order; verified: referee "
        "order; direct: embedding order";
    j["config"] = {{"metric",
                    cfg.similarity.metric == SimilarityMetric::Csls ? "csls" : "cosine"},
                   {"csls_k", cfg.similarity.csls_k},
                   {"normalize", cfg.similarity.normalize},
                   {"retrieval_k", cfg.retrieval_k},
                   {"delta1", cfg.debate.delta1},
                   {"delta2", cfg.debate.delta2},
                   {"rounds", cfg.debate.max_rounds},
                   {"ladder", cfg.debate.ladder},
                   {"w_sim", cfg.debate.w_sim},
                   {"w_agents", cfg.debate.w_agents},
                   {"mode", cfg.mode}};
    return j;
}

void write_pipeline_artifacts(const PipelineResult& result, const PipelineConfig& cfg) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.out_dir);
    write_decisions_tsv(result.decisions, cfg.out_dir + "/decisions.tsv");
    write_transcripts_jsonl(result.transcripts, cfg.out_dir + "/transcripts.jsonl");
    dump_candidates_jsonl(result.candidates, cfg.out_dir + "/candidates.jsonl");
    {
        std::ofstream out(cfg.out_dir + "/report.json");
        if (!out) {
            throw_data("cannot write report to " + cfg.out_dir);
        }
        out << report_json(result, cfg).dump(2) << '\n';
    }
    {
        // Wall-clock timings are intentionally separate: report.json stays
        // byte-reproducible across runs.
        nlohmann::ordered_json j = nlohmann::ordered_json::array();
        for (const auto& t : result.timings) {
            j.push_back({{"stage", t.stage}, {"seconds", t.seconds}});
        }
        std::ofstream out(cfg.out_dir + "/timings.json");
        out << j.dump(2) << '\n';
    }
}

} // namespace kgalign
