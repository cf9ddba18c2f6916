// Acceptance suite: one pass/fail line per criterion, exit 0 only when all
// criteria hold. Reference values come from the independent oracles in
// oracle_helpers.hpp, never from the code paths under test.

#include "kgalign/corpus.hpp"
#include "kgalign/debate.hpp"
#include "kgalign/error.hpp"
#include "kgalign/metrics.hpp"
#include "kgalign/pipeline.hpp"
#include "kgalign/synthetic.hpp"
#include "kgalign/verdict.hpp"

#include "oracle_helpers.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <unistd.h>

using namespace kgalign;

namespace {

struct AcceptanceFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require(bool cond, const std::string& message) {
    if (!cond) {
        throw AcceptanceFailure(message);
    }
}

std::string temp_dir(const std::string& tag) {
    auto dir = std::filesystem::temp_directory_path() /
               ("kgalign_acceptance_" + std::to_string(::getpid()) + "_" + tag);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir.string();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), "cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

PipelineInputs inputs_for(const SyntheticDataset& ds) {
    PipelineInputs in;
    in.source_graph = &ds.source;
    in.target_graph = &ds.target;
    in.source_emb = &ds.source_emb;
    in.target_emb = &ds.target_emb;
    in.seeds = &ds.seeds;
    in.test_pairs = &ds.test_pairs;
    return in;
}

SyntheticDataset acceptance_dataset(std::uint64_t seed) {
    SyntheticConfig scfg;
    scfg.entities = 200;
    scfg.name_collision_rate = 0.3;
    scfg.seed = seed;
    return generate_synthetic(scfg);
}

// ---------------------------------------------------------------------------
// 1. Oracle end-to-end: Hits@1 = 1.0 exactly, well under the time budget.
void criterion_oracle_end_to_end() {
    auto ds = acceptance_dataset(101);
    PipelineConfig cfg;
    cfg.backend.kind = BackendKind::Oracle;

    auto start = std::chrono::steady_clock::now();
    auto result = run_pipeline(inputs_for(ds), cfg);
    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    require(result.report.N == ds.test_pairs.size(), "unexpected test-set size");
    require(result.report.hits.at(1) == 1.0,
            "oracle Hits@1 = " + std::to_string(result.report.hits.at(1)));
    require(result.uncertain_count > 0, "synthetic dataset produced no uncertain entities");
    require(result.forwarded_count > 0, "no entity reached the deep debate stage");
    require(wall < 30.0, "pipeline took " + std::to_string(wall) + "s");
}

// ---------------------------------------------------------------------------
// 2. Baseline preservation under all-abstain agents.
void criterion_baseline_preservation() {
    auto ds = acceptance_dataset(101);
    PipelineConfig cfg;
    cfg.backend.kind = BackendKind::Scripted;
    cfg.backend.default_response = "[]";  // abstain for arrays; judge falls back neutral
    auto result = run_pipeline(inputs_for(ds), cfg);

    // Independent baseline: linear max-scan over each candidate list.
    std::vector<std::uint32_t> baseline_ranks;
    for (const auto& d : result.decisions) {
        const auto& cands = result.candidates.at(d.source.value).candidates;
        std::uint64_t best = cands.front().target.value;
        double best_score = cands.front().score;
        for (const auto& c : cands) {
            if (c.score > best_score || (c.score == best_score && c.target.value < best)) {
                best = c.target.value;
                best_score = c.score;
            }
        }
        require(d.target.value == best,
                "decision for source " + std::to_string(d.source.value) +
                    " differs from the embedding baseline");
    }
    for (const auto& [s, t_true] : ds.test_pairs) {
        const auto& cands = result.candidates.at(s).candidates;
        std::uint32_t rank = RankList::kUnranked;
        for (std::size_t i = 0; i < cands.size(); ++i) {
            if (cands[i].target.value == t_true) {
                rank = static_cast<std::uint32_t>(i + 1);
                break;
            }
        }
        baseline_ranks.push_back(rank);
    }
    for (const auto& [k, v] : result.report.hits) {
        require(v == kgtest::ref_hits_at_k(baseline_ranks, k),
                "Hits@" + std::to_string(k) + " differs from the baseline metrics");
    }
    require(std::abs(result.report.mrr - kgtest::ref_mrr(baseline_ranks)) < 1e-15,
            "MRR differs from the baseline metrics");
}

// ---------------------------------------------------------------------------
// 3. CSLS equals the brute-force reference; hubs get demoted.
void criterion_csls_oracle() {
    std::mt19937_64 rng(303);
    for (int pair_idx = 0; pair_idx < 100; ++pair_idx) {
        auto s = kgtest::random_store(rng, Side::Source, 50, 16);
        auto t = kgtest::random_store(rng, Side::Target, 50, 16);
        for (int k : {1, 5, 10}) {
            SimilarityConfig cfg;
            cfg.csls_k = k;
            Matrix m = csls_matrix(s, t, cfg);
            auto ref = kgtest::ref_csls(s, t, static_cast<std::size_t>(k));
            for (std::size_t i = 0; i < 50; ++i) {
                for (std::size_t j = 0; j < 50; ++j) {
                    double r = static_cast<double>(ref[i][j]);
                    require(std::abs(m.at(i, j) - r) <= 1e-9 * std::max(1.0, std::abs(r)),
                            "CSLS mismatch at pair " + std::to_string(pair_idx));
                }
            }
        }
    }

    // Hub construction: raw cosine prefers the hub, CSLS flips to the niche
    // target.
    auto norm3 = [](float x, float y, float z) {
        float n = std::sqrt(x * x + y * y + z * z);
        return EmbeddingVector{x / n, y / n, z / n};
    };
    EmbeddingStore sources(Side::Source, 3, 0, 0), targets(Side::Target, 3, 0, 0);
    sources.add(0, norm3(1.0f, 0.0f, 0.0f), {}, {});
    sources.add(1, norm3(0.0f, 1.0f, 0.0f), {}, {});
    sources.add(2, norm3(0.01f, 1.0f, 0.0f), {}, {});
    sources.add(3, norm3(0.0f, 1.0f, 0.01f), {}, {});
    sources.finalize();
    targets.add(0, norm3(0.431f, 0.9f, 0.0f), {}, {});  // hub
    targets.add(1, norm3(0.42f, 0.0f, 0.9f), {}, {});   // niche
    targets.finalize();
    double cos_hub = cosine(sources.row(0).fused, targets.row(0).fused);
    double cos_niche = cosine(sources.row(0).fused, targets.row(1).fused);
    require(cos_hub > cos_niche, "hub construction lost its raw-cosine lead");
    SimilarityConfig cfg;
    cfg.csls_k = 1;
    Matrix m = csls_matrix(sources, targets, cfg);
    auto ref = kgtest::ref_csls(sources, targets, 1);
    require(m.at(0, 1) > m.at(0, 0), "CSLS did not flip the hub argmax");
    require(ref[0][1] > ref[0][0], "reference disagrees on the hub flip");
}

// ---------------------------------------------------------------------------
// 4. Expansion/termination predicates vs independent truth tables.
void criterion_predicates() {
    DebateConfig cfg;
    int combos = 0;
    for (double s1 : {0.40, 0.49, 0.499, 0.5, 0.501, 0.51}) {
        for (double gap_v : {0.049, 0.05, 0.051, 0.2}) {
            for (auto [v, v_agree] : std::vector<std::pair<int, int>>{
                     {0, 0}, {2, 1}, {4, 2}, {4, 3}, {5, 0}, {5, 5}}) {
                for (bool judge : {false, true}) {
                    for (int round : {1, 2, 3}) {
                        for (int subset : {5, 10, 20}) {
                            RoundRecord state;
                            state.round = round;
                            state.subset_k = subset;
                            state.aggregate = {{1, s1}, {2, s1 - gap_v}};
                            state.v = v;
                            state.v_agree = v_agree;
                            state.judge.verdict_flag = judge;
                            bool expand = should_expand(state, cfg);
                            bool expand_ref = kgtest::ref_should_expand(
                                s1, v, v_agree, judge, cfg.delta2, subset, cfg.ladder.back());
                            require(expand == expand_ref, "should_expand mismatch");
                            bool term = should_terminate(state, cfg);
                            bool term_ref = kgtest::ref_should_terminate(
                                gap_v, v, v_agree, judge, cfg.delta1, round, cfg.max_rounds);
                            require(term == term_ref, "should_terminate mismatch");
                            ++combos;
                        }
                    }
                }
            }
        }
    }
    require(combos >= 64, "grid too small");
}

// ---------------------------------------------------------------------------
// 5. Hard-negative mining vs exhaustive scans, including ties.
void criterion_negative_mining() {
    std::mt19937_64 rng(505);
    for (int trial = 0; trial < 50; ++trial) {
        std::uniform_int_distribution<std::size_t> size_dist(10, 100);
        std::size_t n = size_dist(rng);

        // Graphs with integer-degree ties.
        std::map<std::uint64_t, std::string> names;
        for (std::uint64_t i = 0; i < n; ++i) names[i] = "n" + std::to_string(i);
        std::vector<RelationTriple> rel;
        std::uniform_int_distribution<std::uint64_t> pick(0, n - 1);
        for (std::size_t e = 0; e < n * 3; ++e) {
            rel.push_back({pick(rng), "r", pick(rng)});
        }
        KnowledgeGraph g(Side::Source, names, rel, {});

        std::vector<std::uint64_t> sources;
        for (std::uint64_t i = 0; i < n; ++i) sources.push_back(i);
        auto degree_result = degree_negatives(g, sources);
        std::map<std::uint64_t, std::uint64_t> picks;
        for (const auto& p : degree_result.pairs) picks[p.source] = p.counterpart;
        for (std::uint64_t s : sources) {
            auto expected = kgtest::ref_degree_negative(g, s);
            if (expected) {
                require(picks.count(s) && picks.at(s) == *expected,
                        "degree negative mismatch at trial " + std::to_string(trial));
            } else {
                require(picks.count(s) == 0, "unexpected degree negative for isolated source");
            }
        }

        // Name vectors drawn from a small discrete set to force exact
        // cosine ties.
        std::uniform_int_distribution<int> coord(0, 2);
        auto discrete_vec = [&](std::size_t dim) {
            EmbeddingVector v(dim);
            bool nonzero = false;
            for (auto& x : v) {
                x = static_cast<float>(coord(rng)) * 0.5f;
                nonzero |= x != 0.0f;
            }
            if (!nonzero) v[0] = 1.0f;
            return v;
        };
        EmbeddingStore src(Side::Source, 4, 0, 0), tgt(Side::Target, 4, 0, 0);
        SeedPairs seeds;
        for (std::uint64_t i = 0; i < n; ++i) {
            src.add(i, discrete_vec(4), {}, {});
            tgt.add(1000 + i, discrete_vec(4), {}, {});
            seeds.pairs.emplace_back(i, 1000 + i);
        }
        src.finalize();
        tgt.finalize();
        auto negs = name_negatives(sources, src, tgt, seeds, {.similarity_floor = -1.0});
        require(negs.size() == sources.size(), "name negative count mismatch");
        for (const auto& p : negs) {
            auto expected = kgtest::ref_name_negative(src.find(p.source)->name_vec, tgt,
                                                      1000 + p.source);
            require(p.counterpart == expected,
                    "name negative mismatch at trial " + std::to_string(trial));
            require(p.counterpart != 1000 + p.source, "name negative equals the seed pair");
        }
    }
}

// ---------------------------------------------------------------------------
// 6. Corpus fidelity: round-trip, fixed field names/semantics, stable bytes.
void criterion_corpus_fidelity() {
    auto ds = acceptance_dataset(606);
    std::vector<std::uint64_t> sources;
    for (const auto& [s, _] : ds.seeds.pairs) sources.push_back(s);
    auto name_negs = name_negatives(sources, ds.source_emb, ds.target_emb, ds.seeds,
                                    {.similarity_floor = -1.0});
    auto degree_negs = degree_negatives(ds.source, sources);
    auto built = build_corpus(ds.seeds, name_negs, degree_negs.pairs, ds.source, ds.target);

    require(built.manifest.positive_count == ds.seeds.pairs.size(), "positive count mismatch");
    require(built.manifest.name_negative_count == name_negs.size(), "name count mismatch");
    require(built.manifest.degree_negative_count == degree_negs.pairs.size(),
            "degree count mismatch");

    std::string bytes1 = serialize_corpus(built.records);
    auto rebuilt = build_corpus(ds.seeds, name_negs, degree_negs.pairs, ds.source, ds.target);
    std::string bytes2 = serialize_corpus(rebuilt.records);
    require(bytes1 == bytes2, "serialization is not byte-stable across runs");

    auto parsed = parse_corpus(bytes1);
    require(parsed.size() == built.records.size(), "round-trip dropped records");
    for (std::size_t i = 0; i < parsed.size(); ++i) {
        require(parsed[i] == built.records[i], "round-trip altered record " + std::to_string(i));
    }

    // Field names and label semantics of the fixed instruction format.
    std::string first_line = bytes1.substr(0, bytes1.find('\n'));
    nlohmann::json j = nlohmann::json::parse(first_line);
    require(j.size() == 4, "record carries unexpected fields");
    for (const char* key : {"instruction", "input", "chosen", "rejected"}) {
        require(j.contains(key), std::string("record lacks field ") + key);
    }
    require(j["instruction"].get<std::string>().rfind("Determine whether entity A and entity",
                                                      0) == 0,
            "instruction text drifted");
    std::size_t idx = 0;
    for (const auto& r : built.records) {
        bool positive = idx < built.manifest.positive_count;
        require(r.chosen == (positive ? "Yes" : "No"), "chosen label mismatch");
        require(r.rejected == (positive ? "No" : "Yes"), "rejected label mismatch");
        require(r.chosen != r.rejected, "chosen equals rejected");
        ++idx;
    }
}

// ---------------------------------------------------------------------------
// 7. Compression honors the 15% budget on every oversized profile.
void criterion_compression() {
    std::mt19937_64 rng(707);
    DebateConfig cfg;  // compression_budget = 0.15
    std::uniform_int_distribution<int> attr_count(100, 300);
    std::uniform_int_distribution<int> word_count(2, 12);
    std::uniform_int_distribution<std::uint64_t> freq(1, 1000);
    for (int p = 0; p < 200; ++p) {
        Profile profile;
        profile.id = static_cast<std::uint64_t>(p);
        profile.name = "Profile " + std::to_string(p);
        FrequencyTable stats;
        int count = attr_count(rng);
        for (int a = 0; a < count; ++a) {
            std::string key = "key_" + std::to_string(a);
            std::string value;
            int words = word_count(rng);
            for (int w = 0; w < words; ++w) {
                value += (w ? " token" : "token") + std::to_string(w);
            }
            profile.attributes.emplace_back(key, value);
            stats.attribute_keys[key] = freq(rng);
        }
        auto compressed = compress_profile(profile, stats, cfg);
        double floor_budget = 0.15 * static_cast<double>(compressed.original_token_estimate);
        require(floor_budget > 32.0, "profile not above the budget floor");
        require(static_cast<double>(compressed.token_estimate) <= floor_budget,
                "compressed profile " + std::to_string(p) + " exceeds the budget: " +
                    std::to_string(compressed.token_estimate) + " vs " +
                    std::to_string(floor_budget));
    }
}

// ---------------------------------------------------------------------------
// 8. Ranking metrics vs brute-force counting on 1,000 random rank lists.
void criterion_metric_oracle() {
    std::mt19937_64 rng(808);
    std::uniform_int_distribution<std::uint32_t> rank_dist(1, 100);
    std::uniform_int_distribution<std::size_t> len_dist(1, 400);
    std::uniform_real_distribution<double> drop(0, 1);
    for (int trial = 0; trial < 1000; ++trial) {
        RankList rl;
        std::size_t len = len_dist(rng);
        for (std::size_t i = 0; i < len; ++i) {
            rl.ranks.push_back(drop(rng) < 0.05 ? RankList::kUnranked : rank_dist(rng));
        }
        for (std::uint32_t k : {1u, 10u, 50u}) {
            require(std::abs(hits_at_k(rl, k) - kgtest::ref_hits_at_k(rl.ranks, k)) <= 1e-12,
                    "hits mismatch at trial " + std::to_string(trial));
        }
        double m = mrr(rl);
        require(std::abs(m - kgtest::ref_mrr(rl.ranks)) <= 1e-12,
                "mrr mismatch at trial " + std::to_string(trial));
        require(hits_at_k(rl, 1) <= m && m <= 1.0, "Hits@1 <= MRR <= 1 violated");
    }
}

// ---------------------------------------------------------------------------
// 9. Pipeline Hits@1 never exceeds retrieval Hits@K on any synthetic run.
void criterion_upper_bound() {
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 4ULL, 5ULL}) {
        SyntheticConfig scfg;
        scfg.entities = 120;
        scfg.seed = seed;
        scfg.pair_noise = 0.05 + 0.02 * static_cast<double>(seed);
        auto ds = generate_synthetic(scfg);
        for (bool oracle : {true, false}) {
            PipelineConfig cfg;
            if (oracle) {
                cfg.backend.kind = BackendKind::Oracle;
            } else {
                cfg.backend.kind = BackendKind::Scripted;
                cfg.backend.default_response = "[]";
            }
            auto result = run_pipeline(inputs_for(ds), cfg);
            double bound =
                result.retrieval_hits.at(static_cast<std::uint32_t>(result.retrieval_k_used));
            require(result.report.hits.at(1) <= bound + 1e-15,
                    "upper bound violated at seed " + std::to_string(seed));
        }
    }
}

// ---------------------------------------------------------------------------
// 10. Byte-identical artifacts across two identically-seeded offline runs.
void criterion_determinism() {
    auto ds = acceptance_dataset(1010);
    auto data_dir = temp_dir("data");
    write_synthetic_dataset(ds, data_dir);

    auto run_once = [&](const std::string& out_dir) {
        PipelineConfig cfg;
        cfg.backend.kind = BackendKind::Oracle;
        cfg.ent1 = data_dir + "/ent_ids_1";
        cfg.ent2 = data_dir + "/ent_ids_2";
        cfg.rel1 = data_dir + "/triples_1";
        cfg.rel2 = data_dir + "/triples_2";
        cfg.attr1 = data_dir + "/attrs_1";
        cfg.attr2 = data_dir + "/attrs_2";
        cfg.seeds_path = data_dir + "/sup_pairs";
        cfg.test_path = data_dir + "/ref_pairs";
        cfg.emb1 = data_dir + "/emb_1.bin";
        cfg.emb2 = data_dir + "/emb_2.bin";
        cfg.out_dir = out_dir;
        cfg.workers = 3;
        (void)run_pipeline_files(cfg);
    };
    auto out_a = temp_dir("run_a");
    auto out_b = temp_dir("run_b");
    run_once(out_a);
    run_once(out_b);
    for (const char* name : {"decisions.tsv", "transcripts.jsonl", "report.json",
                             "candidates.jsonl"}) {
        require(read_file(out_a + "/" + name) == read_file(out_b + "/" + name),
                std::string(name) + " differs between identical runs");
    }
}

// ---------------------------------------------------------------------------
// 11. Parser robustness over a generated adversarial corpus.
void criterion_parser_robustness() {
    std::vector<std::pair<std::string, Role>> cases;
    auto add = [&](std::string text, Role role) { cases.emplace_back(std::move(text), role); };

    const std::string score_body = R"([{"candidate_id":"1","align_score":0.8},
        {"candidate_id":"2","align_score":0.3}])";
    const std::string specialist_body =
        R"([{"candidate_id":1,"score":0.9,"align":true,"evidence":"x"},
            {"candidate_id":2,"score":0.2,"align":"abstain","evidence":"y"}])";
    const std::string attack_body =
        R"([{"candidate_id":1,"issues":["a"],"evidence":"e","penalty":0.4}])";
    const std::string judge_body =
        R"({"endorse":"1","adjustments":[{"candidate_id":"2","note":"n","delta":0.1}]})";

    // Wrappers around structurally valid payloads.
    for (const auto& [body, role] : std::vector<std::pair<std::string, Role>>{
             {score_body, Role::Proponent},
             {score_body, Role::Referee},
             {specialist_body, Role::Alias},
             {specialist_body, Role::Type},
             {attack_body, Role::Attack},
             {judge_body, Role::Judge}}) {
        add(body, role);
        add("```json\n" + body + "\n```", role);
        add("```\n" + body + "\n```", role);
        add("Here is my answer:\n" + body + "\nLet me know!", role);
        add("prefix ```json\n" + body + "\n``` suffix", role);
    }

    // Truncations at many byte offsets.
    for (std::size_t cut = 1; cut < score_body.size(); cut += 3) {
        add(score_body.substr(0, cut), Role::Proponent);
    }
    for (std::size_t cut = 1; cut < judge_body.size(); cut += 3) {
        add(judge_body.substr(0, cut), Role::Judge);
    }
    for (std::size_t cut = 1; cut < specialist_body.size(); cut += 5) {
        add(specialist_body.substr(0, cut), Role::Neighborhood);
    }
    for (std::size_t cut = 1; cut < attack_body.size(); cut += 5) {
        add(attack_body.substr(0, cut), Role::Attack);
    }

    // Out-of-range and ill-typed scores.
    for (const char* score : {"1.7", "-2.3", "\"0.9\"", "\"huge\"", "null", "[0.1]", "{}"}) {
        add(std::string(R"([{"candidate_id":1,"align_score":)") + score + "}]", Role::Opponent);
        add(std::string(R"([{"candidate_id":1,"score":)") + score +
                R"(,"align":true,"evidence":"x"}])",
            Role::Attribute);
    }
    for (const char* penalty : {"2.5", "-1", "\"0.2\"", "\"bad\"", "null"}) {
        add(std::string(R"([{"candidate_id":1,"issues":[],"evidence":"","penalty":)") + penalty +
                "}]",
            Role::Attack);
    }

    // Missing, unknown, duplicate, malformed ids.
    add(R"([])", Role::Proponent);
    add(R"([{"align_score":0.5}])", Role::Proponent);
    add(R"([{"candidate_id":"zzz","align_score":0.5}])", Role::Proponent);
    add(R"([{"candidate_id":-4,"align_score":0.5}])", Role::Proponent);
    add(R"([{"candidate_id":99,"align_score":0.5}])", Role::Proponent);
    add(R"([{"candidate_id":1,"align_score":0.5},{"candidate_id":1,"align_score":0.9}])",
        Role::Proponent);
    add(R"([{"candidate_id":null,"score":0.5,"align":true}])", Role::Neighborhood);
    add(R"({"endorse":"77","adjustments":[]})", Role::Judge);
    add(R"({"endorse":null})", Role::Judge);
    add(R"({"adjustments":"not an array"})", Role::Judge);
    add(R"({"endorse":1,"adjustments":[{"candidate_id":1,"delta":"x","note":123}]})",
        Role::Judge);

    // Outright garbage.
    add("", Role::Proponent);
    add("   \n\t ", Role::Judge);
    add("The answer is definitely candidate 1.", Role::Proponent);
    add("[[[[[[", Role::Proponent);
    add("}}}}", Role::Judge);
    add("12345", Role::Proponent);
    add("true", Role::Judge);
    add(std::string("\xff\xfe\x80garbage\x01", 11), Role::Proponent);
    add(std::string(5000, '['), Role::Proponent);
    add("```json\n```", Role::Alias);
    add(R"(["not an object", 42])", Role::Type);
    add(R"([{"candidate_id":1,"align_score":1e308}])", Role::Proponent);
    add(R"([{"candidate_id":18446744073709551615,"align_score":0.5}])", Role::Proponent);

    std::mt19937_64 rng(1111);
    std::uniform_int_distribution<int> byte_dist(0, 255);
    for (int i = 0; i < 60; ++i) {
        std::string junk;
        for (int b = 0; b < 64; ++b) {
            junk.push_back(static_cast<char>(byte_dist(rng)));
        }
        add(junk, i % 2 == 0 ? Role::Proponent : Role::Judge);
    }
    // Valid JSON randomly spliced into prose with mismatched fences.
    for (int i = 0; i < 20; ++i) {
        std::string body = i % 2 ? score_body : specialist_body;
        std::string wrapped = "```json\n" + body.substr(0, body.size() - i % 8) + "\nthoughts: " +
                              std::string(static_cast<std::size_t>(i), 'x');
        add(wrapped, i % 2 ? Role::Proponent : Role::Alias);
    }

    require(cases.size() >= 200, "adversarial corpus too small: " +
                                      std::to_string(cases.size()));

    const std::vector<std::uint64_t> expected = {1, 2};
    std::size_t typed_errors = 0;
    for (std::size_t i = 0; i < cases.size(); ++i) {
        const auto& [text, role] = cases[i];
        ParsedVerdicts r;
        try {
            r = parse_verdicts(text, expected, role);
        } catch (...) {
            throw AcceptanceFailure("parse_verdicts threw on case " + std::to_string(i));
        }
        if (!r.ok) {
            require(!r.error.empty(), "failure without a typed error at case " +
                                          std::to_string(i));
            ++typed_errors;
            continue;
        }
        if (role == Role::Judge) {
            require(r.judge.has_value(), "judge parse without verdict at case " +
                                             std::to_string(i));
            for (const auto& adj : r.judge->adjustments) {
                require(adj.delta >= -0.2 && adj.delta <= 0.2, "unclamped judge delta");
            }
            if (r.judge->endorse) {
                require(*r.judge->endorse == 1 || *r.judge->endorse == 2,
                        "endorsement outside the candidate subset");
            }
        } else if (role == Role::Attack) {
            require(r.attacks.size() == expected.size(), "attack fill incomplete at case " +
                                                             std::to_string(i));
            for (const auto& a : r.attacks) {
                require(a.penalty >= 0.0 && a.penalty <= 1.0, "unclamped penalty");
            }
        } else {
            require(r.agents.size() == expected.size(),
                    "abstain fill incomplete at case " + std::to_string(i));
            for (const auto& v : r.agents) {
                if (v.score) {
                    require(*v.score >= 0.0 && *v.score <= 1.0, "unclamped score");
                }
            }
        }
    }
    require(typed_errors > 0, "no case exercised the typed-error path");
}

struct Criterion {
    int id;
    const char* name;
    std::function<void()> fn;
};

} // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "oracle end-to-end Hits@1 = 1.0 within the time budget",
         criterion_oracle_end_to_end},
        {2, "all-abstain agents preserve the embedding baseline exactly",
         criterion_baseline_preservation},
        {3, "CSLS matches the brute-force reference and flips the hub argmax",
         criterion_csls_oracle},
        {4, "expansion/termination predicates match the truth tables", criterion_predicates},
        {5, "hard-negative mining matches exhaustive scans including ties",
         criterion_negative_mining},
        {6, "corpus serialization round-trips with fixed fields and stable bytes",
         criterion_corpus_fidelity},
        {7, "profile compression meets the 15% token budget on every oversized profile",
         criterion_compression},
        {8, "Hits@K and MRR match brute-force evaluation on 1000 rank lists",
         criterion_metric_oracle},
        {9, "pipeline Hits@1 is bounded by retrieval Hits@K on every run",
         criterion_upper_bound},
        {10, "identical seeds yield byte-identical transcripts, decisions, and reports",
         criterion_determinism},
        {11, "verdict parser survives a 200-case adversarial corpus",
         criterion_parser_robustness},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        try {
            c.fn();
            std::printf("PASS  criterion %2d: %s\n", c.id, c.name);
        } catch (const std::exception& e) {
            ++failures;
            std::printf("FAIL  criterion %2d: %s\n      %s\n", c.id, c.name, e.what());
        }
    }
    if (failures) {
        std::printf("%d of %zu acceptance criteria failed\n", failures, criteria.size());
        return 1;
    }
    std::printf("all %zu acceptance criteria passed\n", criteria.size());
    return 0;
}
