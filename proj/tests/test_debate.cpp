#include <doctest.h>

#include "kgalign/debate.hpp"
#include "kgalign/error.hpp"

#include "oracle_helpers.hpp"

#include <random>

using namespace kgalign;
using kgtest::FnBackend;
using kgtest::PromptInfo;

namespace {

CandidateSet make_set(std::uint64_t source,
                      const std::vector<std::pair<std::uint64_t, double>>& cands) {
    CandidateSet cs;
    cs.source = {source, Side::Source};
    for (const auto& [t, s] : cands) {
        cs.candidates.push_back({{t, Side::Target}, s, std::nullopt});
    }
    return cs;
}

std::shared_ptr<FnBackend> oracle_like(std::map<std::uint64_t, std::uint64_t> truth) {
    return std::make_shared<FnBackend>([truth](const PromptInfo& info) -> std::string {
        auto it = truth.find(info.source);
        std::uint64_t t = it == truth.end() ? UINT64_MAX : it->second;
        switch (info.role) {
            case Role::Proponent:
            case Role::Opponent:
            case Role::Referee:
                return kgtest::score_array(info.candidates,
                                           [&](std::uint64_t id) { return id == t ? 1.0 : 0.0; });
            case Role::Attack:
                return kgtest::attack_array(info.candidates, [](std::uint64_t) { return 0.0; });
            case Role::Judge: {
                bool present = std::find(info.candidates.begin(), info.candidates.end(), t) !=
                               info.candidates.end();
                return kgtest::judge_object(present ? t : info.candidates.front(), present);
            }
            default:
                return kgtest::specialist_array(
                    info.candidates, [&](std::uint64_t id) { return id == t ? 1.0 : 0.0; },
                    [&](std::uint64_t id) { return id == t ? "true" : "false"; });
        }
    });
}

LdvAgents ldv_agents(std::shared_ptr<AgentBackend> b) { return {b, b, b}; }
DdaAgents dda_agents(std::shared_ptr<AgentBackend> b) { return {b, b, b, b, b, b}; }

RoundRecord predicate_state(double s1, double s2, int v, int v_agree, bool judge, int round,
                            int subset_k) {
    RoundRecord r;
    r.round = round;
    r.subset_k = subset_k;
    r.aggregate = {{1, s1}, {2, s2}};
    r.v = v;
    r.v_agree = v_agree;
    r.judge.verdict_flag = judge;
    return r;
}

} // namespace

TEST_CASE("compress_profile keeps small profiles intact") {
    Profile p;
    p.id = 1;
    p.name = "Small";
    p.attributes = {{"a", "1"}, {"b", "2"}};
    p.relations = {{"r", "x"}};
    FrequencyTable stats;
    stats.attribute_keys = {{"a", 5}, {"b", 3}};
    stats.relation_labels = {{"r", 2}};
    DebateConfig cfg;
    auto c = compress_profile(p, stats, cfg);
    CHECK(c.kept_attributes == p.attributes);
    CHECK(c.kept_relations == p.relations);
    CHECK(c.token_estimate == c.original_token_estimate);
}

TEST_CASE("compress_profile honors the budget on large profiles") {
    Profile p;
    p.id = 2;
    p.name = "Large Entity";
    FrequencyTable stats;
    for (int i = 0; i < 200; ++i) {
        std::string key = "attr_key_number_" + std::to_string(i);
        p.attributes.emplace_back(key, "some moderately long attribute value " +
                                           std::to_string(i));
        stats.attribute_keys[key] = static_cast<std::uint64_t>(200 - i);
    }
    DebateConfig cfg;
    auto c = compress_profile(p, stats, cfg);
    CHECK(c.original_token_estimate > 213);  // above the 32-token floor / 0.15
    CHECK(static_cast<double>(c.token_estimate) <=
          0.15 * static_cast<double>(c.original_token_estimate));
    CHECK(c.kept_attributes.size() < p.attributes.size());
    CHECK(!c.kept_attributes.empty());
}

TEST_CASE("compress_profile keeps the corpus-frequent attribute first") {
    Profile p;
    p.id = 3;
    p.name = "Pick";
    p.attributes = {{"rare", "one two three four five six seven eight nine ten eleven twelve "
                             "thirteen fourteen fifteen sixteen seventeen eighteen nineteen"},
                    {"common", "one two three four five six seven eight nine ten eleven twelve "
                               "thirteen fourteen fifteen sixteen seventeen eighteen nineteen"}};
    FrequencyTable stats;
    stats.attribute_keys = {{"common", 100}, {"rare", 1}};
    DebateConfig cfg;
    cfg.compression_budget = 0.55;  // budget admits one of the two attributes
    auto c = compress_profile(p, stats, cfg);
    REQUIRE(c.kept_attributes.size() == 1);
    CHECK(c.kept_attributes[0].first == "common");
}

TEST_CASE("run_ldv with oracle agents confirms an already-correct top-1") {
    auto backend = oracle_like({{10, 100}});
    kgtest::MapProfileProvider profiles;
    DebateConfig cfg;
    auto cs = make_set(10, {{100, 1.0}, {101, 0.98}, {102, 0.5}});
    auto result = run_ldv({10, Side::Source}, cs, ldv_agents(backend), profiles, cfg);
    CHECK_FALSE(result.forwarded);
    CHECK(result.reranked.candidates.front().target.value == 100);
    CHECK(result.reranked.created_from == CandidateOrigin::LdvRerank);
    CHECK(result.record.referee_top_score == 1.0);
    // Priors survive the rerank.
    CHECK(result.reranked.candidates.front().score == 1.0);
}

TEST_CASE("run_ldv forwards when the referee disagrees with the embedding order") {
    auto backend = oracle_like({{10, 102}});  // truth is the embedding's 3rd choice
    kgtest::MapProfileProvider profiles;
    DebateConfig cfg;
    auto cs = make_set(10, {{100, 1.0}, {101, 0.98}, {102, 0.5}});
    auto result = run_ldv({10, Side::Source}, cs, ldv_agents(backend), profiles, cfg);
    CHECK(result.forwarded);  // referee top-1 != embedding top-1
    CHECK(result.reranked.candidates.front().target.value == 102);
}

TEST_CASE("run_ldv forwards on proponent/opponent disagreement") {
    auto backend = std::make_shared<FnBackend>([](const PromptInfo& info) -> std::string {
        switch (info.role) {
            case Role::Proponent:
                return kgtest::score_array(info.candidates, [&](std::uint64_t id) {
                    return id == info.candidates[0] ? 0.9 : 0.2;
                });
            case Role::Opponent:
                return kgtest::score_array(info.candidates, [&](std::uint64_t id) {
                    return id == info.candidates[1] ? 0.9 : 0.2;
                });
            default:  // referee agrees with the embedding order, high confidence
                return kgtest::score_array(info.candidates, [&](std::uint64_t id) {
                    return id == info.candidates[0] ? 0.95 : 0.1;
                });
        }
    });
    kgtest::MapProfileProvider profiles;
    DebateConfig cfg;
    auto cs = make_set(10, {{100, 1.0}, {101, 0.9}});
    auto result = run_ldv({10, Side::Source}, cs, ldv_agents(backend), profiles, cfg);
    CHECK(result.forwarded);
    CHECK(result.reranked.candidates.front().target.value == 100);
}

TEST_CASE("run_ldv forwards below the referee confidence floor") {
    auto backend = std::make_shared<FnBackend>([](const PromptInfo& info) -> std::string {
        return kgtest::score_array(info.candidates, [&](std::uint64_t id) {
            return id == info.candidates[0] ? 0.55 : 0.1;  // below the 0.6 floor
        });
    });
    kgtest::MapProfileProvider profiles;
    DebateConfig cfg;
    auto cs = make_set(10, {{100, 1.0}, {101, 0.9}});
    auto result = run_ldv({10, Side::Source}, cs, ldv_agents(backend), profiles, cfg);
    CHECK(result.forwarded);
}

TEST_CASE("run_ldv force-forwards when every agent fails") {
    auto backend = std::make_shared<FnBackend>([](const PromptInfo&) -> std::string {
        throw Error(ErrorKind::Backend, "endpoint down");
    });
    kgtest::MapProfileProvider profiles;
    DebateConfig cfg;
    auto cs = make_set(10, {{100, 1.0}, {101, 0.9}});
    auto result = run_ldv({10, Side::Source}, cs, ldv_agents(backend), profiles, cfg);
    CHECK(result.forwarded);
    // Original order retained.
    CHECK(result.reranked.candidates.front().target.value == 100);
    bool logged = false;
    for (const auto& ev : result.record.events) {
        logged |= ev.find("force-forwarded") != std::string::npos;
    }
    CHECK(logged);
}

TEST_CASE("should_expand follows the conjunction") {
    DebateConfig cfg;  // delta2 = 0.5, ladder max 20
    CHECK(should_expand(predicate_state(0.4, 0.1, 10, 3, false, 1, 5), cfg));
    CHECK_FALSE(should_expand(predicate_state(0.4, 0.1, 10, 3, true, 1, 5), cfg));
    CHECK_FALSE(should_expand(predicate_state(0.6, 0.1, 10, 3, false, 1, 5), cfg));
    CHECK_FALSE(should_expand(predicate_state(0.4, 0.1, 10, 8, false, 1, 5), cfg));
    // Vacuous vote clause when no specialist voted.
    CHECK(should_expand(predicate_state(0.4, 0.1, 0, 0, false, 1, 5), cfg));
    // Never at the last rung.
    CHECK_FALSE(should_expand(predicate_state(0.4, 0.1, 10, 3, false, 1, 20), cfg));
}

TEST_CASE("should_terminate follows the disjunction with forced stop") {
    DebateConfig cfg;  // delta1 = 0.05, rounds = 3
    CHECK(should_terminate(predicate_state(0.9, 0.1, 4, 1, false, 3, 5), cfg));   // round = n
    CHECK(should_terminate(predicate_state(0.5, 0.3, 10, 4, true, 1, 5), cfg));   // gap 0.2
    CHECK(should_terminate(predicate_state(0.5, 0.49, 10, 6, true, 1, 5), cfg));  // votes
    CHECK_FALSE(should_terminate(predicate_state(0.5, 0.49, 10, 6, false, 1, 5), cfg));
    CHECK_FALSE(should_terminate(predicate_state(0.5, 0.49, 10, 4, true, 1, 5), cfg));
    // v = 0 leaves the vote clause unsatisfied.
    CHECK_FALSE(should_terminate(predicate_state(0.5, 0.49, 0, 0, true, 1, 5), cfg));
}

TEST_CASE("predicates match the independent truth table over a boundary grid") {
    DebateConfig cfg;
    int checked = 0;
    for (double s1 : {0.40, 0.49, 0.50, 0.51}) {
        for (double gap_v : {0.04, 0.05, 0.06}) {
            for (int v : {0, 2, 4}) {
                for (int v_agree_num : {0, 1, 2}) {
                    int v_agree = v == 0 ? 0 : (v_agree_num * v) / 2;
                    if (v_agree > v) continue;
                    for (bool judge : {false, true}) {
                        for (int round : {1, 3}) {
                            for (int subset : {5, 20}) {
                                auto state = predicate_state(s1, s1 - gap_v, v, v_agree, judge,
                                                             round, subset);
                                CHECK(should_expand(state, cfg) ==
                                      kgtest::ref_should_expand(s1, v, v_agree, judge, cfg.delta2,
                                                                subset, cfg.ladder.back()));
                                CHECK(should_terminate(state, cfg) ==
                                      kgtest::ref_should_terminate(gap_v, v, v_agree, judge,
                                                                   cfg.delta1, round,
                                                                   cfg.max_rounds));
                                ++checked;
                            }
                        }
                    }
                }
            }
        }
    }
    CHECK(checked >= 64);
}

TEST_CASE("aggregate_scores collapses to the prior under all-abstain verdicts") {
    DebateConfig cfg;
    cfg.w_sim = 1.0;
    cfg.w_agents = 0.0;
    std::map<std::uint64_t, double> prior{{1, 0.7}, {2, 0.4}};
    std::vector<AgentVerdict> abstains;
    for (std::uint64_t id : {1, 2}) {
        AgentVerdict v;
        v.candidate = id;
        v.align = Align::Abstain;
        abstains.push_back(v);
    }
    auto totals = aggregate_scores(abstains, {}, JudgeVerdict{}, prior, cfg);
    CHECK(totals.at(1) == doctest::Approx(0.7));
    CHECK(totals.at(2) == doctest::Approx(0.4));

    // With the default weights the collapse still preserves the prior value.
    DebateConfig defaults;
    auto totals2 = aggregate_scores(abstains, {}, JudgeVerdict{}, prior, defaults);
    CHECK(totals2.at(1) == doctest::Approx(0.7));
    CHECK(totals2.at(2) == doctest::Approx(0.4));
}

TEST_CASE("aggregate_scores reproduces the worked example") {
    DebateConfig cfg;
    cfg.w_sim = 0.3;
    cfg.w_agents = 0.7;
    std::map<std::uint64_t, double> prior{{1, 0.5}};
    std::vector<AgentVerdict> verdicts;
    {
        AgentVerdict v;
        v.candidate = 1;
        v.score = 0.8;
        v.align = Align::True;
        verdicts.push_back(v);
        v.score = 0.6;
        verdicts.push_back(v);
    }
    std::vector<AttackVerdict> attacks;
    {
        AttackVerdict a;
        a.candidate = 1;
        a.penalty = 0.1;
        attacks.push_back(a);
    }
    JudgeVerdict judge;
    judge.adjustments.push_back({1, 0.05, "consensus"});
    auto totals = aggregate_scores(verdicts, attacks, judge, prior, cfg);
    CHECK(totals.at(1) == doctest::Approx(0.59).epsilon(1e-12));
}

TEST_CASE("aggregate_scores is order-invariant and rejects unknown candidates") {
    DebateConfig cfg;
    std::map<std::uint64_t, double> prior{{1, 0.9}, {2, 0.5}, {3, 0.2}};
    std::vector<AgentVerdict> verdicts;
    std::mt19937_64 rng(79);
    for (std::uint64_t id : {1, 2, 3}) {
        for (double s : {0.2, 0.6, 0.9, 0.4}) {
            AgentVerdict v;
            v.candidate = id;
            v.score = s;
            v.align = s >= 0.5 ? Align::True : Align::False;
            verdicts.push_back(v);
        }
    }
    auto base = aggregate_scores(verdicts, {}, JudgeVerdict{}, prior, cfg);
    for (int trial = 0; trial < 5; ++trial) {
        std::shuffle(verdicts.begin(), verdicts.end(), rng);
        CHECK(aggregate_scores(verdicts, {}, JudgeVerdict{}, prior, cfg) == base);
    }

    AgentVerdict stray;
    stray.candidate = 99;
    stray.score = 1.0;
    stray.align = Align::True;
    verdicts.push_back(stray);
    std::vector<std::string> events;
    auto with_stray = aggregate_scores(verdicts, {}, JudgeVerdict{}, prior, cfg, &events);
    CHECK(with_stray == base);
    REQUIRE(!events.empty());
    CHECK(events[0].find("99") != std::string::npos);
}

TEST_CASE("run_dda with oracle agents decides the truth in round one") {
    auto backend = oracle_like({{10, 102}});
    kgtest::MapProfileProvider profiles;
    DebateConfig cfg;
    auto cs = make_set(10, {{102, 1.0}, {101, 0.97}, {100, 0.96}, {103, 0.5}, {104, 0.4},
                            {105, 0.3}});
    auto t = run_dda({10, Side::Source}, cs, dda_agents(backend), profiles, cfg);
    CHECK(t.decision.target.value == 102);
    CHECK(t.decision.provenance == Provenance::Dda);
    CHECK(t.decision.dda_round == 1);
    REQUIRE(t.rounds.size() == 1);
    CHECK(t.rounds[0].terminated);
    CHECK(t.rounds[0].v == 4);
    CHECK(t.rounds[0].v_agree == 4);
    CHECK_FALSE(t.degraded);
}

TEST_CASE("run_dda climbs the full ladder under all-abstain agents") {
    auto backend = std::make_shared<FnBackend>([](const PromptInfo& info) -> std::string {
        return info.role == Role::Judge ? "{}" : "[]";
    });
    kgtest::MapProfileProvider profiles;
    DebateConfig cfg;
    cfg.max_rounds = 4;
    // Low priors keep s1 under delta2 so expansion fires each round.
    std::vector<std::pair<std::uint64_t, double>> cands;
    for (std::uint64_t i = 0; i < 20; ++i) {
        cands.emplace_back(100 + i, 0.4 - 0.01 * static_cast<double>(i));
    }
    auto cs = make_set(10, cands);
    auto t = run_dda({10, Side::Source}, cs, dda_agents(backend), profiles, cfg);
    REQUIRE(t.rounds.size() == 4);
    CHECK(t.rounds[0].subset_k == 5);
    CHECK(t.rounds[1].subset_k == 10);
    CHECK(t.rounds[2].subset_k == 15);
    CHECK(t.rounds[3].subset_k == 20);
    CHECK(t.rounds[0].expanded);
    CHECK(t.rounds[1].expanded);
    CHECK(t.rounds[2].expanded);
    CHECK(t.rounds[3].terminated);  // forced stop at round n
    // Baseline preservation: the embedding top-1 wins.
    CHECK(t.decision.target.value == 100);
    CHECK(t.decision.dda_round == 4);
}

TEST_CASE("run_dda lets a heavy attack penalty flip the leader") {
    auto backend = std::make_shared<FnBackend>([](const PromptInfo& info) -> std::string {
        std::uint64_t top = 100, second = 101;
        switch (info.role) {
            case Role::Attack:
                return kgtest::attack_array(info.candidates, [&](std::uint64_t id) {
                    return id == top ? 0.9 : 0.0;
                });
            case Role::Judge:
                return kgtest::judge_object(second, true);
            default:
                return kgtest::specialist_array(
                    info.candidates, [&](std::uint64_t id) { return id == second ? 0.9 : 0.5; },
                    [&](std::uint64_t id) { return id == second ? "true" : "false"; });
        }
    });
    kgtest::MapProfileProvider profiles;
    DebateConfig cfg;
    auto cs = make_set(10, {{100, 0.9}, {101, 0.8}});
    auto t = run_dda({10, Side::Source}, cs, dda_agents(backend), profiles, cfg);
    CHECK(t.decision.target.value == 101);
    // Hand evaluation: c100 = 0.3*0.9 + 0.7*0.5 - 0.9 = -0.28;
    //                  c101 = 0.3*0.8 + 0.7*0.9 - 0.0 =  0.87.
    CHECK(t.rounds.back().aggregate.at(100) == doctest::Approx(-0.28));
    CHECK(t.rounds.back().aggregate.at(101) == doctest::Approx(0.87));
}

TEST_CASE("run_dda degrades gracefully when every backend call fails") {
    auto backend = std::make_shared<FnBackend>([](const PromptInfo&) -> std::string {
        throw Error(ErrorKind::Backend, "endpoint down");
    });
    kgtest::MapProfileProvider profiles;
    DebateConfig cfg;
    auto cs = make_set(10, {{100, 0.9}, {101, 0.8}, {102, 0.2}});
    auto t = run_dda({10, Side::Source}, cs, dda_agents(backend), profiles, cfg);
    CHECK(t.degraded);
    CHECK(t.decision.target.value == 100);  // aggregate argmax == prior argmax
    CHECK(t.rounds.size() == 1);
}

TEST_CASE("run_dda transcripts are byte-identical across runs") {
    auto make_transcript = [] {
        auto backend = oracle_like({{10, 101}});
        kgtest::MapProfileProvider profiles;
        DebateConfig cfg;
        auto cs = make_set(10, {{100, 0.9}, {101, 0.88}, {102, 0.2}});
        auto t = run_dda({10, Side::Source}, cs, dda_agents(backend), profiles, cfg);
        return transcript_to_json(t).dump();
    };
    CHECK(make_transcript() == make_transcript());
}

TEST_CASE("debate config validation") {
    DebateConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.ladder = {5, 5};
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg.ladder = {5, 10};
    cfg.compression_budget = 0.0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg.compression_budget = 0.15;
    cfg.max_rounds = 0;
    CHECK_THROWS_AS(cfg.validate(), Error);
}
