// Entity-alignment pipeline CLI: retrieval, preference-corpus construction,
// two-stage debate, and ranking evaluation over DBP15K-style inputs.

#include <CLI11.hpp>

#include "kgalign/corpus.hpp"
#include "kgalign/error.hpp"
#include "kgalign/pipeline.hpp"
#include "kgalign/synthetic.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace {

using namespace kgalign;

struct CliState {
    std::string config_path;
    std::vector<std::string> sets;  // key=value overrides
    std::vector<std::pair<std::string, std::string>> key_flags;  // --module.key values
    // Canonical shorthands.
    std::optional<double> delta1;
    std::optional<double> delta2;
    std::optional<int> rounds;
    std::optional<std::string> ladder;
    std::optional<std::string> mode;
    std::optional<std::string> out;
};

void add_common_flags(CLI::App* cmd, CliState& state) {
    cmd->add_option("--config", state.config_path, "JSON config file (flat module.key map)");
    cmd->add_option("--set", state.sets, "Override any config key, e.g. --set debate.rounds=4")
        ->take_all();
    // Every config key is also a flag of the same name.
    for (const auto& key : PipelineConfig::known_keys()) {
        cmd->add_option_function<std::string>(
               "--" + key,
               [key, &state](const std::string& value) { state.key_flags.emplace_back(key, value); })
            ->group("Config keys");
    }
    cmd->add_option("--delta1", state.delta1, "Uncertainty threshold (gap below => debated)");
    cmd->add_option("--delta2", state.delta2, "Expansion threshold on the top-1 score");
    cmd->add_option("--rounds", state.rounds, "Maximum debate rounds");
    cmd->add_option("--ladder", state.ladder, "Candidate subset ladder, e.g. 5,10,15,20");
    cmd->add_option("--mode", state.mode, "offline or live")
        ->check(CLI::IsMember({"offline", "live"}));
    cmd->add_option("--out", state.out, "Output directory");
}

PipelineConfig build_config(const CliState& state) {
    PipelineConfig cfg;
    if (!state.config_path.empty()) {
        cfg = PipelineConfig::from_json_file(state.config_path);
    }
    for (const auto& kv : state.sets) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) {
            throw_config("--set expects key=value, got: " + kv);
        }
        cfg.set_from_string(kv.substr(0, eq), kv.substr(eq + 1));
    }
    for (const auto& [key, value] : state.key_flags) {
        cfg.set_from_string(key, value);
    }
    if (state.delta1) cfg.debate.delta1 = *state.delta1;
    if (state.delta2) cfg.debate.delta2 = *state.delta2;
    if (state.rounds) cfg.debate.max_rounds = *state.rounds;
    if (state.ladder) cfg.set_from_string("debate.ladder", *state.ladder);
    if (state.mode) cfg.mode = *state.mode;
    if (state.out) cfg.out_dir = *state.out;
    return cfg;
}

int cmd_ingest(const PipelineConfig& cfg) {
    KnowledgeGraph gs = load_graph(cfg.ent1, cfg.rel1, cfg.attr1, Side::Source);
    KnowledgeGraph gt = load_graph(cfg.ent2, cfg.rel2, cfg.attr2, Side::Target);
    std::cout << "source: " << gs.entity_count() << " entities, "
              << gs.relation_triple_count() << " relation triples, "
              << gs.attribute_triple_count() << " attribute triples\n";
    std::cout << "target: " << gt.entity_count() << " entities, "
              << gt.relation_triple_count() << " relation triples, "
              << gt.attribute_triple_count() << " attribute triples\n";
    if (!cfg.seeds_path.empty()) {
        SeedPairs seeds = load_seed_pairs(cfg.seeds_path, gs, gt);
        std::cout << "seed pairs: " << seeds.pairs.size() << "\n";
    }
    return 0;
}

int cmd_build_corpus(const PipelineConfig& cfg) {
    KnowledgeGraph gs = load_graph(cfg.ent1, cfg.rel1, cfg.attr1, Side::Source);
    KnowledgeGraph gt = load_graph(cfg.ent2, cfg.rel2, cfg.attr2, Side::Target);
    SeedPairs seeds = load_seed_pairs(cfg.seeds_path, gs, gt);
    EmbeddingStore es = cfg.emb_format == "jsonl" ? load_embeddings_jsonl(cfg.emb1, Side::Source)
                                                  : load_embeddings_binary(cfg.emb1, Side::Source);
    EmbeddingStore et = cfg.emb_format == "jsonl" ? load_embeddings_jsonl(cfg.emb2, Side::Target)
                                                  : load_embeddings_binary(cfg.emb2, Side::Target);

    std::vector<std::uint64_t> sources;
    for (const auto& [s, _] : seeds.pairs) {
        sources.push_back(s);
    }
    NameNegativeOptions opts;
    opts.similarity_floor = cfg.name_similarity_floor;
    auto name_negs = name_negatives(sources, es, et, seeds, opts);
    auto degree_negs = degree_negatives(gs, sources);
    for (std::uint64_t skipped : degree_negs.skipped) {
        std::cerr << "note: source " << skipped << " has no neighbors; skipped\n";
    }

    auto built = build_corpus(seeds, name_negs, degree_negs.pairs, gs, gt, cfg.dataset_names,
                              cfg.name_similarity_floor);

    std::filesystem::create_directories(cfg.out_dir);
    {
        std::ofstream out(cfg.out_dir + "/dpo_corpus.jsonl", std::ios::binary);
        out << serialize_corpus(built.records);
    }
    {
        std::ofstream out(cfg.out_dir + "/corpus_manifest.json");
        out << manifest_json(built.manifest);
    }
    {
        std::ofstream out(cfg.out_dir + "/trainer_config.json");
        out << trainer_config_json();
    }
    {
        // Name-negative picks with their similarity, for floor tuning.
        std::ofstream out(cfg.out_dir + "/name_negatives.tsv");
        out.precision(17);
        for (const auto& p : name_negs) {
            out << p.source << '\t' << p.counterpart << '\t' << p.name_similarity << '\n';
        }
    }
    std::cout << "corpus: " << built.manifest.positive_count << " positive, "
              << built.manifest.name_negative_count << " name-negative, "
              << built.manifest.degree_negative_count << " degree-negative records -> "
              << cfg.out_dir << "/dpo_corpus.jsonl\n";
    return 0;
}

int cmd_retrieve(const PipelineConfig& cfg) {
    KnowledgeGraph gs = load_graph(cfg.ent1, cfg.rel1, cfg.attr1, Side::Source);
    KnowledgeGraph gt = load_graph(cfg.ent2, cfg.rel2, cfg.attr2, Side::Target);
    EmbeddingStore es = cfg.emb_format == "jsonl" ? load_embeddings_jsonl(cfg.emb1, Side::Source)
                                                  : load_embeddings_binary(cfg.emb1, Side::Source);
    EmbeddingStore et = cfg.emb_format == "jsonl" ? load_embeddings_jsonl(cfg.emb2, Side::Target)
                                                  : load_embeddings_binary(cfg.emb2, Side::Target);

    Matrix scores = cfg.similarity.metric == SimilarityMetric::Csls
                        ? csls_matrix(es, et, cfg.similarity, cfg.workers)
                        : cosine_matrix(es, et, cfg.workers);
    if (cfg.similarity.normalize) {
        minmax_normalize_rows(scores);
    }
    std::size_t k = std::min(cfg.retrieval_k, et.size());
    auto candidates = build_candidates(es.entity_ids(), et.entity_ids(), scores, k);
    UncertainSet uncertain = build_uncertain(candidates, cfg.debate.delta1);
    auto direct = direct_decisions(candidates, uncertain);

    std::filesystem::create_directories(cfg.out_dir);
    dump_candidates_jsonl(candidates, cfg.out_dir + "/candidates.jsonl");
    write_decisions_tsv(direct, cfg.out_dir + "/direct_decisions.tsv");
    {
        std::ofstream out(cfg.out_dir + "/uncertain.tsv");
        for (std::uint64_t id : uncertain.members) {
            out << id << '\n';
        }
    }
    std::cout << "retrieved top-" << k << " candidates for " << candidates.size()
              << " sources; " << uncertain.members.size() << " uncertain (delta1="
              << cfg.debate.delta1 << ")\n";
    return 0;
}

int cmd_run(const PipelineConfig& cfg) {
    PipelineResult result = run_pipeline_files(cfg);
    std::cout << "decisions: " << result.decisions.size() << " (uncertain "
              << result.uncertain_count << ", forwarded " << result.forwarded_count << ")\n";
    for (const auto& [k, v] : result.report.hits) {
        std::cout << "hits@" << k << ": " << v << "\n";
    }
    std::cout << "mrr: " << result.report.mrr << "\n";
    std::cout << "artifacts written to " << cfg.out_dir << "\n";
    return 0;
}

int cmd_evaluate(const PipelineConfig& cfg, const std::string& decisions_path) {
    KnowledgeGraph gs = load_graph(cfg.ent1, cfg.rel1, cfg.attr1, Side::Source);
    KnowledgeGraph gt = load_graph(cfg.ent2, cfg.rel2, cfg.attr2, Side::Target);
    SeedPairs test = load_seed_pairs(cfg.test_path, gs, gt);

    std::ifstream in(decisions_path);
    if (!in) {
        throw_data("cannot open decisions file: " + decisions_path);
    }
    std::map<std::uint64_t, std::uint64_t> decided;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::uint64_t s, t;
        double score;
        std::string prov;
        if (!(row >> s >> t >> score >> prov)) {
            throw_data("malformed decisions row: " + line);
        }
        decided[s] = t;
    }

    RankList ranks;
    for (const auto& [s, t_true] : test.pairs) {
        auto it = decided.find(s);
        ranks.ranks.push_back(it != decided.end() && it->second == t_true
                                  ? 1
                                  : RankList::kUnranked);
    }
    std::cout << "N: " << ranks.ranks.size() << "\n";
    std::cout << "hits@1: " << hits_at_k(ranks, 1) << "\n";
    return 0;
}

int cmd_debate(const PipelineConfig& cfg) {
    // Runs the full pipeline but is named for its debate artifacts; the
    // candidate stage is recomputed from the embeddings for consistency.
    PipelineResult result = run_pipeline_files(cfg);
    std::cout << "debated " << result.transcripts.size() << " entities ("
              << result.forwarded_count << " reached the deep stage); transcripts in "
              << cfg.out_dir << "/transcripts.jsonl\n";
    return 0;
}

int cmd_synth(const SyntheticConfig& synth_cfg, const std::string& out_dir) {
    SyntheticDataset ds = generate_synthetic(synth_cfg);
    write_synthetic_dataset(ds, out_dir);
    std::cout << "wrote synthetic dataset (" << ds.source.entity_count()
              << " entities/side) to " << out_dir << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Knowledge-graph entity alignment via embedding retrieval and multi-agent "
                 "debate"};
    app.require_subcommand(1);

    CliState state;
    std::string decisions_path = "out/decisions.tsv";

    auto* ingest = app.add_subcommand("ingest", "Load and validate the two graphs");
    add_common_flags(ingest, state);
    auto* corpus = app.add_subcommand("build-corpus",
                                      "Emit the DPO preference corpus and manifests");
    add_common_flags(corpus, state);
    auto* retrieve = app.add_subcommand("retrieve", "Build candidate sets and the uncertain set");
    add_common_flags(retrieve, state);
    auto* debate = app.add_subcommand("debate", "Run verification and deep debate");
    add_common_flags(debate, state);
    auto* evaluate = app.add_subcommand("evaluate", "Score a decisions file against test pairs");
    add_common_flags(evaluate, state);
    evaluate->add_option("--decisions", decisions_path, "Decisions TSV to evaluate");
    auto* run = app.add_subcommand("run", "End-to-end pipeline");
    add_common_flags(run, state);

    SyntheticConfig synth_cfg;
    std::string synth_out = "synthetic_data";
    auto* synth = app.add_subcommand("synth", "Generate a seeded synthetic dataset");
    synth->add_option("--seed", synth_cfg.seed, "RNG seed");
    synth->add_option("--entities", synth_cfg.entities, "Entities per side");
    synth->add_option("--collision-rate", synth_cfg.name_collision_rate,
                      "Fraction of entities drawn into name-collision groups");
    synth->add_option("--attr-noise", synth_cfg.attribute_noise, "Attribute/structure noise");
    synth->add_option("--seed-fraction", synth_cfg.seed_fraction, "Share of pairs used as seeds");
    synth->add_option("--out", synth_out, "Output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) {
            return cmd_synth(synth_cfg, synth_out);
        }
        PipelineConfig cfg = build_config(state);
        if (ingest->parsed()) return cmd_ingest(cfg);
        if (corpus->parsed()) return cmd_build_corpus(cfg);
        if (retrieve->parsed()) return cmd_retrieve(cfg);
        if (debate->parsed()) return cmd_debate(cfg);
        if (evaluate->parsed()) return cmd_evaluate(cfg, decisions_path);
        if (run->parsed()) return cmd_run(cfg);
    } catch (const kgalign::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
