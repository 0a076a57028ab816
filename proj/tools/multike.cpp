#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "multike/pipeline.hpp"

namespace fs = std::filesystem;
using namespace multike;

namespace {

constexpr const char* kVersion = "0.1.0";

// rng substreams owned by the CLI layer (the pipeline uses 1..5)
constexpr std::uint64_t kStreamSplit = 6;
constexpr std::uint64_t kStreamWordVectors = 7;

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// the config file applies before environment variables and flags, so it is
// located by scanning argv ahead of CLI11's own parse
std::string find_config_arg(int argc, char** argv) {
    for (int i = 1; i < argc; ++i) {
        std::string a = argv[i];
        if (a == "--config" && i + 1 < argc) return argv[i + 1];
        if (a.rfind("--config=", 0) == 0) return a.substr(9);
    }
    if (const char* env = std::getenv("MULTIKE_CONFIG")) return env;
    return "";
}

int run_gen_synth(const SyntheticSpec& spec, const std::string& out, int word_dim) {
    AlignmentDataset ds = generate_synthetic_pair(spec);
    write_dataset_dir(ds, out);
    if (word_dim > 0) {
        auto pool = synthetic_token_pool(spec);
        Rng rng(Rng::derive(spec.rng_seed, kStreamWordVectors));
        std::string text;
        char buf[32];
        for (const auto& token : pool) {
            std::vector<double> v(word_dim);
            double n2 = 0.0;
            for (auto& x : v) {
                x = rng.uniform(-1.0, 1.0);
                n2 += x * x;
            }
            n2 = std::sqrt(n2);
            text += token;
            for (double x : v) {
                std::snprintf(buf, sizeof(buf), " %.6f", n2 > 0.0 ? x / n2 : 0.0);
                text += buf;
            }
            text.push_back('\n');
        }
        write_file((fs::path(out) / "word_vectors.txt").string(), text);
    }
    std::cout << "wrote " << out << ": " << ds.source.entities.size() << "+"
              << ds.target.entities.size() << " entities, "
              << ds.source.relation_facts.size() + ds.target.relation_facts.size()
              << " relation facts, "
              << ds.source.attribute_facts.size() + ds.target.attribute_facts.size()
              << " attribute facts, " << ds.test_alignment.size() << " reference pairs\n";
    return 0;
}

nlohmann::json dataset_digests(const std::string& data_dir) {
    nlohmann::json digests;
    for (const char* name : {"rel_triples_1", "rel_triples_2", "attr_triples_1",
                             "attr_triples_2", "ent_links", "names_1", "names_2"}) {
        fs::path p = fs::path(data_dir) / name;
        if (fs::exists(p)) digests[name] = to_hex(fnv1a(read_file(p.string())));
    }
    return digests;
}

int run_train(const std::string& data, const std::string& out, TrainConfig cfg,
              const std::string& config_path) {
    cfg.validate();
    auto start = std::chrono::steady_clock::now();

    AlignmentDataset ds = load_dataset_dir(data);
    auto [seed_pairs, test_pairs] = split_alignment(
        ds.test_alignment, cfg.seed_ratio, Rng::derive(cfg.rng_seed, kStreamSplit));
    ds.seed_alignment = std::move(seed_pairs);
    ds.test_alignment = std::move(test_pairs);

    WordEmbeddingTable words;
    bool have_words = false;
    if (!cfg.word_vectors.empty()) {
        words = load_word_embeddings(read_file(cfg.word_vectors));
        have_words = true;
    }
    double load_s = seconds_since(start);

    auto train_start = std::chrono::steady_clock::now();
    TrainResult result = train_multike(ds, cfg, have_words ? &words : nullptr);
    double train_s = seconds_since(train_start);

    fs::create_directories(out);
    save_checkpoint(make_checkpoint(result), (fs::path(out) / "checkpoint.mke").string());
    write_file((fs::path(out) / "training_log.tsv").string(), training_log_tsv(result.log));

    auto links_tsv = [](const std::vector<std::pair<std::string, std::string>>& pairs) {
        std::string text;
        for (const auto& [s, t] : pairs) text += s + "\t" + t + "\n";
        return text;
    };
    write_file((fs::path(out) / "seed_links.tsv").string(), links_tsv(ds.seed_alignment));
    write_file((fs::path(out) / "test_links.tsv").string(), links_tsv(ds.test_alignment));

    nlohmann::json manifest;
    manifest["command"] = "train";
    manifest["version"] = kVersion;
    manifest["data_dir"] = data;
    if (!config_path.empty()) manifest["config_file"] = config_path;
    for (const auto& key : config_keys()) manifest["config"][key] = config_get(cfg, key);
    manifest["inputs"] = dataset_digests(data);
    if (have_words) manifest["inputs"]["word_vectors"] =
        to_hex(fnv1a(read_file(cfg.word_vectors)));
    manifest["seed_pairs"] = ds.seed_alignment.size();
    manifest["test_pairs"] = ds.test_alignment.size();
    manifest["timings"]["load_s"] = load_s;
    manifest["timings"]["train_s"] = train_s;
    write_file((fs::path(out) / "manifest.json").string(), manifest.dump(2) + "\n");

    const EpochLosses& last = result.log.epochs.back();
    std::cout << "trained " << cfg.epochs << " epochs (" << cfg.combination << ", d=" << cfg.dim
              << ") in " << train_s << "s; final losses: relation " << last.relation
              << ", attribute " << last.attribute << "\n"
              << "outputs in " << out << "\n";
    return 0;
}

// shared by evaluate and align
struct LoadedRun {
    AlignmentDataset ds;
    Vocabulary vocab;
    Checkpoint ckpt;
    std::vector<std::pair<std::string, std::string>> pairs;
};

LoadedRun load_run(const std::string& run, const std::string& data) {
    LoadedRun lr;
    lr.ds = load_dataset_dir(data);
    lr.vocab = Vocabulary(lr.ds.source, lr.ds.target);
    lr.ckpt = load_checkpoint((fs::path(run) / "checkpoint.mke").string());
    lr.pairs = parse_entity_links(read_file((fs::path(run) / "test_links.tsv").string()),
                                  lr.ds.source, lr.ds.target);
    return lr;
}

const Tensor& pick_matrix(const Checkpoint& ckpt, const std::string& matrix) {
    auto it = ckpt.tensors.find(matrix);
    if (it == ckpt.tensors.end())
        throw std::invalid_argument("checkpoint has no tensor named '" + matrix +
                                    "' (try combined, ent2, ent3, name)");
    return it->second;
}

int run_evaluate(const std::string& run, const std::string& data, const std::string& matrix,
                 const std::string& candidates, int threads, std::string out_json) {
    LoadedRun lr = load_run(run, data);
    auto result = evaluate_alignment(pick_matrix(lr.ckpt, matrix), lr.vocab, lr.pairs,
                                     candidates, threads);
    MetricReport report = compute_metrics(result);
    if (out_json.empty()) out_json = (fs::path(run) / "metrics.json").string();
    write_file(out_json, metrics_to_json(report));
    fs::path table_path = fs::path(out_json).replace_extension(".txt");
    write_file(table_path.string(), metrics_to_table(report));
    std::cout << metrics_to_table(report);
    return 0;
}

int run_align(const std::string& run, const std::string& data, const std::string& matrix,
              const std::string& candidates, int threads, std::string out_tsv) {
    LoadedRun lr = load_run(run, data);
    auto result = evaluate_alignment(pick_matrix(lr.ckpt, matrix), lr.vocab, lr.pairs,
                                     candidates, threads);
    std::vector<std::string> ids(lr.vocab.entity_count());
    for (int i = 0; i < lr.vocab.entity_count(); ++i) ids[i] = lr.vocab.entity_id(i);
    if (out_tsv.empty()) out_tsv = (fs::path(run) / "predictions.tsv").string();
    write_file(out_tsv, predictions_to_tsv(result, ids));
    std::cout << "wrote " << result.pairs.size() << " predictions to " << out_tsv << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-view knowledge graph embedding for entity alignment"};
    app.require_subcommand(1);

    // precedence: flags > MULTIKE_* environment > config file > defaults
    TrainConfig cfg;
    std::string config_path = find_config_arg(argc, argv);
    std::string config_dummy;
    try {
        if (!config_path.empty()) load_config_file(cfg, config_path);
        apply_env_overrides(cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    SyntheticSpec spec;
    std::string gen_out;
    int word_dim = 0;
    auto* gen = app.add_subcommand("gen-synth", "generate a synthetic aligned dataset pair");
    gen->add_option("--entities", spec.n_entities, "entities per graph");
    gen->add_option("--relations", spec.n_relations, "relations per graph");
    gen->add_option("--attributes", spec.n_attributes, "attributes per graph");
    gen->add_option("--name-noise", spec.name_noise, "per-name token substitution probability");
    gen->add_option("--dropout", spec.structure_dropout, "per-cloned-fact drop probability");
    gen->add_option("--seed", spec.rng_seed, "generator rng seed");
    gen->add_option("--rel-facts", spec.rel_facts_per_entity, "relation facts per entity");
    gen->add_option("--attr-density", spec.attr_density, "attribute fact probability");
    gen->add_option("--name-tokens", spec.name_tokens, "tokens per entity name");
    gen->add_option("--name-pool", spec.name_pool_words,
                    "distinct words available for names (0 = 8x entities)");
    gen->add_option("--word-dim", word_dim, "also emit word_vectors.txt at this dimension");
    gen->add_option("--config", config_dummy, "ignored for this subcommand");
    gen->add_option("--out", gen_out, "output dataset directory")->required();

    std::string train_data, train_out = "run";
    auto* train = app.add_subcommand("train", "train view and combined embeddings");
    train->add_option("--config", config_dummy, "key=value config file");
    train->add_option("--data", train_data, "dataset directory")->required();
    train->add_option("--out", train_out, "run output directory");
    train->add_option("--epochs", cfg.epochs, "outer training epochs (Q)");
    train->add_option("--lr", cfg.lr, "AdaGrad learning rate");
    train->add_option("--dim", cfg.dim, "embedding dimension d");
    train->add_option("--negatives", cfg.negatives, "corruptions per relation fact");
    train->add_option("--filters", cfg.filters, "CNN kernels");
    train->add_option("--kernel", cfg.kernel, "CNN kernel width c");
    train->add_option("--alpha1", cfg.alpha1, "soft-alignment name weight");
    train->add_option("--alpha2", cfg.alpha2, "soft-alignment embedding weight");
    train->add_option("--eta", cfg.eta, "soft-alignment threshold");
    train->add_option("--norm", cfg.norm, "relation-view norm: L1 | L2");
    train->add_option("--batch-size", cfg.batch_size, "facts per minibatch");
    train->add_option("--seed", cfg.rng_seed, "run rng seed");
    train->add_option("--combination", cfg.combination, "wva | ssl | itc");
    train->add_option("--seed-ratio", cfg.seed_ratio, "fraction of pairs used as seed");
    train->add_option("--use-cra", cfg.use_cra, "1 trains soft alignment losses, 0 skips them");
    train->add_option("--sg-window", cfg.sg_window, "char skip-gram window");
    train->add_option("--sg-negatives", cfg.sg_negatives, "char skip-gram negatives");
    train->add_option("--sg-epochs", cfg.sg_epochs, "char skip-gram epochs");
    train->add_option("--ae-epochs", cfg.ae_epochs, "autoencoder epochs");
    train->add_option("--ae-lr", cfg.ae_lr, "autoencoder learning rate");
    train->add_option("--ae-batch", cfg.ae_batch, "autoencoder batch size");
    train->add_option("--ssl-epochs", cfg.ssl_epochs, "shared-space epochs");
    train->add_option("--ssl-lr", cfg.ssl_lr, "shared-space learning rate");
    train->add_option("--word-vectors", cfg.word_vectors, "pre-trained token vector file");
    train->add_option("--threads", cfg.threads, "evaluation threads");

    std::string eval_run, eval_data, eval_matrix = "combined", eval_out;
    auto* eval = app.add_subcommand("evaluate", "score alignment quality of a trained run");
    eval->add_option("--config", config_dummy, "key=value config file");
    eval->add_option("--run", eval_run, "run directory from train")->required();
    eval->add_option("--data", eval_data, "dataset directory")->required();
    eval->add_option("--matrix", eval_matrix, "combined | ent2 | ent3 | name");
    eval->add_option("--candidates", cfg.candidates, "test | all");
    eval->add_option("--threads", cfg.threads, "ranking threads (0 = hardware)");
    eval->add_option("--out", eval_out, "metrics JSON path (default <run>/metrics.json)");

    std::string align_run, align_data, align_matrix = "combined", align_out;
    auto* align = app.add_subcommand("align", "emit nearest-neighbor predictions");
    align->add_option("--config", config_dummy, "key=value config file");
    align->add_option("--run", align_run, "run directory from train")->required();
    align->add_option("--data", align_data, "dataset directory")->required();
    align->add_option("--matrix", align_matrix, "combined | ent2 | ent3 | name");
    align->add_option("--candidates", cfg.candidates, "test | all");
    align->add_option("--threads", cfg.threads, "ranking threads (0 = hardware)");
    align->add_option("--out", align_out, "predictions TSV path (default <run>/predictions.tsv)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return run_gen_synth(spec, gen_out, word_dim);
        if (train->parsed()) return run_train(train_data, train_out, cfg, config_path);
        if (eval->parsed())
            return run_evaluate(eval_run, eval_data, eval_matrix, cfg.candidates, cfg.threads,
                                eval_out);
        if (align->parsed())
            return run_align(align_run, align_data, align_matrix, cfg.candidates, cfg.threads,
                             align_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
