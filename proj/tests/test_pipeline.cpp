#include "doctest.h"

#include <set>
#include <string>
#include <vector>

#include "multike/checkpoint.hpp"
#include "multike/kg.hpp"
#include "multike/pipeline.hpp"

using namespace multike;

namespace {

AlignmentDataset tiny_dataset() {
    SyntheticSpec spec;
    spec.n_entities = 24;
    spec.n_relations = 3;
    spec.n_attributes = 3;
    spec.rel_facts_per_entity = 2;
    spec.attr_density = 0.5;
    spec.name_tokens = 2;
    spec.name_noise = 0.1;
    spec.rng_seed = 4;
    AlignmentDataset ds = generate_synthetic_pair(spec);
    auto [seed, test] = split_alignment(ds.test_alignment, 0.3, 4);
    ds.seed_alignment = seed;
    ds.test_alignment = test;
    return ds;
}

TrainConfig tiny_config() {
    TrainConfig cfg;
    cfg.epochs = 1;
    cfg.lr = 0.05;
    cfg.dim = 8;
    cfg.kernel = 3;
    cfg.negatives = 2;
    cfg.batch_size = 64;
    cfg.sg_epochs = 2;
    cfg.ae_epochs = 2;
    cfg.ae_batch = 16;
    cfg.ssl_epochs = 20;
    cfg.rng_seed = 1;
    return cfg;
}

} // namespace

TEST_CASE("in-training combination runs every pass in schedule order") {
    TrainConfig cfg = tiny_config();
    TrainResult res = train_multike(tiny_dataset(), cfg, nullptr);

    std::vector<std::string> expected{
        "0:relation-view",        "0:attribute-view",      "0:itc",
        "0:cross-entity-rel",     "0:cross-entity-attr",   "0:update-soft-alignment",
        "0:cross-rel-alignment",  "0:cross-attr-alignment"};
    CHECK(res.log.steps == expected);

    REQUIRE(res.log.epochs.size() == 1);
    CHECK(res.log.epochs[0].relation > 0.0);
    CHECK(res.log.epochs[0].attribute > 0.0);
    CHECK(res.log.epochs[0].itc > 0.0);
    CHECK(res.log.autoencoder_curve.size() == 2);

    CHECK(res.combined.rows() == static_cast<std::size_t>(res.vocab.entity_count()));
    CHECK(res.combined.cols() == 8);
    CHECK(res.params.has(kCombined));
    CHECK(res.params.at("ent2").all_finite());
    CHECK(res.combined.all_finite());
    // the name view is an input, never a trainable parameter
    CHECK(!res.params.has("name"));
    CHECK(res.params.trainable(kCombined)); // combined trains under itc
}

TEST_CASE("late combinations skip the in-training pass and run at the end") {
    TrainConfig cfg = tiny_config();
    cfg.combination = "wva";
    AlignmentDataset ds = tiny_dataset();
    TrainResult wva = train_multike(ds, cfg, nullptr);
    for (const auto& s : wva.log.steps) CHECK(s.find(":itc") == std::string::npos);
    CHECK(wva.log.steps.back() == "final:wva");
    CHECK(wva.log.ssl_curve.empty());
    CHECK(wva.params.has(kCombined));
    CHECK(!wva.params.trainable(kCombined));

    cfg.combination = "ssl";
    TrainResult ssl = train_multike(ds, cfg, nullptr);
    CHECK(ssl.log.steps.back() == "final:ssl");
    CHECK(ssl.log.ssl_curve.size() == 20);
    REQUIRE(ssl.log.ssl_orth_residuals.size() == 3); // name, relation, attribute views
    CHECK(ssl.params.has("map1"));
    CHECK(ssl.params.has("map3"));
    CHECK(!ssl.params.has("map4"));
    CHECK(ssl.params.at("map1").rows() == 8);
    CHECK(ssl.params.at("map1").cols() == 8);
    CHECK(ssl.combined.all_finite());
}

TEST_CASE("soft alignment can be disabled wholesale") {
    TrainConfig cfg = tiny_config();
    cfg.use_cra = 0;
    TrainResult res = train_multike(tiny_dataset(), cfg, nullptr);
    std::vector<std::string> expected{"0:relation-view", "0:attribute-view", "0:itc",
                                      "0:cross-entity-rel", "0:cross-entity-attr"};
    CHECK(res.log.steps == expected);
    CHECK(res.log.epochs[0].cra_rel == 0.0);
    CHECK(res.log.epochs[0].cra_attr == 0.0);
    CHECK(res.log.epochs[0].soft_rel_pairs == 0);
    CHECK(res.log.epochs[0].soft_attr_pairs == 0);
}

TEST_CASE("training is bit-for-bit deterministic in the seed") {
    AlignmentDataset ds = tiny_dataset();
    TrainConfig cfg = tiny_config();
    cfg.epochs = 2;
    TrainResult r1 = train_multike(ds, cfg, nullptr);
    TrainResult r2 = train_multike(ds, cfg, nullptr);
    CHECK(serialize_checkpoint(make_checkpoint(r1)) ==
          serialize_checkpoint(make_checkpoint(r2)));
    CHECK(training_log_tsv(r1.log) == training_log_tsv(r2.log));

    cfg.rng_seed = 99;
    TrainResult r3 = train_multike(ds, cfg, nullptr);
    CHECK(serialize_checkpoint(make_checkpoint(r1)) !=
          serialize_checkpoint(make_checkpoint(r3)));
}

TEST_CASE("name embeddings are frozen across the whole loop") {
    AlignmentDataset ds = tiny_dataset();
    TrainConfig cfg = tiny_config();
    TrainResult short_run = train_multike(ds, cfg, nullptr);
    cfg.epochs = 3;
    TrainResult long_run = train_multike(ds, cfg, nullptr);
    REQUIRE(short_run.names.vectors.size() == long_run.names.vectors.size());
    for (std::size_t i = 0; i < short_run.names.vectors.size(); ++i)
        CHECK(short_run.names.vectors[i] == long_run.names.vectors[i]);
    CHECK(short_run.names.present == long_run.names.present);
}

TEST_CASE("an empty seed alignment turns off the cross-entity losses") {
    AlignmentDataset ds = tiny_dataset();
    ds.test_alignment.insert(ds.test_alignment.end(), ds.seed_alignment.begin(),
                             ds.seed_alignment.end());
    ds.seed_alignment.clear();
    TrainConfig cfg = tiny_config();
    cfg.epochs = 2;
    TrainResult res = train_multike(ds, cfg, nullptr);
    for (const auto& el : res.log.epochs) {
        CHECK(el.ce_rel == 0.0);
        CHECK(el.ce_attr == 0.0);
    }
}

TEST_CASE("checkpoints carry the model, the name matrix and its mask") {
    TrainResult res = train_multike(tiny_dataset(), tiny_config(), nullptr);
    Checkpoint ckpt = make_checkpoint(res);
    CHECK(ckpt.dim == 8);
    std::set<std::string> names;
    for (const auto& [name, t] : ckpt.tensors) names.insert(name);
    std::set<std::string> expected{"attr",  "combined", "conv", "ent2",     "ent3",
                                   "proj",  "proj_b",   "rel",  "name",     "name_mask"};
    CHECK(names == expected);
    CHECK(ckpt.tensors.at("name").rows() ==
          static_cast<std::size_t>(res.vocab.entity_count()));
    CHECK(ckpt.tensors.at("name_mask").rows() == 1);
    CHECK(ckpt.tensors.at("name_mask").cols() ==
          static_cast<std::size_t>(res.vocab.entity_count()));
}

TEST_CASE("evaluation pools scale from test targets to the whole graph") {
    AlignmentDataset ds = tiny_dataset();
    TrainResult res = train_multike(ds, tiny_config(), nullptr);

    AlignmentResult test_pool =
        evaluate_alignment(res.combined, res.vocab, ds.test_alignment, "test", 1);
    REQUIRE(test_pool.pairs.size() == ds.test_alignment.size());
    CHECK(test_pool.pairs[0].candidates.size() == ds.test_alignment.size());

    AlignmentResult all_pool =
        evaluate_alignment(res.combined, res.vocab, ds.test_alignment, "all", 2);
    auto [b_first, b_last] = res.vocab.entity_range(Side::B);
    CHECK(all_pool.pairs[0].candidates.size() ==
          static_cast<std::size_t>(b_last - b_first));

    MetricReport m = compute_metrics(all_pool);
    compute_prf(all_pool, m);
    CHECK(m.hits1 >= 0.0);
    CHECK(m.hits10 >= m.hits1);
    CHECK(m.mean_rank >= 1.0);

    std::vector<std::pair<std::string, std::string>> bogus{{"nope", "nada"}};
    CHECK_THROWS(evaluate_alignment(res.combined, res.vocab, bogus, "test", 1));
}

TEST_CASE("the log dump is a well-formed tsv of every stage") {
    TrainConfig cfg = tiny_config();
    cfg.combination = "ssl";
    TrainResult res = train_multike(tiny_dataset(), cfg, nullptr);
    std::string tsv = training_log_tsv(res.log);
    auto lines = split(tsv, '\n');
    REQUIRE(!lines.empty());
    CHECK(lines[0] == "stage\tepoch\tstep\tvalue");
    bool saw_trace = false, saw_ae = false, saw_loop = false, saw_ssl = false,
         saw_final = false;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        auto fields = split(lines[i], '\t');
        REQUIRE(fields.size() == 4);
        saw_trace = saw_trace || fields[0] == "trace";
        saw_ae = saw_ae || fields[0] == "ae";
        saw_loop = saw_loop || (fields[0] == "loop" && fields[2] == "relation-view");
        saw_ssl = saw_ssl || (fields[0] == "ssl" && fields[2] == "orth-residual");
        saw_final = saw_final || (fields[0] == "trace" && fields[1] == "-1");
    }
    CHECK(saw_trace);
    CHECK(saw_ae);
    CHECK(saw_loop);
    CHECK(saw_ssl);
    CHECK(saw_final);
}

TEST_CASE("training validates its inputs up front") {
    AlignmentDataset ds = tiny_dataset();
    TrainConfig cfg = tiny_config();
    cfg.kernel = 8; // kernel must stay below dim
    CHECK_THROWS(train_multike(ds, cfg, nullptr));

    AlignmentDataset empty;
    CHECK_THROWS(train_multike(empty, tiny_config(), nullptr));
}
