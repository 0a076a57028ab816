#include "multike/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <thread>

namespace multike {

namespace {

// deterministic rng substreams of the run seed
constexpr std::uint64_t kStreamSkipGram = 1;
constexpr std::uint64_t kStreamAutoencInit = 2;
constexpr std::uint64_t kStreamAutoencOrder = 3;
constexpr std::uint64_t kStreamModelInit = 4;
constexpr std::uint64_t kStreamLoop = 5;

void check_finite(double loss, const char* component, int epoch) {
    if (!std::isfinite(loss))
        throw std::runtime_error("non-finite loss in " + std::string(component) + " at epoch " +
                                 std::to_string(epoch));
}

// shuffles the items, then hands them to fn in contiguous batches
template <typename T, typename Fn>
void for_batches(std::vector<T>& items, int batch_size, Rng& rng, Fn&& fn) {
    if (items.empty()) return;
    rng.shuffle(items);
    for (std::size_t done = 0; done < items.size();) {
        std::size_t take = std::min<std::size_t>(batch_size, items.size() - done);
        std::vector<T> batch(items.begin() + done, items.begin() + done + take);
        fn(std::move(batch));
        done += take;
    }
}

// every string the literal encoder must handle: explicit literals, entity
// names, and relation/attribute local names
std::set<std::string> literal_corpus(const AlignmentDataset& ds, const Vocabulary& vocab) {
    std::set<std::string> corpus(ds.source.literals.begin(), ds.source.literals.end());
    corpus.insert(ds.target.literals.begin(), ds.target.literals.end());
    for (int i = 0; i < vocab.entity_count(); ++i) {
        const KnowledgeGraph& kg = vocab.entity_side(i) == Side::A ? ds.source : ds.target;
        corpus.insert(kg.effective_name(vocab.entity_id(i)));
    }
    for (int i = 0; i < vocab.relation_count(); ++i)
        corpus.insert(extract_name(vocab.relation_id(i)));
    for (int i = 0; i < vocab.attribute_count(); ++i)
        corpus.insert(extract_name(vocab.attribute_id(i)));
    corpus.erase("");
    return corpus;
}

Tensor masked_view_mean(const ParameterStore& params, const std::vector<ViewRef>& views) {
    const Tensor* first = views[0].param ? &params.at(views[0].param) : views[0].fixed;
    Tensor out(first->rows(), first->cols());
    for (std::size_t r = 0; r < out.rows(); ++r) {
        int active = 0;
        for (const auto& view : views) {
            if (view.mask && !(*view.mask)[r]) continue;
            const Tensor& h = view.param ? params.at(view.param) : *view.fixed;
            axpy(1.0, h.row(r), out.row(r));
            ++active;
        }
        if (active > 1)
            for (auto& v : out.row(r)) v /= static_cast<double>(active);
    }
    return out;
}

} // namespace

TrainResult train_multike(const AlignmentDataset& ds, const TrainConfig& config,
                          const WordEmbeddingTable* words) {
    config.validate();
    if (ds.source.entities.empty() || ds.target.entities.empty())
        throw std::invalid_argument("train_multike: both graphs need at least one entity");
    std::size_t d = static_cast<std::size_t>(config.dim);
    if (words && words->dim() != 0 && words->dim() != d)
        throw std::invalid_argument("word-vector dimension " + std::to_string(words->dim()) +
                                    " does not match configured dim " + std::to_string(d));
    Norm norm = parse_norm(config.norm);

    TrainResult res;
    res.vocab = Vocabulary(ds.source, ds.target);
    const Vocabulary& vocab = res.vocab;

    // --- literal stage: character vectors, autoencoder, name embeddings ---
    auto corpus = literal_corpus(ds, vocab);
    SkipGramConfig sg;
    sg.dim = d;
    sg.window = config.sg_window;
    sg.negatives = config.sg_negatives;
    sg.epochs = config.sg_epochs;
    sg.rng_seed = Rng::derive(config.rng_seed, kStreamSkipGram);
    CharEmbeddingTable chars = train_char_skipgram(corpus, sg);

    ParameterStore autoenc;
    Rng ae_rng(Rng::derive(config.rng_seed, kStreamAutoencInit));
    init_autoencoder(autoenc, d, ae_rng);
    LiteralEncoder encoder(words, &chars, &autoenc, d);
    std::vector<std::vector<double>> windows;
    windows.reserve(corpus.size());
    for (const auto& lit : corpus) windows.push_back(encoder.window(lit));
    res.log.autoencoder_curve =
        train_autoencoder(autoenc, windows, config.ae_epochs, config.ae_lr, config.ae_batch,
                          Rng::derive(config.rng_seed, kStreamAutoencOrder));

    res.names = embed_entity_names(vocab, ds.source, ds.target, encoder);

    Tensor rel_names(std::max(vocab.relation_count(), 1), d);
    for (int i = 0; i < vocab.relation_count(); ++i) {
        auto v = encoder.embed(extract_name(vocab.relation_id(i)));
        std::copy(v.begin(), v.end(), rel_names.row(i).begin());
    }
    Tensor attr_names(std::max(vocab.attribute_count(), 1), d);
    for (int i = 0; i < vocab.attribute_count(); ++i) {
        auto v = encoder.embed(extract_name(vocab.attribute_id(i)));
        std::copy(v.begin(), v.end(), attr_names.row(i).begin());
    }

    // frozen value embeddings, one row per distinct value literal
    std::set<std::string> value_set;
    for (const auto& f : ds.source.attribute_facts) value_set.insert(f[2]);
    for (const auto& f : ds.target.attribute_facts) value_set.insert(f[2]);
    std::map<std::string, int> value_index;
    Tensor values(std::max<std::size_t>(value_set.size(), 1), d);
    for (const auto& lit : value_set) {
        int row = static_cast<int>(value_index.size());
        value_index[lit] = row;
        auto v = encoder.embed(lit);
        std::copy(v.begin(), v.end(), values.row(row).begin());
    }

    // --- fact and alignment index structures ---
    std::vector<RelTriple> rel_facts = index_relation_facts(ds.source, Side::A, vocab);
    {
        auto more = index_relation_facts(ds.target, Side::B, vocab);
        rel_facts.insert(rel_facts.end(), more.begin(), more.end());
    }
    std::set<RelTriple> rel_positive(rel_facts.begin(), rel_facts.end());

    std::vector<AttrTriple> attr_facts =
        index_attribute_facts(ds.source, Side::A, vocab, value_index);
    {
        auto more = index_attribute_facts(ds.target, Side::B, vocab, value_index);
        attr_facts.insert(attr_facts.end(), more.begin(), more.end());
    }

    std::map<int, int> seed;
    for (const auto& [s, t] : ds.seed_alignment) {
        int a = vocab.entity_index(Side::A, s);
        int b = vocab.entity_index(Side::B, t);
        seed[a] = b;
        seed[b] = a;
    }
    std::vector<RelTriple> ce_rel_facts;
    for (const auto& f : rel_facts)
        if (seed.count(f.head) || seed.count(f.tail)) ce_rel_facts.push_back(f);
    std::vector<AttrTriple> ce_attr_facts;
    for (const auto& f : attr_facts)
        if (seed.count(f.head)) ce_attr_facts.push_back(f);

    // --- trainable parameters ---
    ParameterStore& params = res.params;
    Rng init_rng(Rng::derive(config.rng_seed, kStreamModelInit));
    params.add(kRelEnt, xavier_init(std::max(vocab.entity_count(), 1), d, init_rng));
    params.add(kRelRel, xavier_init(std::max(vocab.relation_count(), 1), d, init_rng));
    params.add(kAttrEnt, xavier_init(std::max(vocab.entity_count(), 1), d, init_rng));
    params.add(kAttrAttr, xavier_init(std::max(vocab.attribute_count(), 1), d, init_rng));
    init_attribute_cnn(params, d, config.kernel, config.filters, init_rng);

    const bool itc = config.combination == "itc";
    std::vector<ViewRef> views{{nullptr, &res.names.vectors, &res.names.present},
                               {kRelEnt, nullptr, nullptr},
                               {kAttrEnt, nullptr, nullptr}};
    if (itc) params.add(kCombined, masked_view_mean(params, views));
    std::vector<int> all_rows(static_cast<std::size_t>(vocab.entity_count()));
    for (std::size_t r = 0; r < all_rows.size(); ++r) all_rows[r] = static_cast<int>(r);

    AdaGrad opt(config.lr);
    Rng loop_rng(Rng::derive(config.rng_seed, kStreamLoop));
    Gradients grads(params);

    // --- the alternating epoch loop ---
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        EpochLosses el;
        auto record = [&](const char* name) {
            res.log.steps.push_back(std::to_string(epoch) + ":" + name);
        };

        record("relation-view");
        for_batches(rel_facts, config.batch_size, loop_rng, [&](std::vector<RelTriple> batch) {
            std::vector<LabeledRelTriple> labeled;
            labeled.reserve(batch.size() * (1 + config.negatives));
            for (const auto& f : batch) {
                labeled.push_back({f, 1.0});
                auto negs = sample_negatives(f, config.negatives, vocab.entity_count(),
                                             rel_positive, loop_rng);
                labeled.insert(labeled.end(), negs.begin(), negs.end());
            }
            grads.clear();
            double l = loss_relation_view(params, labeled, norm, &grads);
            check_finite(l, "relation-view", epoch);
            el.relation += l;
            opt.step(params, grads);
        });

        record("attribute-view");
        for_batches(attr_facts, config.batch_size, loop_rng, [&](std::vector<AttrTriple> batch) {
            grads.clear();
            double l = loss_attribute_view(params, batch, values, &grads);
            check_finite(l, "attribute-view", epoch);
            el.attribute += l;
            opt.step(params, grads);
        });

        if (itc) {
            record("itc");
            for_batches(all_rows, config.batch_size, loop_rng, [&](std::vector<int> batch) {
                grads.clear();
                double l = loss_itc(params, views, &grads, &batch);
                check_finite(l, "itc", epoch);
                el.itc += l;
                opt.step(params, grads);
            });
        }

        record("cross-entity-rel");
        for_batches(ce_rel_facts, config.batch_size, loop_rng,
                    [&](std::vector<RelTriple> batch) {
                        grads.clear();
                        double l = loss_cross_entity_rel(params, batch, seed, norm, &grads);
                        check_finite(l, "cross-entity-rel", epoch);
                        el.ce_rel += l;
                        opt.step(params, grads);
                    });

        record("cross-entity-attr");
        for_batches(ce_attr_facts, config.batch_size, loop_rng,
                    [&](std::vector<AttrTriple> batch) {
                        grads.clear();
                        double l = loss_cross_entity_attr(params, batch, seed, values, &grads);
                        check_finite(l, "cross-entity-attr", epoch);
                        el.ce_attr += l;
                        opt.step(params, grads);
                    });

        if (config.use_cra) {
            record("update-soft-alignment");
            SoftAlignment soft_rel = update_soft_alignment(
                SoftKind::Relation, config.eta, config.alpha1, config.alpha2, rel_names,
                params.at(kRelRel), vocab.relation_range(Side::A),
                vocab.relation_range(Side::B));
            SoftAlignment soft_attr = update_soft_alignment(
                SoftKind::Attribute, config.eta, config.alpha1, config.alpha2, attr_names,
                params.at(kAttrAttr), vocab.attribute_range(Side::A),
                vocab.attribute_range(Side::B));
            SoftMap soft_rel_map = soft_rel.by_item();
            SoftMap soft_attr_map = soft_attr.by_item();
            el.soft_rel_pairs = static_cast<int>(soft_rel.entries.size());
            el.soft_attr_pairs = static_cast<int>(soft_attr.entries.size());

            record("cross-rel-alignment");
            std::vector<RelTriple> cra_rel_facts;
            for (const auto& f : rel_facts)
                if (soft_rel_map.count(f.relation)) cra_rel_facts.push_back(f);
            for_batches(cra_rel_facts, config.batch_size, loop_rng,
                        [&](std::vector<RelTriple> batch) {
                            grads.clear();
                            double l = loss_cross_rel_alignment(params, batch, soft_rel_map,
                                                                norm, &grads);
                            check_finite(l, "cross-rel-alignment", epoch);
                            el.cra_rel += l;
                            opt.step(params, grads);
                        });

            record("cross-attr-alignment");
            std::vector<AttrTriple> cra_attr_facts;
            for (const auto& f : attr_facts)
                if (soft_attr_map.count(f.attribute)) cra_attr_facts.push_back(f);
            for_batches(cra_attr_facts, config.batch_size, loop_rng,
                        [&](std::vector<AttrTriple> batch) {
                            grads.clear();
                            double l = loss_cross_attr_alignment(params, batch, soft_attr_map,
                                                                 values, &grads);
                            check_finite(l, "cross-attr-alignment", epoch);
                            el.cra_attr += l;
                            opt.step(params, grads);
                        });
        }

        // translational norm constraint on the relation view's entity rows
        // (unit sphere after each epoch), the usual TransE-style guard
        // against embedding-cloud collapse
        {
            Tensor& m = params.at(kRelEnt);
            for (std::size_t r = 0; r < m.rows(); ++r) {
                auto row = m.row(r);
                double n2 = norm2(row);
                if (n2 > 0.0)
                    for (auto& x : row) x /= n2;
            }
        }

        res.log.epochs.push_back(el);
    }

    // --- final combination ---
    if (itc) {
        res.combined = params.at(kCombined);
    } else if (config.combination == "wva") {
        res.log.steps.push_back("final:wva");
        res.combined = combine_wva_matrix(params, views);
        params.add(kCombined, res.combined, false);
    } else {
        res.log.steps.push_back("final:ssl");
        std::vector<FixedView> fixed{{&res.names.vectors, &res.names.present},
                                     {&params.at(kRelEnt), nullptr},
                                     {&params.at(kAttrEnt), nullptr}};
        SslResult ssl = train_shared_space(fixed, config.ssl_epochs, config.ssl_lr);
        res.combined = ssl.combined;
        res.log.ssl_curve = std::move(ssl.loss_curve);
        res.log.ssl_orth_residuals = std::move(ssl.orth_residuals);
        params.add(kCombined, res.combined, false);
        for (std::size_t i = 0; i < ssl.maps.size(); ++i)
            params.add(map_param_name(static_cast<int>(i) + 1), ssl.maps[i], false);
    }
    return res;
}

std::string training_log_tsv(const TrainLog& log) {
    std::string out = "stage\tepoch\tstep\tvalue\n";
    char buf[128];
    auto line = [&](const char* stage, int epoch, const std::string& step, double value) {
        std::snprintf(buf, sizeof(buf), "%s\t%d\t%s\t%.9g\n", stage, epoch, step.c_str(), value);
        out += buf;
    };
    for (std::size_t i = 0; i < log.steps.size(); ++i) {
        auto colon = log.steps[i].find(':');
        std::string epoch_part = log.steps[i].substr(0, colon);
        std::string name = log.steps[i].substr(colon + 1);
        int epoch = epoch_part == "final" ? -1 : std::stoi(epoch_part);
        line("trace", epoch, name, static_cast<double>(i + 1));
    }
    for (std::size_t i = 0; i < log.autoencoder_curve.size(); ++i)
        line("ae", static_cast<int>(i), "loss", log.autoencoder_curve[i]);
    for (std::size_t e = 0; e < log.epochs.size(); ++e) {
        const EpochLosses& el = log.epochs[e];
        int epoch = static_cast<int>(e);
        line("loop", epoch, "relation-view", el.relation);
        line("loop", epoch, "attribute-view", el.attribute);
        line("loop", epoch, "itc", el.itc);
        line("loop", epoch, "cross-entity-rel", el.ce_rel);
        line("loop", epoch, "cross-entity-attr", el.ce_attr);
        line("loop", epoch, "soft-rel-pairs", el.soft_rel_pairs);
        line("loop", epoch, "soft-attr-pairs", el.soft_attr_pairs);
        line("loop", epoch, "cross-rel-alignment", el.cra_rel);
        line("loop", epoch, "cross-attr-alignment", el.cra_attr);
    }
    for (std::size_t i = 0; i < log.ssl_curve.size(); ++i)
        line("ssl", static_cast<int>(i), "loss", log.ssl_curve[i]);
    for (std::size_t i = 0; i < log.ssl_orth_residuals.size(); ++i)
        line("ssl", static_cast<int>(i), "orth-residual", log.ssl_orth_residuals[i]);
    return out;
}

Checkpoint make_checkpoint(const TrainResult& result) {
    Checkpoint ckpt;
    ckpt.dim = static_cast<std::uint32_t>(result.combined.cols());
    for (const auto& [name, tensor] : result.params.tensors()) ckpt.tensors.emplace(name, tensor);
    ckpt.tensors.emplace("name", result.names.vectors);
    Tensor mask(1, std::max<std::size_t>(result.names.present.size(), 1));
    for (std::size_t i = 0; i < result.names.present.size(); ++i)
        mask[i] = result.names.present[i] ? 1.0 : 0.0;
    ckpt.tensors.emplace("name_mask", mask);
    return ckpt;
}

AlignmentResult evaluate_alignment(const Tensor& matrix, const Vocabulary& vocab,
                                   const std::vector<std::pair<std::string, std::string>>& pairs,
                                   const std::string& candidates, int threads) {
    if (pairs.empty()) throw std::invalid_argument("evaluate_alignment: no reference pairs");
    std::vector<std::pair<int, int>> idx_pairs;
    idx_pairs.reserve(pairs.size());
    for (const auto& [s, t] : pairs)
        idx_pairs.emplace_back(vocab.entity_index(Side::A, s), vocab.entity_index(Side::B, t));

    std::vector<int> pool;
    if (candidates == "all") {
        auto [first, last] = vocab.entity_range(Side::B);
        for (int i = first; i < last; ++i) pool.push_back(i);
    } else if (candidates == "test") {
        std::set<int> targets;
        for (const auto& [_, t] : idx_pairs) targets.insert(t);
        pool.assign(targets.begin(), targets.end());
    } else {
        throw std::invalid_argument("candidates must be test or all, got: " + candidates);
    }
    if (threads <= 0) {
        unsigned hw = std::thread::hardware_concurrency();
        threads = hw == 0 ? 1 : static_cast<int>(hw);
    }
    return rank_candidates(matrix, idx_pairs, pool, threads);
}

} // namespace multike
