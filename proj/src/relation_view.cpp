#include "multike/relation_view.hpp"

#include <cmath>

namespace multike {

Norm parse_norm(const std::string& text) {
    if (text == "L1" || text == "l1") return Norm::L1;
    if (text == "L2" || text == "l2") return Norm::L2;
    throw std::invalid_argument("norm must be L1 or L2, got: " + text);
}

std::vector<RelTriple> index_relation_facts(const KnowledgeGraph& kg, Side side,
                                            const Vocabulary& vocab) {
    std::vector<RelTriple> out;
    out.reserve(kg.relation_facts.size());
    for (const auto& f : kg.relation_facts)
        out.push_back({vocab.entity_index(side, f[0]), vocab.relation_index(side, f[1]),
                       vocab.entity_index(side, f[2])});
    return out;
}

double score_rel(std::span<const double> h, std::span<const double> r,
                 std::span<const double> t, Norm norm) {
    if (h.size() != r.size() || h.size() != t.size())
        throw std::invalid_argument("score_rel: dimension mismatch");
    double acc = 0.0;
    if (norm == Norm::L1) {
        for (std::size_t i = 0; i < h.size(); ++i) acc += std::fabs(h[i] + r[i] - t[i]);
    } else {
        for (std::size_t i = 0; i < h.size(); ++i) {
            double u = h[i] + r[i] - t[i];
            acc += u * u;
        }
        acc = std::sqrt(acc);
    }
    return -acc;
}

double score_rel(const ParameterStore& params, const RelTriple& f, Norm norm) {
    const Tensor& ent = params.at(kRelEnt);
    const Tensor& rel = params.at(kRelRel);
    return score_rel(ent.row(f.head), rel.row(f.relation), ent.row(f.tail), norm);
}

double prob_rel(const ParameterStore& params, const RelTriple& f, Norm norm) {
    return sigmoid(score_rel(params, f, norm));
}

std::vector<LabeledRelTriple> sample_negatives(const RelTriple& fact, int k, int n_entities,
                                               const std::set<RelTriple>& positives, Rng& rng) {
    std::vector<LabeledRelTriple> out;
    out.reserve(k);
    for (int i = 0; i < k; ++i) {
        RelTriple neg = fact;
        for (int attempt = 0; attempt < 100; ++attempt) {
            neg = fact;
            int e = static_cast<int>(rng.index(static_cast<std::size_t>(n_entities)));
            if (rng.bernoulli(0.5))
                neg.head = e;
            else
                neg.tail = e;
            if (!positives.count(neg)) break;
        }
        out.push_back({neg, -1.0});
    }
    return out;
}

namespace {

// Adds the gradient of log(1+exp(-label*score)) for one fact. The norm
// subgradient at zero coordinates is taken as zero.
void accumulate_logistic_gradient(const ParameterStore& params, const RelTriple& f,
                                  double label, double weight, Norm norm, Gradients& grads) {
    const Tensor& ent = params.at(kRelEnt);
    const Tensor& rel = params.at(kRelRel);
    auto h = ent.row(f.head);
    auto r = rel.row(f.relation);
    auto t = ent.row(f.tail);
    std::size_t d = h.size();

    std::vector<double> u(d);
    for (std::size_t i = 0; i < d; ++i) u[i] = h[i] + r[i] - t[i];

    double score;
    std::vector<double> dnorm(d, 0.0); // d||u|| / du
    if (norm == Norm::L1) {
        double n1 = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            n1 += std::fabs(u[i]);
            dnorm[i] = u[i] > 0.0 ? 1.0 : (u[i] < 0.0 ? -1.0 : 0.0);
        }
        score = -n1;
    } else {
        double n2 = norm2(u);
        score = -n2;
        if (n2 > 0.0)
            for (std::size_t i = 0; i < d; ++i) dnorm[i] = u[i] / n2;
    }

    // d/du of log(1+exp(-label*score)) = label * sigmoid(-label*score) * dnorm
    double coef = weight * label * sigmoid(-label * score);
    auto gh = grads.row(kRelEnt, f.head);
    auto gr = grads.row(kRelRel, f.relation);
    auto gt = grads.row(kRelEnt, f.tail);
    for (std::size_t i = 0; i < d; ++i) {
        double g = coef * dnorm[i];
        gh[i] += g;
        gr[i] += g;
        gt[i] -= g;
    }
}

} // namespace

double loss_relation_view(const ParameterStore& params,
                          const std::vector<LabeledRelTriple>& batch, Norm norm,
                          Gradients* grads) {
    double loss = 0.0;
    for (const auto& [triple, label] : batch) {
        loss += log1pexp(-label * score_rel(params, triple, norm));
        if (grads) accumulate_logistic_gradient(params, triple, label, 1.0, norm, *grads);
    }
    return loss;
}

double loss_cross_entity_rel(const ParameterStore& params, const std::vector<RelTriple>& facts,
                             const std::map<int, int>& seed, Norm norm, Gradients* grads) {
    double loss = 0.0;
    for (const auto& f : facts) {
        if (auto it = seed.find(f.head); it != seed.end()) {
            RelTriple swapped{it->second, f.relation, f.tail};
            loss += log1pexp(-score_rel(params, swapped, norm));
            if (grads) accumulate_logistic_gradient(params, swapped, 1.0, 1.0, norm, *grads);
        }
        if (auto it = seed.find(f.tail); it != seed.end()) {
            RelTriple swapped{f.head, f.relation, it->second};
            loss += log1pexp(-score_rel(params, swapped, norm));
            if (grads) accumulate_logistic_gradient(params, swapped, 1.0, 1.0, norm, *grads);
        }
    }
    return loss;
}

double loss_cross_rel_alignment(const ParameterStore& params,
                                const std::vector<RelTriple>& facts, const SoftMap& soft,
                                Norm norm, Gradients* grads) {
    double loss = 0.0;
    for (const auto& f : facts) {
        auto it = soft.find(f.relation);
        if (it == soft.end()) continue;
        for (const auto& [counterpart, weight] : it->second) {
            RelTriple swapped{f.head, counterpart, f.tail};
            loss += weight * log1pexp(-score_rel(params, swapped, norm));
            if (grads) accumulate_logistic_gradient(params, swapped, 1.0, weight, norm, *grads);
        }
    }
    return loss;
}

} // namespace multike
