#ifndef MULTIKE_RELATION_VIEW_HPP
#define MULTIKE_RELATION_VIEW_HPP

#include <map>
#include <set>
#include <vector>

#include "multike/kg.hpp"
#include "multike/params.hpp"
#include "multike/soft_alignment.hpp"

namespace multike {

enum class Norm { L1, L2 };

Norm parse_norm(const std::string& text); // "L1" or "L2"

// parameter names of the relation view inside a ParameterStore
inline constexpr const char* kRelEnt = "ent2"; // n_entities x d
inline constexpr const char* kRelRel = "rel";  // n_relations x d

struct RelTriple {
    int head;
    int relation;
    int tail;

    auto operator<=>(const RelTriple&) const = default;
};

struct LabeledRelTriple {
    RelTriple triple;
    double label; // +1 real, -1 sampled corruption
};

// facts of one graph mapped into the shared index space
std::vector<RelTriple> index_relation_facts(const KnowledgeGraph& kg, Side side,
                                            const Vocabulary& vocab);

// -||h + r - t|| under the given norm; always <= 0
double score_rel(std::span<const double> h, std::span<const double> r,
                 std::span<const double> t, Norm norm);
double score_rel(const ParameterStore& params, const RelTriple& f, Norm norm);

// sigmoid(score); in (0, 0.5] since the score is non-positive
double prob_rel(const ParameterStore& params, const RelTriple& f, Norm norm);

// k corruptions of one fact: head or tail (coin flip) replaced by a uniform
// entity index. Corruptions found in `positives` are resampled, up to 100
// tries each, then accepted as-is.
std::vector<LabeledRelTriple> sample_negatives(const RelTriple& fact, int k, int n_entities,
                                               const std::set<RelTriple>& positives, Rng& rng);

// sum over the batch of log(1 + exp(-label * score))
double loss_relation_view(const ParameterStore& params,
                          const std::vector<LabeledRelTriple>& batch, Norm norm,
                          Gradients* grads);

// Cross-KG entity loss: for each fact, every aligned head and aligned tail is
// substituted by its counterpart and the positive-label logistic term of the
// substituted fact is added. `seed` maps entity index -> counterpart index in
// both directions.
double loss_cross_entity_rel(const ParameterStore& params, const std::vector<RelTriple>& facts,
                             const std::map<int, int>& seed, Norm norm, Gradients* grads);

// Soft relation-alignment loss: every counterpart (r-hat, weight) of a fact's
// relation contributes weight * log(1 + exp(-score(h, r-hat, t))). Weights are
// constants for backpropagation.
double loss_cross_rel_alignment(const ParameterStore& params,
                                const std::vector<RelTriple>& facts, const SoftMap& soft,
                                Norm norm, Gradients* grads);

} // namespace multike

#endif
