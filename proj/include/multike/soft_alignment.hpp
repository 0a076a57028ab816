#ifndef MULTIKE_SOFT_ALIGNMENT_HPP
#define MULTIKE_SOFT_ALIGNMENT_HPP

#include <map>
#include <utility>
#include <vector>

#include "multike/tensor.hpp"

namespace multike {

enum class SoftKind { Relation, Attribute };

struct SoftEntry {
    int a;      // item index on the source side
    int b;      // item index on the target side
    double sim; // always >= the threshold used to build the set
};

// item index -> all cross-KG counterparts with their similarity, both
// directions, so fact-level lookups work for either graph
using SoftMap = std::map<int, std::vector<std::pair<int, double>>>;

struct SoftAlignment {
    SoftKind kind = SoftKind::Relation;
    double threshold = 0.0;
    std::vector<SoftEntry> entries;

    SoftMap by_item() const;
};

// alpha1 * cos(name_x, name_y) + alpha2 * cos(emb_x, emb_y); zero-norm
// operands contribute cosine 0
double soft_similarity(std::span<const double> name_x, std::span<const double> name_y,
                       std::span<const double> emb_x, std::span<const double> emb_y,
                       double alpha1, double alpha2);

// Exhaustively scores all cross-KG pairs of one kind and keeps those with
// similarity >= threshold. The result replaces any previous set wholesale.
// `names` and `views` are row-indexed by the same shared index space;
// range_a/range_b are the [first, last) index ranges of the two graphs.
SoftAlignment update_soft_alignment(SoftKind kind, double threshold, double alpha1,
                                    double alpha2, const Tensor& names, const Tensor& views,
                                    std::pair<int, int> range_a, std::pair<int, int> range_b);

} // namespace multike

#endif
