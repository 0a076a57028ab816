#include "multike/soft_alignment.hpp"

namespace multike {

SoftMap SoftAlignment::by_item() const {
    SoftMap out;
    for (const auto& e : entries) {
        out[e.a].emplace_back(e.b, e.sim);
        out[e.b].emplace_back(e.a, e.sim);
    }
    return out;
}

double soft_similarity(std::span<const double> name_x, std::span<const double> name_y,
                       std::span<const double> emb_x, std::span<const double> emb_y,
                       double alpha1, double alpha2) {
    return alpha1 * cosine(name_x, name_y) + alpha2 * cosine(emb_x, emb_y);
}

SoftAlignment update_soft_alignment(SoftKind kind, double threshold, double alpha1,
                                    double alpha2, const Tensor& names, const Tensor& views,
                                    std::pair<int, int> range_a, std::pair<int, int> range_b) {
    SoftAlignment out;
    out.kind = kind;
    out.threshold = threshold;
    for (int i = range_a.first; i < range_a.second; ++i) {
        for (int j = range_b.first; j < range_b.second; ++j) {
            double sim = soft_similarity(names.row(i), names.row(j), views.row(i),
                                         views.row(j), alpha1, alpha2);
            if (sim >= threshold) out.entries.push_back({i, j, sim});
        }
    }
    return out;
}

} // namespace multike
