#ifndef MULTIKE_EVALUATION_HPP
#define MULTIKE_EVALUATION_HPP

#include <string>
#include <vector>

#include "multike/tensor.hpp"

namespace multike {

// Ranking of one test pair: candidates sorted by descending cosine to the
// source row, ties broken by ascending entity index. Ranks are 1-based.
struct RankedPair {
    int source = 0;
    int truth = 0;
    int truth_rank = 0;
    std::vector<int> candidates;    // best first
    std::vector<double> scores;     // aligned with candidates
};

struct AlignmentResult {
    std::vector<RankedPair> pairs;
};

struct MetricReport {
    double hits1 = 0.0;  // percent
    double hits10 = 0.0; // percent
    double mean_rank = 0.0;
    double mrr = 0.0;
    double precision = 0.0; // percent, rank-1
    double recall = 0.0;
    double f1 = 0.0;
};

// Nearest-neighbor search of every test source row against the candidate
// pool. Every pair's truth must be in the pool. Per-pair work is pure, so it
// is sharded over `threads`.
AlignmentResult rank_candidates(const Tensor& embeddings,
                                const std::vector<std::pair<int, int>>& test_pairs,
                                const std::vector<int>& candidate_pool, int threads = 1);

// Hits@{1,10} as percentages, mean rank, mean reciprocal rank.
MetricReport compute_metrics(const AlignmentResult& result);

// Precision = recall = F1 = percentage of pairs whose top candidate is the
// truth; every source entity always gets a prediction.
void compute_prf(const AlignmentResult& result, MetricReport& report);

std::string metrics_to_json(const MetricReport& report);
std::string metrics_to_table(const MetricReport& report);

// TSV: source id, predicted id, score, rank-of-truth
std::string predictions_to_tsv(const AlignmentResult& result,
                               const std::vector<std::string>& entity_ids);

} // namespace multike

#endif
