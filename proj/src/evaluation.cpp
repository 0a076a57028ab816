#include "multike/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <stdexcept>

#include "json.hpp"

#include "multike/common.hpp"

namespace multike {

AlignmentResult rank_candidates(const Tensor& embeddings,
                                const std::vector<std::pair<int, int>>& test_pairs,
                                const std::vector<int>& candidate_pool, int threads) {
    if (candidate_pool.empty())
        throw std::invalid_argument("rank_candidates: empty candidate pool");
    std::set<int> pool_set(candidate_pool.begin(), candidate_pool.end());
    auto check_row = [&](int idx) {
        if (idx < 0 || static_cast<std::size_t>(idx) >= embeddings.rows())
            throw std::out_of_range("rank_candidates: entity index " + std::to_string(idx) +
                                    " has no embedding row");
    };
    for (const auto& [src, truth] : test_pairs) {
        check_row(src);
        check_row(truth);
        if (!pool_set.count(truth))
            throw std::invalid_argument("rank_candidates: truth entity " +
                                        std::to_string(truth) + " not in candidate pool");
    }
    for (int c : candidate_pool) check_row(c);

    AlignmentResult result;
    result.pairs.resize(test_pairs.size());
    parallel_for(test_pairs.size(), threads, [&](std::size_t begin, std::size_t end) {
        std::vector<std::pair<double, int>> scored(candidate_pool.size());
        for (std::size_t p = begin; p < end; ++p) {
            auto [src, truth] = test_pairs[p];
            auto src_row = embeddings.row(src);
            for (std::size_t c = 0; c < candidate_pool.size(); ++c)
                scored[c] = {cosine(src_row, embeddings.row(candidate_pool[c])),
                             candidate_pool[c]};
            std::sort(scored.begin(), scored.end(), [](const auto& x, const auto& y) {
                if (x.first != y.first) return x.first > y.first;
                return x.second < y.second;
            });
            RankedPair& rp = result.pairs[p];
            rp.source = src;
            rp.truth = truth;
            rp.candidates.resize(scored.size());
            rp.scores.resize(scored.size());
            for (std::size_t c = 0; c < scored.size(); ++c) {
                rp.candidates[c] = scored[c].second;
                rp.scores[c] = scored[c].first;
                if (scored[c].second == truth) rp.truth_rank = static_cast<int>(c) + 1;
            }
        }
    });
    return result;
}

MetricReport compute_metrics(const AlignmentResult& result) {
    if (result.pairs.empty()) throw std::invalid_argument("compute_metrics: empty result");
    double n = static_cast<double>(result.pairs.size());
    double h1 = 0.0, h10 = 0.0, rank_sum = 0.0, rr_sum = 0.0;
    for (const auto& p : result.pairs) {
        if (p.truth_rank <= 1) h1 += 1.0;
        if (p.truth_rank <= 10) h10 += 1.0;
        rank_sum += static_cast<double>(p.truth_rank);
        rr_sum += 1.0 / static_cast<double>(p.truth_rank);
    }
    MetricReport report;
    report.hits1 = 100.0 * h1 / n;
    report.hits10 = 100.0 * h10 / n;
    report.mean_rank = rank_sum / n;
    report.mrr = rr_sum / n;
    compute_prf(result, report);
    return report;
}

void compute_prf(const AlignmentResult& result, MetricReport& report) {
    if (result.pairs.empty()) return;
    double correct = 0.0;
    for (const auto& p : result.pairs)
        if (!p.candidates.empty() && p.candidates[0] == p.truth) correct += 1.0;
    report.precision = 100.0 * correct / static_cast<double>(result.pairs.size());
    report.recall = report.precision; // every source entity gets a prediction
    report.f1 = report.precision;
}

std::string metrics_to_json(const MetricReport& report) {
    nlohmann::json j;
    j["hits@1"] = report.hits1;
    j["hits@10"] = report.hits10;
    j["mr"] = report.mean_rank;
    j["mrr"] = report.mrr;
    j["precision"] = report.precision;
    j["recall"] = report.recall;
    j["f1"] = report.f1;
    return j.dump(2) + "\n";
}

std::string metrics_to_table(const MetricReport& report) {
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "hits@1     %7.2f\n"
                  "hits@10    %7.2f\n"
                  "mr         %10.4f\n"
                  "mrr        %10.4f\n"
                  "precision  %7.2f\n"
                  "recall     %7.2f\n"
                  "f1         %7.2f\n",
                  report.hits1, report.hits10, report.mean_rank, report.mrr, report.precision,
                  report.recall, report.f1);
    return buf;
}

std::string predictions_to_tsv(const AlignmentResult& result,
                               const std::vector<std::string>& entity_ids) {
    std::string out = "source\tpredicted\tscore\trank_of_truth\n";
    char buf[64];
    for (const auto& p : result.pairs) {
        out += entity_ids.at(p.source);
        out.push_back('\t');
        out += entity_ids.at(p.candidates.at(0));
        std::snprintf(buf, sizeof(buf), "\t%.6f\t%d\n", p.scores.at(0), p.truth_rank);
        out += buf;
    }
    return out;
}

} // namespace multike
