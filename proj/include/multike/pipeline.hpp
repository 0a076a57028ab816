#ifndef MULTIKE_PIPELINE_HPP
#define MULTIKE_PIPELINE_HPP

#include <string>
#include <vector>

#include "multike/attribute_view.hpp"
#include "multike/checkpoint.hpp"
#include "multike/combination.hpp"
#include "multike/config.hpp"
#include "multike/evaluation.hpp"
#include "multike/kg.hpp"
#include "multike/literal.hpp"
#include "multike/relation_view.hpp"

namespace multike {

struct EpochLosses {
    double relation = 0.0;
    double attribute = 0.0;
    double itc = 0.0;
    double ce_rel = 0.0;
    double ce_attr = 0.0;
    double cra_rel = 0.0;
    double cra_attr = 0.0;
    int soft_rel_pairs = 0;
    int soft_attr_pairs = 0;
};

struct TrainLog {
    std::vector<std::string> steps; // "<epoch>:<step>" in execution order
    std::vector<EpochLosses> epochs;
    std::vector<double> autoencoder_curve;
    std::vector<double> ssl_curve;
    std::vector<double> ssl_orth_residuals;
};

struct TrainResult {
    Vocabulary vocab;
    ParameterStore params; // ent2, rel, ent3, attr, conv, proj, proj_b [, combined, maps]
    NameEmbeddings names;
    Tensor combined;
    TrainLog log;
};

// Runs the full alternating training schedule: literal pre-training, then per
// epoch the relation-view pass, attribute-view pass, the in-training
// combination when selected, both cross-KG entity passes, the soft-alignment
// refresh, and both soft-alignment passes; afterwards the late combination
// for the wva/ssl strategies. `words` may be null: token lookups then rely on
// character vectors alone.
TrainResult train_multike(const AlignmentDataset& ds, const TrainConfig& config,
                          const WordEmbeddingTable* words);

// flat TSV dump of the log: stage, epoch, step, value
std::string training_log_tsv(const TrainLog& log);

// Checkpoint with all model tensors plus the name matrix and its row mask.
Checkpoint make_checkpoint(const TrainResult& result);

// Nearest-neighbor evaluation of a reference pair list against an embedding
// matrix. `candidates` is "test" (targets of the pair list) or "all" (every
// target-graph entity).
AlignmentResult evaluate_alignment(const Tensor& matrix, const Vocabulary& vocab,
                                   const std::vector<std::pair<std::string, std::string>>& pairs,
                                   const std::string& candidates, int threads);

} // namespace multike

#endif
