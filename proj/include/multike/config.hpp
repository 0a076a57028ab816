#ifndef MULTIKE_CONFIG_HPP
#define MULTIKE_CONFIG_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace multike {

// Training hyper-parameters plus plumbing knobs. Every field is addressable
// from the CLI, a key=value config file, and MULTIKE_* environment variables.
struct TrainConfig {
    int epochs = 200;     // Q, outer training epochs
    double lr = 0.001;    // shared AdaGrad learning rate
    int dim = 75;         // d, embedding dimension of every view
    int negatives = 10;   // corruptions per relation fact
    int filters = 2;      // CNN kernels
    int kernel = 4;       // c, kernel width
    double alpha1 = 0.6;  // name weight in soft-alignment similarity
    double alpha2 = 0.4;  // embedding weight in soft-alignment similarity
    double eta = 0.9;     // soft-alignment threshold
    std::string norm = "L2";
    int batch_size = 512;
    std::uint64_t rng_seed = 1;
    std::string combination = "itc"; // wva | ssl | itc
    double seed_ratio = 0.3;         // fraction of reference pairs used as seed
    int use_cra = 1; // 0 disables soft relation/attribute alignment + its losses

    // literal pre-training
    int sg_window = 2;
    int sg_negatives = 5;
    int sg_epochs = 10;
    int ae_epochs = 30;
    double ae_lr = 0.05;
    int ae_batch = 64;

    // shared-space (late SSL) optimization
    int ssl_epochs = 500;
    double ssl_lr = 0.05;

    std::string word_vectors;    // optional pre-trained token vector file
    std::string candidates = "test"; // evaluation pool: test | all
    int threads = 1;                 // evaluation parallelism

    void validate() const; // throws std::invalid_argument on bad combinations
};

// known config keys, in declaration order (shared by file loader, env
// overrides, and the run manifest)
const std::vector<std::string>& config_keys();

// set one field by key ("epochs", "lr", ...); unknown key or unparsable
// value throws std::invalid_argument naming the key
void apply_config_kv(TrainConfig& cfg, const std::string& key, const std::string& value);

std::string config_get(const TrainConfig& cfg, const std::string& key);

// flat key=value lines; '#' starts a comment, blank lines are skipped
void load_config_file(TrainConfig& cfg, const std::string& path);

// applies MULTIKE_<UPPERCASE KEY> variables; returns the keys that were set
std::vector<std::string> apply_env_overrides(TrainConfig& cfg);

} // namespace multike

#endif
