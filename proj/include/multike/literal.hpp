#ifndef MULTIKE_LITERAL_HPP
#define MULTIKE_LITERAL_HPP

#include <map>
#include <set>
#include <string>
#include <vector>

#include "multike/common.hpp"
#include "multike/kg.hpp"
#include "multike/params.hpp"

namespace multike {

// lowercase, punctuation to spaces, split on whitespace
std::vector<std::string> tokenize(const std::string& text);

// Read-only token -> vector map. A lookup miss returns nullptr rather than a
// default so callers can fall back to character composition.
class WordEmbeddingTable {
public:
    WordEmbeddingTable() = default;
    explicit WordEmbeddingTable(std::size_t dim) : dim_(dim) {}

    std::size_t dim() const { return dim_; }
    std::size_t size() const { return vectors_.size(); }

    void insert(const std::string& token, std::vector<double> vec);
    const std::vector<double>* find(const std::string& token) const;

private:
    std::size_t dim_ = 0;
    std::map<std::string, std::vector<double>> vectors_;
};

// Lines of "token v1 v2 ... vd"; an optional first line "count dim" is
// tolerated. Vector arity must be consistent; violations name the line.
WordEmbeddingTable load_word_embeddings(const std::string& text);

// Per-byte character vectors plus an unknown-character fallback, so lookups
// are total over arbitrary input.
class CharEmbeddingTable {
public:
    CharEmbeddingTable() = default;
    explicit CharEmbeddingTable(std::size_t dim)
        : dim_(dim), unknown_(dim, 0.0) {}

    std::size_t dim() const { return dim_; }
    bool has(unsigned char c) const { return vectors_.count(c) > 0; }
    std::span<const double> vector(unsigned char c) const;

    void set(unsigned char c, std::vector<double> vec);
    void set_unknown(std::vector<double> vec);

private:
    std::size_t dim_ = 0;
    std::map<unsigned char, std::vector<double>> vectors_;
    std::vector<double> unknown_;
};

struct SkipGramConfig {
    std::size_t dim = 75;
    int window = 2;
    int negatives = 5;
    int epochs = 10;
    std::uint64_t rng_seed = 1;
};

// Skip-gram with negative sampling over the byte sequences of the given
// literals. The unknown-character vector is the mean of the trained ones.
CharEmbeddingTable train_char_skipgram(const std::set<std::string>& literals,
                                       const SkipGramConfig& config);

// parameter names of the literal autoencoder inside a ParameterStore
inline constexpr const char* kAeEncW = "ae_enc_w"; // 5d x d
inline constexpr const char* kAeEncB = "ae_enc_b"; // 1 x d
inline constexpr const char* kAeDecW = "ae_dec_w"; // d x 5d
inline constexpr const char* kAeDecB = "ae_dec_b"; // 1 x 5d

inline constexpr int kLiteralWindow = 5;

void init_autoencoder(ParameterStore& params, std::size_t d, Rng& rng);

// Mean over the batch of the squared reconstruction error
// || x - tanh(tanh(x W_e + b_e) W_d + b_d) ||^2. Gradients, when requested,
// are accumulated for all four autoencoder tensors.
double autoencoder_loss(const ParameterStore& params,
                        const std::vector<std::vector<double>>& batch,
                        Gradients* grads);

// AdaGrad minimization of autoencoder_loss over shuffled minibatches.
// Returns the mean training loss of each epoch.
std::vector<double> train_autoencoder(ParameterStore& params,
                                      const std::vector<std::vector<double>>& windows,
                                      int epochs, double lr, int batch_size,
                                      std::uint64_t rng_seed);

// Token and literal embedding against frozen tables and a trained
// autoencoder. Lookups are pure and safe to run concurrently.
class LiteralEncoder {
public:
    LiteralEncoder(const WordEmbeddingTable* words, const CharEmbeddingTable* chars,
                   const ParameterStore* autoencoder, std::size_t dim);

    std::size_t dim() const { return dim_; }

    // word vector when present, otherwise the mean of the character vectors;
    // the empty token gives the zero vector (padding placeholder)
    std::vector<double> lookup_token(const std::string& token) const;

    // concatenation of the first five token vectors, zero-padded
    std::vector<double> window(const std::string& literal) const;

    // tanh(window . W_enc + b_enc)
    std::vector<double> embed(const std::string& literal) const;

    bool has_tokens(const std::string& literal) const { return !tokenize(literal).empty(); }

private:
    const WordEmbeddingTable* words_;
    const CharEmbeddingTable* chars_;
    const ParameterStore* autoencoder_;
    std::size_t dim_;
};

// Name-view entity embeddings, row per vocabulary entity index. Entities
// whose effective name has no tokens are masked out (present = 0, zero row).
struct NameEmbeddings {
    Tensor vectors;               // n_entities x d
    std::vector<char> present;    // per entity
};

NameEmbeddings embed_entity_names(const Vocabulary& vocab, const KnowledgeGraph& a,
                                  const KnowledgeGraph& b, const LiteralEncoder& encoder);

} // namespace multike

#endif
