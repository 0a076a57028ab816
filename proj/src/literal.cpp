#include "multike/literal.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

namespace multike {

std::vector<std::string> tokenize(const std::string& text) {
    std::string cleaned;
    cleaned.reserve(text.size());
    for (unsigned char c : text) {
        if (c < 0x80 && !std::isalnum(c) && !std::isspace(c))
            cleaned.push_back(' ');
        else
            cleaned.push_back(static_cast<char>(std::tolower(c)));
    }
    std::vector<std::string> tokens;
    std::string current;
    for (unsigned char c : cleaned) {
        if (c < 0x80 && std::isspace(c)) {
            if (!current.empty()) tokens.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(static_cast<char>(c));
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

void WordEmbeddingTable::insert(const std::string& token, std::vector<double> vec) {
    if (dim_ == 0) dim_ = vec.size();
    if (vec.size() != dim_)
        throw std::invalid_argument("word vector dimension mismatch for token: " + token);
    vectors_[token] = std::move(vec);
}

const std::vector<double>* WordEmbeddingTable::find(const std::string& token) const {
    auto it = vectors_.find(token);
    return it == vectors_.end() ? nullptr : &it->second;
}

WordEmbeddingTable load_word_embeddings(const std::string& text) {
    WordEmbeddingTable table;
    auto lines = split(text, '\n');
    std::size_t declared = 0;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        std::string line = lines[i];
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        std::istringstream in(line);
        std::string token;
        in >> token;
        std::vector<double> vec;
        double v;
        while (in >> v) vec.push_back(v);
        if (!in.eof())
            throw ParseError("malformed number in word-embedding row", i + 1);
        // optional "count dim" header: first line, token numeric, one value
        if (i == 0 && vec.size() == 1 && !token.empty() &&
            token.find_first_not_of("0123456789") == std::string::npos) {
            declared = static_cast<std::size_t>(vec[0]);
            continue;
        }
        if (vec.empty())
            throw ParseError("word-embedding row has no vector values", i + 1);
        if (declared != 0 && vec.size() != declared)
            throw ParseError("word-embedding row has " + std::to_string(vec.size()) +
                                 " values, expected " + std::to_string(declared),
                             i + 1);
        if (table.dim() != 0 && vec.size() != table.dim())
            throw ParseError("word-embedding row has " + std::to_string(vec.size()) +
                                 " values, expected " + std::to_string(table.dim()),
                             i + 1);
        table.insert(token, std::move(vec));
    }
    return table;
}

std::span<const double> CharEmbeddingTable::vector(unsigned char c) const {
    auto it = vectors_.find(c);
    if (it != vectors_.end()) return it->second;
    return unknown_;
}

void CharEmbeddingTable::set(unsigned char c, std::vector<double> vec) {
    if (vec.size() != dim_)
        throw std::invalid_argument("character vector dimension mismatch");
    vectors_[c] = std::move(vec);
}

void CharEmbeddingTable::set_unknown(std::vector<double> vec) {
    if (vec.size() != dim_)
        throw std::invalid_argument("character vector dimension mismatch");
    unknown_ = std::move(vec);
}

CharEmbeddingTable train_char_skipgram(const std::set<std::string>& literals,
                                       const SkipGramConfig& config) {
    if (config.dim == 0) throw std::invalid_argument("train_char_skipgram: d must be positive");
    if (literals.empty()) throw std::invalid_argument("train_char_skipgram: empty corpus");

    // character inventory and frequency over the corpus
    std::map<unsigned char, std::size_t> counts;
    for (const auto& lit : literals)
        for (unsigned char c : lit) ++counts[c];
    if (counts.empty()) throw std::invalid_argument("train_char_skipgram: empty corpus");

    std::vector<unsigned char> chars;
    chars.reserve(counts.size());
    for (const auto& [c, _] : counts) chars.push_back(c);
    std::map<unsigned char, std::size_t> char_slot;
    for (std::size_t i = 0; i < chars.size(); ++i) char_slot[chars[i]] = i;

    // negative-sampling table, frequencies raised to 3/4
    std::vector<double> cumulative(chars.size());
    double total = 0.0;
    for (std::size_t i = 0; i < chars.size(); ++i) {
        total += std::pow(static_cast<double>(counts[chars[i]]), 0.75);
        cumulative[i] = total;
    }

    Rng rng(config.rng_seed);
    std::size_t d = config.dim;
    std::vector<std::vector<double>> in_vec(chars.size()), out_vec(chars.size());
    for (std::size_t i = 0; i < chars.size(); ++i) {
        in_vec[i].resize(d);
        for (auto& v : in_vec[i]) v = rng.uniform(-0.5 / static_cast<double>(d),
                                                  0.5 / static_cast<double>(d));
        out_vec[i].assign(d, 0.0);
    }

    auto draw_negative = [&]() {
        double u = rng.uniform() * total;
        auto it = std::lower_bound(cumulative.begin(), cumulative.end(), u);
        std::size_t i = static_cast<std::size_t>(it - cumulative.begin());
        return std::min(i, chars.size() - 1);
    };

    const double lr_start = 0.05, lr_end = 0.01;
    std::vector<double> grad_center(d);
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        double lr = config.epochs > 1
                        ? lr_start + (lr_end - lr_start) * epoch / (config.epochs - 1)
                        : lr_start;
        for (const auto& lit : literals) {
            int len = static_cast<int>(lit.size());
            for (int pos = 0; pos < len; ++pos) {
                std::size_t center = char_slot[static_cast<unsigned char>(lit[pos])];
                for (int off = -config.window; off <= config.window; ++off) {
                    int ctx = pos + off;
                    if (off == 0 || ctx < 0 || ctx >= len) continue;
                    std::size_t context = char_slot[static_cast<unsigned char>(lit[ctx])];
                    std::fill(grad_center.begin(), grad_center.end(), 0.0);
                    // positive pair, then sampled negatives (skipping the target)
                    for (int k = 0; k <= config.negatives; ++k) {
                        std::size_t sample = k == 0 ? context : draw_negative();
                        if (k > 0 && sample == context) continue;
                        double label = k == 0 ? 1.0 : 0.0;
                        double g = lr * (label - sigmoid(dot(in_vec[center], out_vec[sample])));
                        axpy(g, out_vec[sample], grad_center);
                        axpy(g, in_vec[center], out_vec[sample]);
                    }
                    axpy(1.0, grad_center, in_vec[center]);
                }
            }
        }
    }

    CharEmbeddingTable table(d);
    std::vector<double> mean(d, 0.0);
    for (std::size_t i = 0; i < chars.size(); ++i) {
        axpy(1.0, in_vec[i], mean);
        table.set(chars[i], in_vec[i]);
    }
    for (auto& v : mean) v /= static_cast<double>(chars.size());
    table.set_unknown(std::move(mean));
    return table;
}

void init_autoencoder(ParameterStore& params, std::size_t d, Rng& rng) {
    std::size_t w = static_cast<std::size_t>(kLiteralWindow) * d;
    params.add(kAeEncW, xavier_init(w, d, rng));
    params.add(kAeEncB, Tensor(1, d));
    params.add(kAeDecW, xavier_init(d, w, rng));
    params.add(kAeDecB, Tensor(1, w));
}

double autoencoder_loss(const ParameterStore& params,
                        const std::vector<std::vector<double>>& batch, Gradients* grads) {
    const Tensor& enc_w = params.at(kAeEncW);
    const Tensor& enc_b = params.at(kAeEncB);
    const Tensor& dec_w = params.at(kAeDecW);
    const Tensor& dec_b = params.at(kAeDecB);
    std::size_t w = enc_w.rows(), d = enc_w.cols();
    if (batch.empty()) return 0.0;

    double inv_n = 1.0 / static_cast<double>(batch.size());
    double loss = 0.0;
    std::vector<double> code(d), recon(w), dpre_dec(w), dpre_enc(d);
    for (const auto& x : batch) {
        if (x.size() != w)
            throw std::invalid_argument("autoencoder_loss: window length mismatch");
        for (std::size_t j = 0; j < d; ++j) {
            double s = enc_b[j];
            for (std::size_t i = 0; i < w; ++i) s += x[i] * enc_w.at(i, j);
            code[j] = std::tanh(s);
        }
        for (std::size_t j = 0; j < w; ++j) {
            double s = dec_b[j];
            for (std::size_t i = 0; i < d; ++i) s += code[i] * dec_w.at(i, j);
            recon[j] = std::tanh(s);
        }
        double err = 0.0;
        for (std::size_t j = 0; j < w; ++j) {
            double e = recon[j] - x[j];
            err += e * e;
        }
        loss += inv_n * err;
        if (!grads) continue;

        for (std::size_t j = 0; j < w; ++j) {
            double dy = 2.0 * inv_n * (recon[j] - x[j]);
            dpre_dec[j] = dy * (1.0 - recon[j] * recon[j]);
        }
        Tensor& g_dec_w = grads->of(kAeDecW);
        Tensor& g_dec_b = grads->of(kAeDecB);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < w; ++j)
                g_dec_w.at(i, j) += code[i] * dpre_dec[j];
        for (std::size_t j = 0; j < w; ++j) g_dec_b[j] += dpre_dec[j];

        for (std::size_t i = 0; i < d; ++i) {
            double dcode = 0.0;
            for (std::size_t j = 0; j < w; ++j) dcode += dpre_dec[j] * dec_w.at(i, j);
            dpre_enc[i] = dcode * (1.0 - code[i] * code[i]);
        }
        Tensor& g_enc_w = grads->of(kAeEncW);
        Tensor& g_enc_b = grads->of(kAeEncB);
        for (std::size_t i = 0; i < w; ++i) {
            if (x[i] == 0.0) continue;
            for (std::size_t j = 0; j < d; ++j) g_enc_w.at(i, j) += x[i] * dpre_enc[j];
        }
        for (std::size_t j = 0; j < d; ++j) g_enc_b[j] += dpre_enc[j];
    }
    return loss;
}

std::vector<double> train_autoencoder(ParameterStore& params,
                                      const std::vector<std::vector<double>>& windows,
                                      int epochs, double lr, int batch_size,
                                      std::uint64_t rng_seed) {
    if (windows.empty()) return {};
    if (batch_size < 1) throw std::invalid_argument("train_autoencoder: batch_size must be >= 1");
    AdaGrad opt(lr);
    Rng rng(rng_seed);
    std::vector<std::size_t> order(windows.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    std::vector<double> curve;
    Gradients grads(params);
    for (int epoch = 0; epoch < epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss = 0.0;
        std::size_t done = 0;
        while (done < order.size()) {
            std::size_t take = std::min<std::size_t>(batch_size, order.size() - done);
            std::vector<std::vector<double>> batch;
            batch.reserve(take);
            for (std::size_t i = 0; i < take; ++i) batch.push_back(windows[order[done + i]]);
            done += take;
            grads.clear();
            double batch_loss = autoencoder_loss(params, batch, &grads);
            epoch_loss += batch_loss * static_cast<double>(take);
            opt.step(params, grads);
        }
        curve.push_back(epoch_loss / static_cast<double>(order.size()));
    }
    return curve;
}

LiteralEncoder::LiteralEncoder(const WordEmbeddingTable* words, const CharEmbeddingTable* chars,
                               const ParameterStore* autoencoder, std::size_t dim)
    : words_(words), chars_(chars), autoencoder_(autoencoder), dim_(dim) {
    if (words_ && words_->dim() != 0 && words_->dim() != dim_)
        throw std::invalid_argument("LiteralEncoder: word table dimension mismatch");
    if (chars_ && chars_->dim() != dim_)
        throw std::invalid_argument("LiteralEncoder: char table dimension mismatch");
}

std::vector<double> LiteralEncoder::lookup_token(const std::string& token) const {
    std::vector<double> out(dim_, 0.0);
    if (token.empty()) return out; // padding placeholder
    if (words_) {
        if (const auto* vec = words_->find(token)) return *vec;
    }
    if (chars_) {
        for (unsigned char c : token) axpy(1.0, chars_->vector(c), out);
        for (auto& v : out) v /= static_cast<double>(token.size());
    }
    return out;
}

std::vector<double> LiteralEncoder::window(const std::string& literal) const {
    auto tokens = tokenize(literal);
    std::vector<double> out(static_cast<std::size_t>(kLiteralWindow) * dim_, 0.0);
    std::size_t used = std::min<std::size_t>(tokens.size(), kLiteralWindow);
    for (std::size_t t = 0; t < used; ++t) {
        auto vec = lookup_token(tokens[t]);
        std::copy(vec.begin(), vec.end(), out.begin() + t * dim_);
    }
    return out;
}

std::vector<double> LiteralEncoder::embed(const std::string& literal) const {
    std::vector<double> x = window(literal);
    const Tensor& enc_w = autoencoder_->at(kAeEncW);
    const Tensor& enc_b = autoencoder_->at(kAeEncB);
    std::vector<double> out(dim_);
    for (std::size_t j = 0; j < dim_; ++j) {
        double s = enc_b[j];
        for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * enc_w.at(i, j);
        out[j] = std::tanh(s);
    }
    return out;
}

NameEmbeddings embed_entity_names(const Vocabulary& vocab, const KnowledgeGraph& a,
                                  const KnowledgeGraph& b, const LiteralEncoder& encoder) {
    NameEmbeddings out{Tensor(std::max(vocab.entity_count(), 1), encoder.dim()),
                       std::vector<char>(vocab.entity_count(), 0)};
    for (int i = 0; i < vocab.entity_count(); ++i) {
        const KnowledgeGraph& kg = vocab.entity_side(i) == Side::A ? a : b;
        std::string name = kg.effective_name(vocab.entity_id(i));
        if (!encoder.has_tokens(name)) continue; // masked: no usable name
        out.present[i] = 1;
        auto vec = encoder.embed(name);
        std::copy(vec.begin(), vec.end(), out.vectors.row(i).begin());
    }
    return out;
}

} // namespace multike
