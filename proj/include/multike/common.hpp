#ifndef MULTIKE_COMMON_HPP
#define MULTIKE_COMMON_HPP

#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace multike {

// Malformed input file; the message carries the 1-based line number.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line);
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class CheckpointError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::uint64_t splitmix64(std::uint64_t x);

// Deterministic RNG. mt19937_64 output is specified by the standard; the
// bounded draws below avoid std::*_distribution, whose algorithms are
// implementation-defined, so runs reproduce bit-for-bit everywhere.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // uniform in [0,1)
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    bool bernoulli(double p) { return uniform() < p; }

    // uniform index in [0,n), rejection-sampled to avoid modulo bias
    std::size_t index(std::size_t n);

    template <typename T>
    void shuffle(std::vector<T>& v) {
        if (v.size() < 2) return;
        for (std::size_t i = v.size() - 1; i > 0; --i) {
            std::size_t j = index(i + 1);
            std::swap(v[i], v[j]);
        }
    }

    // independent deterministic substream seed
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
        return splitmix64(seed + 0x9e3779b97f4a7c15ULL * (stream + 1));
    }

private:
    std::mt19937_64 gen_;
};

std::vector<std::string> split(const std::string& s, char sep);
std::string lower_ascii(std::string s);
std::string trim(const std::string& s);
std::string percent_decode(const std::string& s);

// FNV-1a, used for input-file digests in run manifests
std::uint64_t fnv1a(const std::string& bytes);
std::string to_hex(std::uint64_t x);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

// Runs fn(begin,end) over [0,n) in contiguous chunks. Results must be written
// to disjoint slots so the outcome is independent of the thread count.
void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t, std::size_t)>& fn);

} // namespace multike

#endif
