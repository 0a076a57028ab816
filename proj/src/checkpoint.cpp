#include "multike/checkpoint.hpp"

#include <bit>
#include <cstring>

namespace multike {

namespace {

constexpr char kMagic[4] = {'M', 'K', 'E', 'C'};

void put_u32(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    out.push_back(static_cast<char>((v >> 24) & 0xff));
}

void put_f32(std::string& out, double v) {
    put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
}

class Reader {
public:
    explicit Reader(const std::string& bytes) : bytes_(bytes) {}

    std::uint32_t u32() {
        require(4);
        std::uint32_t v = static_cast<unsigned char>(bytes_[pos_]) |
                          static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + 1])) << 8 |
                          static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + 2])) << 16 |
                          static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + 3])) << 24;
        pos_ += 4;
        return v;
    }

    double f32() { return static_cast<double>(std::bit_cast<float>(u32())); }

    std::string str(std::size_t len) {
        require(len);
        std::string s = bytes_.substr(pos_, len);
        pos_ += len;
        return s;
    }

    bool done() const { return pos_ == bytes_.size(); }

private:
    void require(std::size_t n) {
        if (pos_ + n > bytes_.size()) throw CheckpointError("checkpoint truncated");
    }

    const std::string& bytes_;
    std::size_t pos_ = 0;
};

} // namespace

std::string serialize_checkpoint(const Checkpoint& ckpt) {
    std::string out;
    out.append(kMagic, 4);
    put_u32(out, kCheckpointVersion);
    put_u32(out, ckpt.dim);
    put_u32(out, static_cast<std::uint32_t>(ckpt.tensors.size()));
    for (const auto& [name, tensor] : ckpt.tensors) {
        put_u32(out, static_cast<std::uint32_t>(name.size()));
        out += name;
        put_u32(out, static_cast<std::uint32_t>(tensor.rows()));
        put_u32(out, static_cast<std::uint32_t>(tensor.cols()));
        for (double v : tensor.flat()) put_f32(out, v);
    }
    return out;
}

Checkpoint deserialize_checkpoint(const std::string& bytes) {
    Reader in(bytes);
    if (in.str(4) != std::string(kMagic, 4)) throw CheckpointError("not a checkpoint file");
    std::uint32_t version = in.u32();
    if (version != kCheckpointVersion)
        throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
    Checkpoint ckpt;
    ckpt.dim = in.u32();
    std::uint32_t count = in.u32();
    for (std::uint32_t i = 0; i < count; ++i) {
        std::uint32_t name_len = in.u32();
        if (name_len > 4096) throw CheckpointError("implausible tensor name length");
        std::string name = in.str(name_len);
        std::uint32_t rows = in.u32();
        std::uint32_t cols = in.u32();
        if (rows == 0 || cols == 0) throw CheckpointError("zero tensor dimension");
        Tensor t(rows, cols);
        for (auto& v : t.flat()) v = in.f32();
        if (!ckpt.tensors.emplace(name, std::move(t)).second)
            throw CheckpointError("duplicate tensor name: " + name);
    }
    if (!in.done()) throw CheckpointError("trailing bytes after checkpoint payload");
    return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    write_file(path, serialize_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::string& path) {
    return deserialize_checkpoint(read_file(path));
}

} // namespace multike
