#include "sgnet/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "sgnet/error.hpp"

namespace sgnet {

namespace {

class Writer {
public:
    void u32(uint32_t v) { put(v, 4); }
    void u64(uint64_t v) { put(v, 8); }
    void f64(double v) { put(std::bit_cast<uint64_t>(v), 8); }
    void bytes(const void* p, size_t n) {
        const auto* c = static_cast<const unsigned char*>(p);
        buf_.insert(buf_.end(), c, c + n);
    }
    std::vector<unsigned char> take() { return std::move(buf_); }

private:
    void put(uint64_t v, int n) {
        for (int i = 0; i < n; ++i) buf_.push_back(static_cast<unsigned char>(v >> (8 * i)));
    }
    std::vector<unsigned char> buf_;
};

class Reader {
public:
    explicit Reader(const std::vector<unsigned char>& b) : buf_(b) {}
    bool done() const { return pos_ == buf_.size(); }
    uint32_t u32() { return static_cast<uint32_t>(get(4)); }
    uint64_t u64() { return get(8); }
    double f64() { return std::bit_cast<double>(get(8)); }
    std::string str(size_t n) {
        need(n);
        std::string s(reinterpret_cast<const char*>(buf_.data() + pos_), n);
        pos_ += n;
        return s;
    }

private:
    void need(size_t n) const {
        if (buf_.size() - pos_ < n)
            throw FormatError("checkpoint: payload mismatch, needed " + std::to_string(n) +
                              " bytes at offset " + std::to_string(pos_) + " but only " +
                              std::to_string(buf_.size() - pos_) + " remain");
    }
    uint64_t get(int n) {
        need(static_cast<size_t>(n));
        uint64_t v = 0;
        for (int i = 0; i < n; ++i) v |= static_cast<uint64_t>(buf_[pos_ + i]) << (8 * i);
        pos_ += static_cast<size_t>(n);
        return v;
    }
    const std::vector<unsigned char>& buf_;
    size_t pos_ = 0;
};

}  // namespace

std::vector<unsigned char> encode_checkpoint(const ParamStore& store, const ModelConfig& config) {
    Writer w;
    w.bytes("SGNR", 4);
    w.u32(kCheckpointVersion);
    w.u32(config.channels);
    w.u32(config.sdb_count);
    w.u32(config.scale);
    w.u32(config.res_blocks);
    w.u32(config.attention_ratio);
    w.u64(config.seed);
    w.f64(config.lambda1);
    w.f64(config.lambda2);
    w.f64(config.gamma1);
    w.f64(config.gamma2);
    for (const auto& [name, p] : store.entries()) {
        w.u32(static_cast<uint32_t>(name.size()));
        w.bytes(name.data(), name.size());
        w.u32(static_cast<uint32_t>(p.extents.size()));
        for (uint32_t e : p.extents) w.u32(e);
        for (double v : p.tensor.data()) w.f64(v);
    }
    return w.take();
}

Checkpoint decode_checkpoint(const std::vector<unsigned char>& bytes) {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), "SGNR", 4) != 0)
        throw FormatError("checkpoint: bad magic");
    Reader r(bytes);
    r.str(4);
    const uint32_t version = r.u32();
    if (version != kCheckpointVersion)
        throw FormatError("checkpoint: version " + std::to_string(version) + " is not supported (expected " +
                          std::to_string(kCheckpointVersion) + ")");
    Checkpoint ck;
    ModelConfig& c = ck.config;
    c.channels = r.u32();
    c.sdb_count = r.u32();
    c.scale = r.u32();
    c.res_blocks = r.u32();
    c.attention_ratio = r.u32();
    c.seed = r.u64();
    c.lambda1 = r.f64();
    c.lambda2 = r.f64();
    c.gamma1 = r.f64();
    c.gamma2 = r.f64();
    while (!r.done()) {
        const uint32_t name_len = r.u32();
        std::string name = r.str(name_len);
        const uint32_t rank = r.u32();
        if (rank < 1 || rank > 4)
            throw FormatError("checkpoint: parameter '" + name + "' has unsupported rank " + std::to_string(rank));
        std::vector<uint32_t> extents(rank);
        uint64_t count = 1;
        for (auto& e : extents) {
            e = r.u32();
            count *= e;
        }
        if (count == 0) throw FormatError("checkpoint: parameter '" + name + "' has a zero extent");
        std::vector<double> values(count);
        for (auto& v : values) v = r.f64();
        if (ck.params.contains(name)) throw FormatError("checkpoint: duplicate parameter name '" + name + "'");
        Shape s = shape_from_extents(extents);
        ck.params.insert(name, std::move(extents), Tensor::from_data(s, std::move(values), true));
    }
    return ck;
}

void save_checkpoint(const ParamStore& store, const ModelConfig& config, const std::string& path) {
    auto bytes = encode_checkpoint(store, config);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("checkpoint: write to '" + path + "' failed");
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "' for reading");
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_checkpoint(bytes);
}

Sgnet load_model(const std::string& path) {
    Checkpoint ck = load_checkpoint(path);
    Sgnet model(ck.config);
    model.params().assign_from(ck.params);
    return model;
}

}  // namespace sgnet
