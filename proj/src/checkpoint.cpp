#include "hmp/checkpoint.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>

#include "hmp/errors.hpp"

namespace hmp {

namespace {

constexpr char kMagic[4] = {'H', 'M', 'P', 'C'};

void put_u32(std::ostream& out, uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& out, uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
}

void put_string(std::ostream& out, const std::string& s) {
    put_u32(out, static_cast<uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) {
        throw CheckpointError("checkpoint truncated while reading u32");
    }
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(b[i]) << (8 * i);
    return v;
}

uint64_t get_u64(std::istream& in) {
    unsigned char b[8];
    if (!in.read(reinterpret_cast<char*>(b), 8)) {
        throw CheckpointError("checkpoint truncated while reading u64");
    }
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b[i]) << (8 * i);
    return v;
}

std::string get_string(std::istream& in, size_t limit = 1 << 16) {
    const uint32_t len = get_u32(in);
    if (len > limit) {
        throw CheckpointError("checkpoint string length implausible: " +
                              std::to_string(len));
    }
    std::string s(len, '\0');
    if (len > 0 && !in.read(s.data(), len)) {
        throw CheckpointError("checkpoint truncated while reading string");
    }
    return s;
}

}  // namespace

void write_checkpoint(const std::string& path, const std::string& kind,
                      const std::vector<std::pair<std::string, int64_t>>& config,
                      const ParamStore& params) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw CheckpointError("cannot open '" + tmp + "' for writing");
        }
        out.write(kMagic, 4);
        put_u32(out, kCheckpointVersion);
        put_string(out, kind);
        put_u32(out, static_cast<uint32_t>(config.size()));
        for (const auto& [key, value] : config) {
            put_string(out, key);
            put_u64(out, static_cast<uint64_t>(value));
        }
        put_u64(out, static_cast<uint64_t>(params.tensor_count()));
        std::vector<double> buf;
        for (Index t = 0; t < params.tensor_count(); ++t) {
            const auto& info = params.info(t);
            put_string(out, info.name);
            put_u64(out, static_cast<uint64_t>(info.rows));
            put_u64(out, static_cast<uint64_t>(info.cols));
            const auto m = params.view(t);
            buf.resize(static_cast<size_t>(info.rows * info.cols));
            size_t k = 0;
            for (Index r = 0; r < info.rows; ++r) {
                for (Index c = 0; c < info.cols; ++c) buf[k++] = m(r, c);
            }
            out.write(reinterpret_cast<const char*>(buf.data()),
                      static_cast<std::streamsize>(sizeof(double) * buf.size()));
        }
        if (!out) {
            throw CheckpointError("write failed for '" + tmp + "'");
        }
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        throw CheckpointError("cannot rename '" + tmp + "' to '" + path + "'");
    }
}

Checkpoint read_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw CheckpointError("cannot open checkpoint '" + path + "'");
    }
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
        throw CheckpointError("'" + path + "' is not a checkpoint file (bad magic)");
    }
    const uint32_t version = get_u32(in);
    if (version != kCheckpointVersion) {
        throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
    }
    Checkpoint ck;
    ck.kind = get_string(in);
    const uint32_t entries = get_u32(in);
    for (uint32_t i = 0; i < entries; ++i) {
        std::string key = get_string(in);
        const int64_t value = static_cast<int64_t>(get_u64(in));
        ck.config.emplace_back(std::move(key), value);
    }
    const uint64_t tensors = get_u64(in);
    std::vector<double> buf;
    for (uint64_t t = 0; t < tensors; ++t) {
        std::string name = get_string(in);
        const auto rows = static_cast<Index>(get_u64(in));
        const auto cols = static_cast<Index>(get_u64(in));
        if (rows < 0 || cols < 0 || rows * cols > (Index{1} << 28)) {
            throw CheckpointError("tensor '" + name + "' has implausible shape");
        }
        const Index idx = ck.params.add(std::move(name), rows, cols);
        buf.resize(static_cast<size_t>(rows * cols));
        if (!in.read(reinterpret_cast<char*>(buf.data()),
                     static_cast<std::streamsize>(sizeof(double) * buf.size()))) {
            throw CheckpointError("checkpoint truncated inside tensor '" +
                                  ck.params.info(idx).name + "'");
        }
        auto m = ck.params.view(idx);
        size_t k = 0;
        for (Index r = 0; r < rows; ++r) {
            for (Index c = 0; c < cols; ++c) m(r, c) = buf[k++];
        }
    }
    in.peek();
    if (!in.eof()) {
        throw CheckpointError("trailing bytes after last tensor in '" + path + "'");
    }
    return ck;
}

int64_t checkpoint_config_value(const Checkpoint& ck, const std::string& key) {
    for (const auto& [k, v] : ck.config) {
        if (k == key) return v;
    }
    throw CheckpointError("checkpoint missing config entry '" + key + "'");
}

}  // namespace hmp
