#pragma once
// Binary embedding checkpoints.
//
// Layout (all integers little-endian):
//   bytes 0-3   magic "KGE1"
//   bytes 4-7   u32 model kind code
//   bytes 8-15  u64 n_entities
//   bytes 16-23 u64 n_relations
//   bytes 24-27 u32 dim
//   then the entity tensor, then the relation tensor, row-major, as
//   little-endian 32-bit floats.
//
// Training computes in f64; narrowing to f32 on save keeps checkpoints half
// the size and makes save -> load -> save a byte-level fixed point.
// A human-readable "<path>.meta" sidecar carries key=value pairs (epoch,
// loss, config echo); it is informational and never required for loading.

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "kge/models.hpp"
#include "kge/types.hpp"

namespace kge {

struct CheckpointError : Error {
    using Error::Error;
};
// Leading magic bytes are absent or wrong.
struct BadMagicError : CheckpointError {
    using CheckpointError::CheckpointError;
};
// File ends inside the header, or the payload is not whole f32 words.
struct TruncatedError : CheckpointError {
    using CheckpointError::CheckpointError;
};
// Payload float count disagrees with what the header implies.
struct SizeMismatchError : CheckpointError {
    using CheckpointError::CheckpointError;
};

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>(v & 0xFF));
    out.push_back(static_cast<char>((v >> 8) & 0xFF));
    out.push_back(static_cast<char>((v >> 16) & 0xFF));
    out.push_back(static_cast<char>((v >> 24) & 0xFF));
}

inline void put_u64(std::string& out, std::uint64_t v) {
    put_u32(out, static_cast<std::uint32_t>(v & 0xFFFFFFFFULL));
    put_u32(out, static_cast<std::uint32_t>(v >> 32));
}

inline std::uint32_t get_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::uint64_t get_u64(const unsigned char* p) {
    return static_cast<std::uint64_t>(get_u32(p)) |
           (static_cast<std::uint64_t>(get_u32(p + 4)) << 32);
}

inline void put_f32(std::string& out, double v) {
    const float f = static_cast<float>(v);
    std::uint32_t bits;
    std::memcpy(&bits, &f, sizeof(bits));
    put_u32(out, bits);
}

inline double get_f32(const unsigned char* p) {
    const std::uint32_t bits = get_u32(p);
    float f;
    std::memcpy(&f, &bits, sizeof(f));
    return static_cast<double>(f);
}

}  // namespace detail

inline constexpr char kCheckpointMagic[4] = {'K', 'G', 'E', '1'};
inline constexpr std::size_t kCheckpointHeaderBytes = 28;

inline void save_checkpoint(const ModelParams& params, const std::string& path) {
    std::string buf;
    buf.reserve(kCheckpointHeaderBytes +
                4 * (params.entity.size() + params.relation.size()));
    buf.append(kCheckpointMagic, 4);
    detail::put_u32(buf, model_code(params.kind));
    detail::put_u64(buf, params.n_entities);
    detail::put_u64(buf, params.n_relations);
    detail::put_u32(buf, static_cast<std::uint32_t>(params.dim));
    for (double v : params.entity) detail::put_f32(buf, v);
    for (double v : params.relation) detail::put_f32(buf, v);

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw IoError("failed writing " + path);
}

inline ModelParams load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::vector<unsigned char> buf{std::istreambuf_iterator<char>(in),
                                   std::istreambuf_iterator<char>()};

    if (buf.size() < 4 || std::memcmp(buf.data(), kCheckpointMagic, 4) != 0)
        throw BadMagicError(path + ": bad magic (not a checkpoint file)");
    if (buf.size() < kCheckpointHeaderBytes) throw TruncatedError(path + ": truncated header");

    ModelParams p;
    p.kind = model_from_code(detail::get_u32(buf.data() + 4));
    p.n_entities = detail::get_u64(buf.data() + 8);
    p.n_relations = detail::get_u64(buf.data() + 16);
    p.dim = static_cast<int>(detail::get_u32(buf.data() + 24));
    if (p.dim < 1 || p.n_entities < 1 || p.n_relations < 1)
        throw SizeMismatchError(path + ": header declares an empty model");

    const std::size_t payload = buf.size() - kCheckpointHeaderBytes;
    if (payload % 4 != 0) throw TruncatedError(path + ": truncated payload");
    const std::size_t n_floats = payload / 4;
    const std::size_t expected =
        p.n_entities * p.entity_width() + p.n_relations * p.relation_width();
    if (n_floats != expected)
        throw SizeMismatchError(path + ": payload holds " + std::to_string(n_floats) +
                                " floats but header implies " + std::to_string(expected));

    p.entity.resize(p.n_entities * p.entity_width());
    p.relation.resize(p.n_relations * p.relation_width());
    const unsigned char* cursor = buf.data() + kCheckpointHeaderBytes;
    for (double& v : p.entity) {
        v = detail::get_f32(cursor);
        cursor += 4;
    }
    for (double& v : p.relation) {
        v = detail::get_f32(cursor);
        cursor += 4;
    }
    return p;
}

// key=value sidecar ("<checkpoint>.meta")

inline void write_meta(const std::string& path, const std::map<std::string, std::string>& kv) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    for (const auto& [k, v] : kv) out << k << "=" << v << "\n";
    if (!out) throw IoError("failed writing " + path);
}

inline std::map<std::string, std::string> read_meta(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) continue;
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return kv;
}

}  // namespace kge
