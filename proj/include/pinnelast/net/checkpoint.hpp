#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

#include "pinnelast/net/mlp.hpp"

namespace pinnelast::net {

static_assert(std::endian::native == std::endian::little,
              "checkpoint format is little-endian; big-endian hosts are not supported");

enum class NetRole : std::uint8_t { single = 0, particular = 1, distance = 2, general = 3 };

inline const char* role_name(NetRole r) {
    switch (r) {
        case NetRole::single: return "single";
        case NetRole::particular: return "particular";
        case NetRole::distance: return "distance";
        case NetRole::general: return "general";
    }
    return "?";
}

struct CheckpointError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail_ckpt {
constexpr char kMagic[4] = {'P', 'N', 'C', 'P'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <class T>
void get(std::istream& is, T& v) {
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw CheckpointError("truncated checkpoint");
}
}  // namespace detail_ckpt

/// Writes spec header, coordinate maps and the flat parameter vector.
inline void save_checkpoint(const std::string& path, const Mlp& net, NetRole role,
                            bool frozen) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw CheckpointError("cannot open checkpoint for writing: " + path);
    using namespace detail_ckpt;
    os.write(kMagic, 4);
    put(os, kVersion);
    put(os, static_cast<std::uint8_t>(role));
    put(os, static_cast<std::uint8_t>(frozen ? 1 : 0));
    put(os, std::uint16_t{0});
    put(os, std::int32_t{net.spec.input_dim});
    put(os, std::int32_t{net.spec.output_dim});
    put(os, std::int32_t{net.spec.hidden_layers});
    put(os, std::int32_t{net.spec.width});
    for (double v : net.in_map.scale) put(os, v);
    for (double v : net.in_map.shift) put(os, v);
    for (double v : net.out_map.scale) put(os, v);
    for (double v : net.out_map.shift) put(os, v);
    put(os, static_cast<std::uint64_t>(net.params.flat.size()));
    os.write(reinterpret_cast<const char*>(net.params.flat.data()),
             static_cast<std::streamsize>(net.params.flat.size() * sizeof(double)));
    if (!os) throw CheckpointError("write failure: " + path);
}

struct LoadedCheckpoint {
    Mlp net;
    NetRole role = NetRole::single;
    bool frozen = false;
};

inline LoadedCheckpoint load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw CheckpointError("cannot open checkpoint: " + path);
    using namespace detail_ckpt;
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0)
        throw CheckpointError("not a parameter checkpoint: " + path);
    std::uint32_t version;
    get(is, version);
    if (version != kVersion)
        throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
    std::uint8_t role, frozen;
    std::uint16_t pad;
    get(is, role);
    get(is, frozen);
    get(is, pad);
    LoadedCheckpoint out;
    out.role = static_cast<NetRole>(role);
    out.frozen = frozen != 0;
    std::int32_t in, outd, hidden, width;
    get(is, in);
    get(is, outd);
    get(is, hidden);
    get(is, width);
    out.net.spec = LayerSpec{in, outd, hidden, width};
    out.net.spec.validate();
    for (double& v : out.net.in_map.scale) get(is, v);
    for (double& v : out.net.in_map.shift) get(is, v);
    for (double& v : out.net.out_map.scale) get(is, v);
    for (double& v : out.net.out_map.shift) get(is, v);
    std::uint64_t n;
    get(is, n);
    if (n != out.net.spec.param_count())
        throw CheckpointError("parameter count does not match architecture header");
    out.net.params = MlpParams::zeros(out.net.spec);
    is.read(reinterpret_cast<char*>(out.net.params.flat.data()),
            static_cast<std::streamsize>(n * sizeof(double)));
    if (!is) throw CheckpointError("truncated checkpoint payload: " + path);
    return out;
}

/// FNV-1a over the file bytes; used for run manifests.
inline std::uint64_t file_hash(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw CheckpointError("cannot hash missing file: " + path);
    std::uint64_t h = 1469598103934665603ULL;
    char buf[4096];
    while (is.read(buf, sizeof(buf)) || is.gcount() > 0) {
        for (std::streamsize i = 0; i < is.gcount(); ++i)
            h = (h ^ static_cast<unsigned char>(buf[i])) * 1099511628211ULL;
        if (!is) break;
    }
    return h;
}

}  // namespace pinnelast::net
