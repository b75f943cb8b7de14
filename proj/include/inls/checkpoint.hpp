#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "inls/error.hpp"
#include "inls/radial.hpp"

namespace inls
{

// Layout, all little-endian:
//   0  char[8]  "INLSCKPT"
//   8  u32      format version
//   12 u32      size of the metadata block in bytes
//   16 f64 r_max, u64 n, f64 t, f64 b, f64 reference grad norm^2, u64 config hash
//   64 n x (f64 re, f64 im)

inline constexpr std::array<char, 8> kCheckpointMagic = {'I', 'N', 'L', 'S', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;
inline constexpr std::uint32_t kCheckpointMetaBytes = 48;

struct Checkpoint
{
    RadialState state;
    double b = 0.0;
    double reference_grad_norm_sq = 0.0;
    std::uint64_t config_hash = 0;
};

namespace detail
{

template <class T>
void put_le(std::vector<unsigned char> &out, T value)
{
    static_assert(sizeof(T) == 4 || sizeof(T) == 8);
    using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
    const U bits = std::bit_cast<U>(value);
    for (std::size_t k = 0; k < sizeof(T); ++k) {
        out.push_back(static_cast<unsigned char>(bits >> (8 * k)));
    }
}

template <class T>
T get_le(const unsigned char *in)
{
    using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
    U bits = 0;
    for (std::size_t k = 0; k < sizeof(T); ++k) {
        bits |= U(in[k]) << (8 * k);
    }
    return std::bit_cast<T>(bits);
}

} // namespace detail

inline std::vector<unsigned char> encode_checkpoint(const Checkpoint &c)
{
    std::vector<unsigned char> out;
    out.reserve(16 + kCheckpointMetaBytes + 16 * c.state.w.size());
    out.insert(out.end(), kCheckpointMagic.begin(), kCheckpointMagic.end());
    detail::put_le(out, kCheckpointVersion);
    detail::put_le(out, kCheckpointMetaBytes);
    detail::put_le(out, c.state.grid.r_max());
    detail::put_le(out, std::uint64_t(c.state.grid.n()));
    detail::put_le(out, c.state.t);
    detail::put_le(out, c.b);
    detail::put_le(out, c.reference_grad_norm_sq);
    detail::put_le(out, c.config_hash);
    for (const auto &z : c.state.w) {
        detail::put_le(out, z.real());
        detail::put_le(out, z.imag());
    }
    return out;
}

inline Checkpoint decode_checkpoint(const std::vector<unsigned char> &bytes)
{
    if (bytes.size() < 16 || std::memcmp(bytes.data(), kCheckpointMagic.data(), 8) != 0) {
        throw ValidationError("checkpoint", "not a checkpoint file (bad magic)");
    }
    const auto version = detail::get_le<std::uint32_t>(bytes.data() + 8);
    if (version != kCheckpointVersion) {
        throw ValidationError("checkpoint", "unsupported checkpoint version " + std::to_string(version));
    }
    const auto meta = detail::get_le<std::uint32_t>(bytes.data() + 12);
    if (meta != kCheckpointMetaBytes || bytes.size() < 16 + meta) {
        throw ValidationError("checkpoint", "truncated checkpoint metadata");
    }
    const unsigned char *m = bytes.data() + 16;
    const double r_max = detail::get_le<double>(m);
    const auto n = detail::get_le<std::uint64_t>(m + 8);
    const double t = detail::get_le<double>(m + 16);
    Checkpoint c{RadialState::zero(RadialGrid::make(r_max, n)), detail::get_le<double>(m + 24),
                 detail::get_le<double>(m + 32), detail::get_le<std::uint64_t>(m + 40)};
    c.state.t = t;
    if (bytes.size() != 16 + meta + 16 * n) {
        throw ValidationError("checkpoint", "sample block has the wrong size for n = " + std::to_string(n));
    }
    const unsigned char *s = m + meta;
    for (std::size_t i = 0; i < n; ++i) {
        c.state.w[i] = {detail::get_le<double>(s + 16 * i), detail::get_le<double>(s + 16 * i + 8)};
    }
    if (!c.state.finite()) {
        throw ValidationError("checkpoint", "non-finite samples");
    }
    return c;
}

/// Writes via a temporary file and rename so a crash never leaves a torn file.
inline void write_checkpoint(const std::filesystem::path &path, const Checkpoint &c)
{
    const auto bytes = encode_checkpoint(c);
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) {
            throw Error("cannot open " + tmp.string() + " for writing");
        }
        os.write(reinterpret_cast<const char *>(bytes.data()), std::streamsize(bytes.size()));
        if (!os) {
            throw Error("write failed for " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

inline Checkpoint read_checkpoint(const std::filesystem::path &path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw ValidationError("checkpoint", "cannot open " + path.string());
    }
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    return decode_checkpoint(bytes);
}

} // namespace inls
