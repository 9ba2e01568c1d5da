#include "cmtsketch/hash.hpp"

#include <bit>
#include <cstring>
#include <stdexcept>

#include "cmtsketch/config.hpp"
#include "cmtsketch/random.hpp"

namespace cmt {

namespace {

constexpr std::uint64_t kMulA = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kMulB = 0xC2B2AE3D27D4EB4FULL;

std::uint64_t load_le64(const unsigned char* p, std::size_t n) {
    std::uint64_t w = 0;
    for (std::size_t i = 0; i < n; ++i) {
        w |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    }
    return w;
}

}  // namespace

std::uint64_t hash_bytes(std::string_view bytes, std::uint64_t seed) {
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    std::size_t n = bytes.size();
    std::uint64_t h = mix64(seed ^ (n * kMulB));

    while (n >= 8) {
        const std::uint64_t w = load_le64(p, 8);
        h ^= mix64(w * kMulA);
        h = std::rotl(h, 29) * kMulB;
        p += 8;
        n -= 8;
    }
    if (n > 0) {
        // tail bytes, tagged with their count so "a" and "a\0" differ
        const std::uint64_t w = load_le64(p, n) | (static_cast<std::uint64_t>(n) << 56);
        h ^= mix64(w * kMulA);
        h = std::rotl(h, 29) * kMulB;
    }
    return mix64(h);
}

RowHasher::RowHasher(std::uint64_t seed, std::uint32_t depth, std::uint64_t width)
    : seed_(seed), width_(width), row_seeds_(depth) {
    if (depth == 0 || width == 0) {
        throw ConfigError("depth and width must be positive");
    }
    for (std::uint32_t r = 0; r < depth; ++r) {
        row_seeds_[r] = mix64(seed + (static_cast<std::uint64_t>(r) + 1) * kMulA);
    }
}

std::uint64_t RowHasher::cell(KeyDigest d, std::uint32_t row) const {
    return mix64(d.value ^ row_seeds_[row]) % width_;
}

RowIndex hash_cell(std::string_view key, std::uint32_t row, const SketchConfig& config) {
    if (row >= config.depth) {
        throw std::out_of_range("row index out of range");
    }
    const RowHasher hasher(config.seed, config.depth, config.width);
    return {row, hasher.cell(hasher.digest(key), row)};
}

}  // namespace cmt
