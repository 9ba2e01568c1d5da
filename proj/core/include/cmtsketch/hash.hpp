#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace cmt {

struct SketchConfig;

/// Seeded 64-bit multiply-xor-shift hash over raw key bytes.
std::uint64_t hash_bytes(std::string_view bytes, std::uint64_t seed);

/// Seed-dependent digest of a key. Every row cell is derived from it, so
/// callers that query the same key many times can hash the bytes once.
struct KeyDigest {
    std::uint64_t value = 0;
    bool operator==(const KeyDigest&) const = default;
};

struct RowIndex {
    std::uint32_t row = 0;
    std::uint64_t cell = 0;
    bool operator==(const RowIndex&) const = default;
};

/// Per-row cell mapping of a sketch: one derived seed per row.
class RowHasher {
public:
    RowHasher(std::uint64_t seed, std::uint32_t depth, std::uint64_t width);

    KeyDigest digest(std::string_view key) const { return {hash_bytes(key, seed_)}; }

    std::uint64_t cell(KeyDigest d, std::uint32_t row) const;

    std::uint64_t seed() const { return seed_; }
    std::uint32_t depth() const { return static_cast<std::uint32_t>(row_seeds_.size()); }
    std::uint64_t width() const { return width_; }

private:
    std::uint64_t seed_;
    std::uint64_t width_;
    std::vector<std::uint64_t> row_seeds_;
};

/// Cell of `key` in `row` under `config`. Throws std::out_of_range when
/// row >= config.depth.
RowIndex hash_cell(std::string_view key, std::uint32_t row, const SketchConfig& config);

}  // namespace cmt
