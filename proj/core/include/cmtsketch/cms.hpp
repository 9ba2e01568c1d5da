#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include "cmtsketch/config.hpp"
#include "cmtsketch/hash.hpp"

namespace cmt {

/// Linear Count-Min sketch with 32-bit saturating cells.
class CountMinSketch {
public:
    using Cell = std::uint32_t;
    static constexpr Cell kMaxCell = std::numeric_limits<Cell>::max();

    enum class UpdateRule {
        Conservative,
        Plain,  // every row gets +1; kept for comparisons against CU
    };

    explicit CountMinSketch(const SketchConfig& config, UpdateRule rule = UpdateRule::Conservative);

    void increment(KeyDigest key) { update(key, 1); }

    /// Equivalent to `count` single increments. Under conservative update
    /// the key's cells become max(cell, min + count).
    void update(KeyDigest key, std::uint64_t count);

    Cell estimate(KeyDigest key) const;

    void increment(std::string_view key) { update(hasher_.digest(key), 1); }
    void update(std::string_view key, std::uint64_t count) { update(hasher_.digest(key), count); }
    Cell estimate(std::string_view key) const { return estimate(hasher_.digest(key)); }

    const SketchConfig& config() const { return config_; }
    const RowHasher& hasher() const { return hasher_; }
    UpdateRule rule() const { return rule_; }

    Cell cell(std::uint32_t row, std::uint64_t col) const { return cells_[row * config_.width + col]; }
    std::span<const Cell> cells() const { return cells_; }
    std::span<Cell> mutable_cells() { return cells_; }

    /// Bytes held by the counters.
    std::uint64_t payload_bytes() const { return cells_.size() * sizeof(Cell); }

private:
    SketchConfig config_;
    RowHasher hasher_;
    UpdateRule rule_;
    std::vector<Cell> cells_;
};

}  // namespace cmt
