#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "cmtsketch/config.hpp"
#include "cmtsketch/hash.hpp"
#include "cmtsketch/random.hpp"

namespace cmt {

/// Count-Min-Log sketch with conservative update.
///
/// Cells hold Morris-style exponents c of width 8 or 16 bits. An exponent c
/// decodes to (base^c - 1) / (base - 1), and an increment at minimum
/// exponent c fires with probability base^-c. All rows share a single
/// random stream seeded from the config seed, so a sketch is a pure
/// function of (config, update sequence).
class CountMinLogSketch {
public:
    explicit CountMinLogSketch(const SketchConfig& config);

    /// Decoded value of a single exponent.
    static double point_value(std::uint32_t exponent, double base);

    /// Whether an increment at minimum exponent `c_min` fires for draw `u`.
    static bool fires(std::uint32_t c_min, double u, double base);

    void increment(KeyDigest key) { increment_with_draw(key, rng_.uniform()); }

    /// One conservative-update step with an externally supplied draw u in
    /// [0, 1). Rows at the minimum exponent advance by one if the step fires.
    void increment_with_draw(KeyDigest key, double u);

    /// `count` single increments, each with its own draw.
    void update(KeyDigest key, std::uint64_t count);

    double estimate(KeyDigest key) const { return decode_[min_exponent(key)]; }
    std::uint32_t min_exponent(KeyDigest key) const;

    void increment(std::string_view key) { increment(hasher_.digest(key)); }
    void update(std::string_view key, std::uint64_t count) { update(hasher_.digest(key), count); }
    double estimate(std::string_view key) const { return estimate(hasher_.digest(key)); }

    std::uint32_t exponent(std::uint32_t row, std::uint64_t col) const {
        return load(row * config_.width + col);
    }
    void set_exponent(std::uint32_t row, std::uint64_t col, std::uint32_t value);

    const SketchConfig& config() const { return config_; }
    const CmlParams& params() const { return config_.cml; }
    const RowHasher& hasher() const { return hasher_; }

    std::uint64_t rng_state() const { return rng_.state(); }
    void set_rng_state(std::uint64_t s) { rng_.set_state(s); }

    /// Raw little-endian cell bytes, row-major.
    std::span<const std::uint8_t> cell_bytes() const { return bytes_; }
    std::span<std::uint8_t> mutable_cell_bytes() { return bytes_; }

    std::uint64_t payload_bytes() const { return bytes_.size(); }

private:
    std::uint32_t load(std::uint64_t i) const {
        if (wide_) return bytes_[2 * i] | (static_cast<std::uint32_t>(bytes_[2 * i + 1]) << 8);
        return bytes_[i];
    }
    void store(std::uint64_t i, std::uint32_t v) {
        if (wide_) {
            bytes_[2 * i] = static_cast<std::uint8_t>(v);
            bytes_[2 * i + 1] = static_cast<std::uint8_t>(v >> 8);
        } else {
            bytes_[i] = static_cast<std::uint8_t>(v);
        }
    }

    SketchConfig config_;
    RowHasher hasher_;
    SplitMix64 rng_;
    bool wide_;
    std::uint32_t max_exponent_;
    std::vector<std::uint8_t> bytes_;
    std::vector<double> fire_prob_;  // base^-c
    std::vector<double> decode_;     // point_value(c)
};

}  // namespace cmt
