#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "cmtsketch/config.hpp"
#include "cmtsketch/hash.hpp"

namespace cmt {

/// Bit positions of every field inside one CMTS block, plus the counter
/// value codec that works on them.
///
/// Bits are numbered little-endian from the start of the block: counting
/// layers 0..L-1, then barrier levels 0..L-1, then the spire. A counter at
/// offset i owns counting bit i >> l of layer l and barrier bit
/// min(i >> (l + 1), barrier_width(l) - 1) of level l, so the low layers
/// are private and higher layers are shared by 2^l neighbours.
///
/// A counter with b contiguous barrier bits set (starting at level 0) reads
/// b + 1 counting bits c (the spire supplies the high bits once b = L) and
/// decodes to c + 2 * (2^b - 1). Values with b barriers therefore fill the
/// range [2^(b+1) - 2, 2^(b+2) - 3].
class CmtsGeometry {
public:
    static constexpr std::uint32_t kMaxLevels = 25;

    explicit CmtsGeometry(const CmtsLayout& layout);

    const CmtsLayout& layout() const { return layout_; }
    std::uint32_t base_width() const { return layout_.base_width; }
    std::uint32_t levels() const { return layout_.levels; }
    std::uint32_t spire_bits() const { return layout_.spire_bits; }

    std::uint32_t counting_width(std::uint32_t level) const { return layout_.base_width >> level; }
    std::uint32_t barrier_width(std::uint32_t level) const { return barrier_width_[level]; }
    std::uint32_t counting_offset(std::uint32_t level) const { return counting_offset_[level]; }
    std::uint32_t barrier_offset(std::uint32_t level) const { return barrier_offset_[level]; }
    std::uint32_t spire_offset() const { return spire_offset_; }

    std::uint32_t counting_index(std::uint32_t offset, std::uint32_t level) const { return offset >> level; }
    std::uint32_t barrier_index(std::uint32_t offset, std::uint32_t level) const {
        const std::uint32_t i = offset >> (level + 1);
        return i < barrier_width_[level] ? i : barrier_width_[level] - 1;
    }

    /// Meaningful bits per block and the byte-padded size actually stored.
    std::uint32_t block_bits() const { return block_bits_; }
    std::uint32_t block_bytes() const { return (block_bits_ + 7) / 8; }

    /// 2 * (2^L - 1) + 2^(L+S) - 1
    std::uint64_t max_value() const { return max_value_; }

    /// Barrier count that encodes `value`: min(L, bit_length((value + 2) / 4)).
    std::uint32_t barriers_for(std::uint64_t value) const;

    /// Number of contiguous barrier bits set for the counter, from level 0.
    std::uint32_t barrier_depth(const std::uint64_t* words, std::uint64_t block_bit,
                                std::uint32_t offset) const;

    std::uint64_t decode(const std::uint64_t* words, std::uint64_t block_bit,
                         std::uint32_t offset) const;

    /// Writes `value` (clamped to max_value()) into the counter. Barrier bits
    /// are only ever set; the counter's counting bits (and the spire, when
    /// all L barriers are needed) are overwritten.
    void encode(std::uint64_t* words, std::uint64_t block_bit, std::uint32_t offset,
                std::uint64_t value) const;

private:
    CmtsLayout layout_;
    std::array<std::uint32_t, kMaxLevels> counting_offset_{};
    std::array<std::uint32_t, kMaxLevels> barrier_offset_{};
    std::array<std::uint32_t, kMaxLevels> barrier_width_{};
    std::uint32_t spire_offset_ = 0;
    std::uint32_t block_bits_ = 0;
    std::uint64_t max_value_ = 0;
};

/// A standalone block, mostly useful for inspecting the bit layout.
class CmtsBlock {
public:
    explicit CmtsBlock(const CmtsLayout& layout);

    const CmtsGeometry& geometry() const { return geo_; }

    std::uint64_t decode(std::uint32_t offset) const;
    void encode(std::uint32_t offset, std::uint64_t value);
    std::uint32_t barrier_depth(std::uint32_t offset) const;

    bool counting_bit(std::uint32_t level, std::uint32_t index) const;
    bool barrier_bit(std::uint32_t level, std::uint32_t index) const;
    std::uint64_t spire() const;

    void set_counting_bit(std::uint32_t level, std::uint32_t index, bool v);
    void set_barrier_bit(std::uint32_t level, std::uint32_t index);
    void set_spire(std::uint64_t v);

    std::span<const std::uint64_t> words() const { return words_; }

private:
    CmtsGeometry geo_;
    std::vector<std::uint64_t> words_;
};

class IncompatibleSketches : public std::invalid_argument {
public:
    IncompatibleSketches() : std::invalid_argument("incompatible sketches") {}
};

/// How merge writes summed counters back into a block.
enum class CmtsMergePolicy : std::uint8_t {
    AscendingWriteBack = 0,
};

/// Count-Min Tree Sketch with conservative update.
///
/// Each row of `width` counters is split into width / W blocks. The key's
/// column selects a block and an offset inside it.
class CountMinTreeSketch {
public:
    explicit CountMinTreeSketch(const SketchConfig& config);

    void increment(KeyDigest key);
    /// `count` conservative single increments.
    void update(KeyDigest key, std::uint64_t count);
    std::uint64_t estimate(KeyDigest key) const;

    void increment(std::string_view key) { increment(hasher_.digest(key)); }
    void update(std::string_view key, std::uint64_t count) { update(hasher_.digest(key), count); }
    std::uint64_t estimate(std::string_view key) const { return estimate(hasher_.digest(key)); }

    std::uint64_t decode(std::uint32_t row, std::uint64_t col) const;
    void encode(std::uint32_t row, std::uint64_t col, std::uint64_t value);
    std::uint32_t barrier_depth(std::uint32_t row, std::uint64_t col) const;

    /// Sum of two sketches built with the same configuration. Every block is
    /// rebuilt from zero by writing the clamped counter sums in ascending
    /// order (ties by offset), so the largest counter's shared bits land last.
    /// Throws IncompatibleSketches when configs differ.
    static CountMinTreeSketch merge(const CountMinTreeSketch& a, const CountMinTreeSketch& b);

    const SketchConfig& config() const { return config_; }
    const CmtsGeometry& geometry() const { return geo_; }
    const RowHasher& hasher() const { return hasher_; }
    CmtsMergePolicy merge_policy() const { return CmtsMergePolicy::AscendingWriteBack; }

    std::uint64_t blocks_per_row() const { return blocks_per_row_; }
    std::uint64_t block_count() const { return blocks_per_row_ * config_.depth; }

    /// Bytes of packed block storage: depth * blocks_per_row * block_bytes.
    std::uint64_t payload_bytes() const { return block_count() * geo_.block_bytes(); }

    /// Packed blocks, back to back at block_bytes() strides. Trailing words
    /// beyond payload_bytes() are padding and always zero.
    std::span<const std::uint64_t> words() const { return words_; }
    std::span<std::uint64_t> mutable_words() { return words_; }

    /// Copy of the storage with every non-barrier bit cleared.
    std::vector<std::uint64_t> barrier_bits() const;

private:
    std::uint64_t block_bit(std::uint32_t row, std::uint64_t block) const {
        return (row * blocks_per_row_ + block) * geo_.block_bytes() * 8ULL;
    }

    SketchConfig config_;
    CmtsGeometry geo_;
    RowHasher hasher_;
    std::uint64_t blocks_per_row_;
    std::vector<std::uint64_t> words_;
};

/// Serialized size of a CMTS sketch: header plus
/// depth * (width / W) * ceil(block_bits / 8).
std::uint64_t cmts_memory_bytes(const SketchConfig& config);

}  // namespace cmt
