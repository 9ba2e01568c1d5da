#include "cmtsketch/cmts.hpp"

#include <algorithm>
#include <bit>
#include <numeric>

#include "cmtsketch/serialize.hpp"

namespace cmt {

namespace {

inline bool get_bit(const std::uint64_t* w, std::uint64_t pos) {
    return (w[pos >> 6] >> (pos & 63)) & 1u;
}

inline void set_bit(std::uint64_t* w, std::uint64_t pos) {
    w[pos >> 6] |= std::uint64_t{1} << (pos & 63);
}

inline void write_bit(std::uint64_t* w, std::uint64_t pos, bool v) {
    const std::uint64_t m = std::uint64_t{1} << (pos & 63);
    w[pos >> 6] = v ? (w[pos >> 6] | m) : (w[pos >> 6] & ~m);
}

// n <= 62; the storage keeps one spare word so pos + n may cross a word.
inline std::uint64_t read_field(const std::uint64_t* w, std::uint64_t pos, std::uint32_t n) {
    const std::uint64_t i = pos >> 6;
    const std::uint32_t s = pos & 63;
    std::uint64_t v = w[i] >> s;
    if (s + n > 64) v |= w[i + 1] << (64 - s);
    return v & ((std::uint64_t{1} << n) - 1);
}

inline void write_field(std::uint64_t* w, std::uint64_t pos, std::uint32_t n, std::uint64_t v) {
    const std::uint64_t i = pos >> 6;
    const std::uint32_t s = pos & 63;
    const std::uint64_t mask = (std::uint64_t{1} << n) - 1;
    v &= mask;
    w[i] = (w[i] & ~(mask << s)) | (v << s);
    if (s + n > 64) {
        const std::uint32_t spill = 64 - s;
        w[i + 1] = (w[i + 1] & ~(mask >> spill)) | (v >> spill);
    }
}

std::size_t words_for_bits(std::uint64_t bits) { return static_cast<std::size_t>((bits + 63) / 64) + 1; }

}  // namespace

// ---------------------------------------------------------------------------
// CmtsGeometry

CmtsGeometry::CmtsGeometry(const CmtsLayout& layout) : layout_(layout) {
    layout_.validate();
    const std::uint32_t L = layout_.levels;
    std::uint32_t pos = 0;
    for (std::uint32_t l = 0; l < L; ++l) {
        counting_offset_[l] = pos;
        pos += counting_width(l);
    }
    for (std::uint32_t l = 0; l < L; ++l) {
        barrier_width_[l] = std::max<std::uint32_t>(layout_.base_width >> (l + 1), 1);
        barrier_offset_[l] = pos;
        pos += barrier_width_[l];
    }
    spire_offset_ = pos;
    block_bits_ = pos + layout_.spire_bits;
    max_value_ = 2 * ((std::uint64_t{1} << L) - 1) + (std::uint64_t{1} << (L + layout_.spire_bits)) - 1;
}

std::uint32_t CmtsGeometry::barriers_for(std::uint64_t value) const {
    const auto nb = static_cast<std::uint32_t>(std::bit_width((value + 2) / 4));
    return std::min(nb, layout_.levels);
}

std::uint32_t CmtsGeometry::barrier_depth(const std::uint64_t* words, std::uint64_t block_bit,
                                          std::uint32_t offset) const {
    std::uint32_t b = 0;
    while (b < layout_.levels &&
           get_bit(words, block_bit + barrier_offset_[b] + barrier_index(offset, b))) {
        ++b;
    }
    return b;
}

std::uint64_t CmtsGeometry::decode(const std::uint64_t* words, std::uint64_t block_bit,
                                   std::uint32_t offset) const {
    const std::uint32_t L = layout_.levels;
    const std::uint32_t b = barrier_depth(words, block_bit, offset);
    const std::uint32_t top = b < L ? b : L - 1;

    std::uint64_t c = 0;
    for (std::uint32_t l = 0; l <= top; ++l) {
        c |= static_cast<std::uint64_t>(get_bit(words, block_bit + counting_offset_[l] + (offset >> l))) << l;
    }
    if (b == L) {
        c |= read_field(words, block_bit + spire_offset_, layout_.spire_bits) << L;
    }
    return c + 2 * ((std::uint64_t{1} << b) - 1);
}

void CmtsGeometry::encode(std::uint64_t* words, std::uint64_t block_bit, std::uint32_t offset,
                          std::uint64_t value) const {
    const std::uint32_t L = layout_.levels;
    value = std::min(value, max_value_);
    const std::uint32_t nb = barriers_for(value);
    const std::uint64_t nc = value - 2 * ((std::uint64_t{1} << nb) - 1);

    for (std::uint32_t l = 0; l < nb; ++l) {
        set_bit(words, block_bit + barrier_offset_[l] + barrier_index(offset, l));
    }
    const std::uint32_t top = nb < L ? nb : L - 1;
    for (std::uint32_t l = 0; l <= top; ++l) {
        write_bit(words, block_bit + counting_offset_[l] + (offset >> l), (nc >> l) & 1u);
    }
    if (nb == L) {
        write_field(words, block_bit + spire_offset_, layout_.spire_bits, nc >> L);
    }
}

// ---------------------------------------------------------------------------
// CmtsBlock

CmtsBlock::CmtsBlock(const CmtsLayout& layout)
    : geo_(layout), words_(words_for_bits(geo_.block_bytes() * 8ULL), 0) {}

std::uint64_t CmtsBlock::decode(std::uint32_t offset) const {
    if (offset >= geo_.base_width()) throw std::out_of_range("counter offset out of range");
    return geo_.decode(words_.data(), 0, offset);
}

void CmtsBlock::encode(std::uint32_t offset, std::uint64_t value) {
    if (offset >= geo_.base_width()) throw std::out_of_range("counter offset out of range");
    geo_.encode(words_.data(), 0, offset, value);
}

std::uint32_t CmtsBlock::barrier_depth(std::uint32_t offset) const {
    if (offset >= geo_.base_width()) throw std::out_of_range("counter offset out of range");
    return geo_.barrier_depth(words_.data(), 0, offset);
}

bool CmtsBlock::counting_bit(std::uint32_t level, std::uint32_t index) const {
    if (level >= geo_.levels() || index >= geo_.counting_width(level)) throw std::out_of_range("bit out of range");
    return get_bit(words_.data(), geo_.counting_offset(level) + index);
}

bool CmtsBlock::barrier_bit(std::uint32_t level, std::uint32_t index) const {
    if (level >= geo_.levels() || index >= geo_.barrier_width(level)) throw std::out_of_range("bit out of range");
    return get_bit(words_.data(), geo_.barrier_offset(level) + index);
}

std::uint64_t CmtsBlock::spire() const {
    return read_field(words_.data(), geo_.spire_offset(), geo_.spire_bits());
}

void CmtsBlock::set_counting_bit(std::uint32_t level, std::uint32_t index, bool v) {
    if (level >= geo_.levels() || index >= geo_.counting_width(level)) throw std::out_of_range("bit out of range");
    write_bit(words_.data(), geo_.counting_offset(level) + index, v);
}

void CmtsBlock::set_barrier_bit(std::uint32_t level, std::uint32_t index) {
    if (level >= geo_.levels() || index >= geo_.barrier_width(level)) throw std::out_of_range("bit out of range");
    set_bit(words_.data(), geo_.barrier_offset(level) + index);
}

void CmtsBlock::set_spire(std::uint64_t v) {
    write_field(words_.data(), geo_.spire_offset(), geo_.spire_bits(), v);
}

// ---------------------------------------------------------------------------
// CountMinTreeSketch

CountMinTreeSketch::CountMinTreeSketch(const SketchConfig& config)
    : config_([&] {
          SketchConfig c = config;
          c.variant = Variant::Cmts;
          c.validate();
          return c;
      }()),
      geo_(config_.cmts),
      hasher_(config_.seed, config_.depth, config_.width),
      blocks_per_row_(config_.width / config_.cmts.base_width),
      words_(words_for_bits(payload_bytes() * 8), 0) {}

std::uint64_t CountMinTreeSketch::decode(std::uint32_t row, std::uint64_t col) const {
    const std::uint32_t W = geo_.base_width();
    return geo_.decode(words_.data(), block_bit(row, col / W), static_cast<std::uint32_t>(col % W));
}

void CountMinTreeSketch::encode(std::uint32_t row, std::uint64_t col, std::uint64_t value) {
    const std::uint32_t W = geo_.base_width();
    geo_.encode(words_.data(), block_bit(row, col / W), static_cast<std::uint32_t>(col % W), value);
}

std::uint32_t CountMinTreeSketch::barrier_depth(std::uint32_t row, std::uint64_t col) const {
    const std::uint32_t W = geo_.base_width();
    return geo_.barrier_depth(words_.data(), block_bit(row, col / W), static_cast<std::uint32_t>(col % W));
}

void CountMinTreeSketch::increment(KeyDigest key) {
    constexpr std::uint32_t kInline = 16;
    struct Slot {
        std::uint64_t bit;
        std::uint32_t offset;
        std::uint64_t value;
    };
    Slot inline_slots[kInline];
    std::vector<Slot> heap_slots;
    Slot* slots = inline_slots;
    if (config_.depth > kInline) {
        heap_slots.resize(config_.depth);
        slots = heap_slots.data();
    }

    const std::uint32_t W = geo_.base_width();
    std::uint64_t m = geo_.max_value();
    for (std::uint32_t r = 0; r < config_.depth; ++r) {
        const std::uint64_t col = hasher_.cell(key, r);
        Slot& s = slots[r];
        s.bit = block_bit(r, col / W);
        s.offset = static_cast<std::uint32_t>(col % W);
        s.value = geo_.decode(words_.data(), s.bit, s.offset);
        m = std::min(m, s.value);
    }
    if (m >= geo_.max_value()) return;
    const std::uint64_t target = m + 1;
    for (std::uint32_t r = 0; r < config_.depth; ++r) {
        if (slots[r].value < target) geo_.encode(words_.data(), slots[r].bit, slots[r].offset, target);
    }
}

void CountMinTreeSketch::update(KeyDigest key, std::uint64_t count) {
    for (std::uint64_t i = 0; i < count; ++i) increment(key);
}

std::uint64_t CountMinTreeSketch::estimate(KeyDigest key) const {
    const std::uint32_t W = geo_.base_width();
    std::uint64_t m = geo_.max_value();
    for (std::uint32_t r = 0; r < config_.depth; ++r) {
        const std::uint64_t col = hasher_.cell(key, r);
        m = std::min(m, geo_.decode(words_.data(), block_bit(r, col / W), static_cast<std::uint32_t>(col % W)));
    }
    return m;
}

CountMinTreeSketch CountMinTreeSketch::merge(const CountMinTreeSketch& a, const CountMinTreeSketch& b) {
    if (!(a.config_ == b.config_)) throw IncompatibleSketches();

    CountMinTreeSketch out(a.config_);
    const CmtsGeometry& geo = a.geo_;
    const std::uint32_t W = geo.base_width();
    const std::uint64_t cap = geo.max_value();

    std::vector<std::uint64_t> sums(W);
    std::vector<std::uint32_t> order(W);
    for (std::uint32_t r = 0; r < a.config_.depth; ++r) {
        for (std::uint64_t blk = 0; blk < a.blocks_per_row_; ++blk) {
            const std::uint64_t bit = a.block_bit(r, blk);
            for (std::uint32_t i = 0; i < W; ++i) {
                const std::uint64_t x = geo.decode(a.words_.data(), bit, i);
                const std::uint64_t y = geo.decode(b.words_.data(), bit, i);
                sums[i] = std::min(x + y, cap);
            }
            std::iota(order.begin(), order.end(), 0u);
            std::stable_sort(order.begin(), order.end(),
                             [&](std::uint32_t p, std::uint32_t q) { return sums[p] < sums[q]; });
            for (std::uint32_t i : order) {
                // zero is already what a fresh block decodes to
                if (sums[i] != 0) geo.encode(out.words_.data(), bit, i, sums[i]);
            }
        }
    }
    return out;
}

std::vector<std::uint64_t> CountMinTreeSketch::barrier_bits() const {
    std::vector<std::uint64_t> mask(words_.size(), 0);
    for (std::uint64_t blk = 0; blk < block_count(); ++blk) {
        const std::uint64_t base = blk * geo_.block_bytes() * 8ULL;
        for (std::uint32_t l = 0; l < geo_.levels(); ++l) {
            for (std::uint32_t j = 0; j < geo_.barrier_width(l); ++j) {
                set_bit(mask.data(), base + geo_.barrier_offset(l) + j);
            }
        }
    }
    for (std::size_t i = 0; i < mask.size(); ++i) mask[i] &= words_[i];
    return mask;
}

std::uint64_t cmts_memory_bytes(const SketchConfig& config) {
    config.validate();
    const CmtsGeometry geo(config.cmts);
    return serialized_header_bytes(Variant::Cmts) +
           static_cast<std::uint64_t>(config.depth) * (config.width / config.cmts.base_width) * geo.block_bytes();
}

}  // namespace cmt
