#include "cmtsketch/cms.hpp"

#include <algorithm>

namespace cmt {

namespace {

CountMinSketch::Cell saturating_add(std::uint64_t a, std::uint64_t b) {
    const std::uint64_t s = a + b;
    return s > CountMinSketch::kMaxCell || s < a ? CountMinSketch::kMaxCell
                                                  : static_cast<CountMinSketch::Cell>(s);
}

}  // namespace

CountMinSketch::CountMinSketch(const SketchConfig& config, UpdateRule rule)
    : config_(config), hasher_(config.seed, config.depth, config.width), rule_(rule) {
    config_.variant = Variant::Cms;
    config_.validate();
    cells_.assign(static_cast<std::size_t>(config_.depth) * config_.width, 0);
}

void CountMinSketch::update(KeyDigest key, std::uint64_t count) {
    if (count == 0) return;
    const std::uint64_t w = config_.width;

    if (rule_ == UpdateRule::Plain) {
        for (std::uint32_t r = 0; r < config_.depth; ++r) {
            Cell& c = cells_[r * w + hasher_.cell(key, r)];
            c = saturating_add(c, count);
        }
        return;
    }

    // cell indices are reused for the write pass
    constexpr std::uint32_t kInline = 16;
    std::uint64_t inline_idx[kInline];
    std::vector<std::uint64_t> heap_idx;
    std::uint64_t* idx = inline_idx;
    if (config_.depth > kInline) {
        heap_idx.resize(config_.depth);
        idx = heap_idx.data();
    }

    Cell m = kMaxCell;
    for (std::uint32_t r = 0; r < config_.depth; ++r) {
        idx[r] = r * w + hasher_.cell(key, r);
        m = std::min(m, cells_[idx[r]]);
    }
    const Cell target = saturating_add(m, count);
    for (std::uint32_t r = 0; r < config_.depth; ++r) {
        Cell& c = cells_[idx[r]];
        if (c < target) c = target;
    }
}

CountMinSketch::Cell CountMinSketch::estimate(KeyDigest key) const {
    const std::uint64_t w = config_.width;
    Cell m = kMaxCell;
    for (std::uint32_t r = 0; r < config_.depth; ++r) {
        m = std::min(m, cells_[r * w + hasher_.cell(key, r)]);
    }
    return m;
}

}  // namespace cmt
