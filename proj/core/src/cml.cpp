#include "cmtsketch/cml.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cmt {

namespace {

constexpr std::uint64_t kRngSalt = 0x636D6C2D726E6721ULL;

}  // namespace

double CountMinLogSketch::point_value(std::uint32_t exponent, double base) {
    if (exponent == 0) return 0.0;
    if (exponent == 1) return 1.0;
    // expm1/log1p keep precision for bases close to one (1.00025)
    return std::expm1(exponent * std::log1p(base - 1.0)) / (base - 1.0);
}

bool CountMinLogSketch::fires(std::uint32_t c_min, double u, double base) {
    return u < std::pow(base, -static_cast<double>(c_min));
}

CountMinLogSketch::CountMinLogSketch(const SketchConfig& config)
    : config_(config),
      hasher_(config.seed, config.depth, config.width),
      rng_(mix64(config.seed ^ kRngSalt)) {
    config_.variant = Variant::Cml;
    config_.validate();
    wide_ = config_.cml.cell_bits == 16;
    max_exponent_ = config_.cml.max_exponent();
    bytes_.assign(static_cast<std::size_t>(config_.depth) * config_.width * (wide_ ? 2 : 1), 0);

    fire_prob_.resize(max_exponent_ + 1);
    decode_.resize(max_exponent_ + 1);
    for (std::uint32_t c = 0; c <= max_exponent_; ++c) {
        fire_prob_[c] = std::pow(config_.cml.base, -static_cast<double>(c));
        decode_[c] = point_value(c, config_.cml.base);
    }
}

std::uint32_t CountMinLogSketch::min_exponent(KeyDigest key) const {
    std::uint32_t m = max_exponent_;
    for (std::uint32_t r = 0; r < config_.depth; ++r) {
        m = std::min(m, load(r * config_.width + hasher_.cell(key, r)));
    }
    return m;
}

void CountMinLogSketch::increment_with_draw(KeyDigest key, double u) {
    constexpr std::uint32_t kInline = 16;
    std::uint64_t inline_idx[kInline];
    std::vector<std::uint64_t> heap_idx;
    std::uint64_t* idx = inline_idx;
    if (config_.depth > kInline) {
        heap_idx.resize(config_.depth);
        idx = heap_idx.data();
    }

    std::uint32_t c_min = max_exponent_;
    for (std::uint32_t r = 0; r < config_.depth; ++r) {
        idx[r] = r * config_.width + hasher_.cell(key, r);
        c_min = std::min(c_min, load(idx[r]));
    }
    if (c_min == max_exponent_ || !(u < fire_prob_[c_min])) return;
    for (std::uint32_t r = 0; r < config_.depth; ++r) {
        if (load(idx[r]) == c_min) store(idx[r], c_min + 1);
    }
}

void CountMinLogSketch::update(KeyDigest key, std::uint64_t count) {
    for (std::uint64_t i = 0; i < count; ++i) increment(key);
}

void CountMinLogSketch::set_exponent(std::uint32_t row, std::uint64_t col, std::uint32_t value) {
    if (row >= config_.depth || col >= config_.width) throw std::out_of_range("cell out of range");
    if (value > max_exponent_) throw std::out_of_range("exponent exceeds cell width");
    store(row * config_.width + col, value);
}

}  // namespace cmt
