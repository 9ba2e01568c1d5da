#include "cmtsketch/sketch.hpp"

#include <stdexcept>

namespace cmt {

Sketch::Impl Sketch::make(const SketchConfig& config) {
    config.validate();
    switch (config.variant) {
        case Variant::Cms: return Impl{std::in_place_type<CountMinSketch>, config};
        case Variant::Cml: return Impl{std::in_place_type<CountMinLogSketch>, config};
        case Variant::Cmts: return Impl{std::in_place_type<CountMinTreeSketch>, config};
    }
    throw ConfigError("unknown variant");
}

Sketch::Sketch(const SketchConfig& config) : impl_(make(config)) {}

KeyDigest Sketch::digest(std::string_view key) const {
    return visit([&](const auto& s) { return s.hasher().digest(key); });
}

void Sketch::update(KeyDigest key, std::uint64_t count) {
    if (count == 0) throw std::invalid_argument("update count must be >= 1");
    visit([&](auto& s) { s.update(key, count); });
}

double Sketch::estimate(KeyDigest key) const {
    return visit([&](const auto& s) { return static_cast<double>(s.estimate(key)); });
}

Variant Sketch::variant() const {
    return config().variant;
}

const SketchConfig& Sketch::config() const {
    return visit([](const auto& s) -> const SketchConfig& { return s.config(); });
}

std::uint64_t Sketch::payload_bytes() const {
    return visit([](const auto& s) { return s.payload_bytes(); });
}

}  // namespace cmt
