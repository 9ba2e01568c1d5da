#include "cmtsketch/config.hpp"

#include <bit>

namespace cmt {

const char* variant_name(Variant v) {
    switch (v) {
        case Variant::Cms: return "CMS";
        case Variant::Cml: return "CML";
        case Variant::Cmts: return "CMTS";
    }
    return "unknown";
}

CmtsLayout CmtsLayout::full_depth(std::uint32_t base_width, std::uint32_t spire_bits) {
    if (!std::has_single_bit(base_width)) {
        throw ConfigError("CMTS base width must be a power of two");
    }
    return {base_width, static_cast<std::uint32_t>(std::countr_zero(base_width)) + 1, spire_bits};
}

void CmtsLayout::validate() const {
    if (base_width == 0 || !std::has_single_bit(base_width)) {
        throw ConfigError("CMTS base width must be a power of two");
    }
    if (base_width > (1u << 24)) {
        throw ConfigError("CMTS base width too large");
    }
    if (levels == 0) {
        throw ConfigError("CMTS needs at least one level");
    }
    // every counting layer must keep at least one bit
    if (levels - 1 > static_cast<std::uint32_t>(std::countr_zero(base_width))) {
        throw ConfigError("CMTS levels exceed log2(base width) + 1");
    }
    if (spire_bits == 0) {
        throw ConfigError("CMTS spire must have at least one bit");
    }
    if (levels + spire_bits > 62) {
        throw ConfigError("CMTS levels + spire bits must not exceed 62");
    }
}

void SketchConfig::validate() const {
    if (depth == 0) throw ConfigError("depth must be >= 1");
    if (width == 0) throw ConfigError("width must be >= 1");
    if (width > 0xFFFFFFFFULL * 64) throw ConfigError("width too large");
    switch (variant) {
        case Variant::Cms:
            break;
        case Variant::Cml:
            if (!(cml.base > 1.0)) throw ConfigError("CML base must be > 1");
            if (cml.cell_bits != 8 && cml.cell_bits != 16) {
                throw ConfigError("CML cell bits must be 8 or 16");
            }
            break;
        case Variant::Cmts:
            cmts.validate();
            if (width % cmts.base_width != 0) {
                throw ConfigError("CMTS width must be a multiple of the block base width");
            }
            break;
        default:
            throw ConfigError("unknown variant");
    }
}

SketchConfig cms_cu_config(std::uint32_t depth, std::uint64_t width, std::uint64_t seed) {
    SketchConfig c;
    c.depth = depth;
    c.width = width;
    c.seed = seed;
    c.variant = Variant::Cms;
    return c;
}

SketchConfig cmls16_cu_config(std::uint32_t depth, std::uint64_t width, std::uint64_t seed) {
    SketchConfig c = cms_cu_config(depth, width, seed);
    c.variant = Variant::Cml;
    c.cml = {1.00025, 16};
    return c;
}

SketchConfig cmls8_cu_config(std::uint32_t depth, std::uint64_t width, std::uint64_t seed) {
    SketchConfig c = cms_cu_config(depth, width, seed);
    c.variant = Variant::Cml;
    c.cml = {1.08, 8};
    return c;
}

SketchConfig cmts_cu_config(std::uint32_t depth, std::uint64_t width, std::uint64_t seed) {
    SketchConfig c = cms_cu_config(depth, width, seed);
    c.variant = Variant::Cmts;
    c.cmts = CmtsLayout::full_depth(128, 32);
    return c;
}

}  // namespace cmt
