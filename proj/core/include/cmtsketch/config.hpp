#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace cmt {

enum class Variant : std::uint8_t {
    Cms = 0x01,
    Cml = 0x02,
    Cmts = 0x03,
};

const char* variant_name(Variant v);

/// Raised for any structurally invalid sketch configuration.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Logarithmic counter parameters of the Count-Min-Log sketch.
struct CmlParams {
    double base = 1.00025;
    std::uint32_t cell_bits = 16;  // 8 or 16

    std::uint32_t max_exponent() const { return (1u << cell_bits) - 1; }

    bool operator==(const CmlParams&) const = default;
};

/// Shared-bit geometry of one Count-Min Tree Sketch block.
///
/// A block holds `base_width` counters. Counting layer l has base_width >> l
/// bits, barrier level l has max(base_width >> (l + 1), 1) bits, and a single
/// spire of `spire_bits` bits sits above the last barrier level.
struct CmtsLayout {
    std::uint32_t base_width = 128;
    std::uint32_t levels = 8;
    std::uint32_t spire_bits = 32;

    /// Layout whose top counting layer is a single bit: levels = log2(W) + 1.
    static CmtsLayout full_depth(std::uint32_t base_width, std::uint32_t spire_bits);

    void validate() const;

    bool operator==(const CmtsLayout&) const = default;
};

struct SketchConfig {
    std::uint32_t depth = 4;
    std::uint64_t width = 1 << 16;
    std::uint64_t seed = 0;
    Variant variant = Variant::Cms;
    CmlParams cml{};
    CmtsLayout cmts{};

    void validate() const;

    bool operator==(const SketchConfig&) const = default;
};

// Parameter sets of the four compared variants.
SketchConfig cms_cu_config(std::uint32_t depth, std::uint64_t width, std::uint64_t seed);
SketchConfig cmls16_cu_config(std::uint32_t depth, std::uint64_t width, std::uint64_t seed);
SketchConfig cmls8_cu_config(std::uint32_t depth, std::uint64_t width, std::uint64_t seed);
SketchConfig cmts_cu_config(std::uint32_t depth, std::uint64_t width, std::uint64_t seed);

}  // namespace cmt
