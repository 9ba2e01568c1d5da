#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmtsketch/config.hpp"

namespace cmt {

class Sketch;

// Sketch file layout, all integers little-endian:
//
//   "CMSK" | u16 version | u8 variant tag | u32 depth | u64 width | u64 seed
//   CML:  f64 base | u8 cell bits | u64 rng state
//   CMTS: u32 base width | u8 levels | u8 spire bits | u8 merge policy
//   payload: CMS u32 cells, CML u8/u16 cells (row-major), CMTS packed
//   blocks of ceil(block_bits / 8) bytes each (counting layers from layer 0,
//   then barrier levels, then the spire; bit k of a block is bit k % 8 of
//   byte k / 8).

inline constexpr char kSketchMagic[4] = {'C', 'M', 'S', 'K'};
inline constexpr std::uint16_t kSketchFormatVersion = 1;

enum class FormatErrc {
    BadMagic,
    UnsupportedVersion,
    UnknownVariant,
    Truncated,
    InvalidConfig,
    TrailingBytes,
};

class FormatError : public std::runtime_error {
public:
    FormatError(FormatErrc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    FormatErrc code() const { return code_; }

private:
    FormatErrc code_;
};

/// Size of the header preceding the payload for a given variant.
std::uint64_t serialized_header_bytes(Variant v);

std::vector<std::uint8_t> serialize(const Sketch& sketch);
Sketch deserialize(std::span<const std::uint8_t> bytes);

void save_sketch(const Sketch& sketch, const std::filesystem::path& path);
Sketch load_sketch(const std::filesystem::path& path);

}  // namespace cmt
