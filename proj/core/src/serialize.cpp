#include "cmtsketch/serialize.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "cmtsketch/sketch.hpp"

namespace cmt {

namespace {

constexpr std::uint64_t kCommonHeader = 4 + 2 + 1 + 4 + 8 + 8;

class ByteWriter {
public:
    explicit ByteWriter(std::vector<std::uint8_t>& out) : out_(out) {}

    void put(std::uint64_t v, int n) {
        for (int i = 0; i < n; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u8(std::uint8_t v) { put(v, 1); }
    void u16(std::uint16_t v) { put(v, 2); }
    void u32(std::uint32_t v) { put(v, 4); }
    void u64(std::uint64_t v) { put(v, 8); }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void raw(const void* p, std::size_t n) {
        const auto* b = static_cast<const std::uint8_t*>(p);
        out_.insert(out_.end(), b, b + n);
    }

private:
    std::vector<std::uint8_t>& out_;
};

class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> in) : in_(in) {}

    std::uint64_t get(int n) {
        need(static_cast<std::size_t>(n));
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(in_[pos_ + i]) << (8 * i);
        pos_ += static_cast<std::size_t>(n);
        return v;
    }
    std::uint8_t u8() { return static_cast<std::uint8_t>(get(1)); }
    std::uint16_t u16() { return static_cast<std::uint16_t>(get(2)); }
    std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
    std::uint64_t u64() { return get(8); }
    double f64() { return std::bit_cast<double>(u64()); }

    std::span<const std::uint8_t> take(std::uint64_t n) {
        need(n);
        auto s = in_.subspan(pos_, static_cast<std::size_t>(n));
        pos_ += static_cast<std::size_t>(n);
        return s;
    }

    std::size_t remaining() const { return in_.size() - pos_; }

private:
    void need(std::uint64_t n) const {
        if (n > in_.size() - pos_) throw FormatError(FormatErrc::Truncated, "truncated payload");
    }

    std::span<const std::uint8_t> in_;
    std::size_t pos_ = 0;
};

void write_cms(ByteWriter& w, const CountMinSketch& s) {
    for (std::uint32_t c : s.cells()) w.u32(c);
}

void write_cml(ByteWriter& w, const CountMinLogSketch& s) {
    w.f64(s.params().base);
    w.u8(static_cast<std::uint8_t>(s.params().cell_bits));
    w.u64(s.rng_state());
    const auto bytes = s.cell_bytes();
    w.raw(bytes.data(), bytes.size());
}

void write_cmts(ByteWriter& w, const CountMinTreeSketch& s) {
    const CmtsLayout& l = s.geometry().layout();
    w.u32(l.base_width);
    w.u8(static_cast<std::uint8_t>(l.levels));
    w.u8(static_cast<std::uint8_t>(l.spire_bits));
    w.u8(static_cast<std::uint8_t>(s.merge_policy()));
    const auto words = s.words();
    std::uint64_t n = s.payload_bytes();
    for (std::size_t i = 0; n > 0; ++i) {
        const int take = n >= 8 ? 8 : static_cast<int>(n);
        w.put(words[i], take);
        n -= static_cast<std::uint64_t>(take);
    }
}

}  // namespace

std::uint64_t serialized_header_bytes(Variant v) {
    switch (v) {
        case Variant::Cms: return kCommonHeader;
        case Variant::Cml: return kCommonHeader + 8 + 1 + 8;
        case Variant::Cmts: return kCommonHeader + 4 + 1 + 1 + 1;
    }
    return kCommonHeader;
}

std::vector<std::uint8_t> serialize(const Sketch& sketch) {
    const SketchConfig& c = sketch.config();
    std::vector<std::uint8_t> out;
    out.reserve(serialized_header_bytes(c.variant) + sketch.payload_bytes());
    ByteWriter w(out);
    w.raw(kSketchMagic, sizeof kSketchMagic);
    w.u16(kSketchFormatVersion);
    w.u8(static_cast<std::uint8_t>(c.variant));
    w.u32(c.depth);
    w.u64(c.width);
    w.u64(c.seed);
    sketch.visit([&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, CountMinSketch>) {
            write_cms(w, s);
        } else if constexpr (std::is_same_v<T, CountMinLogSketch>) {
            write_cml(w, s);
        } else {
            write_cmts(w, s);
        }
    });
    return out;
}

Sketch deserialize(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < sizeof kSketchMagic) throw FormatError(FormatErrc::Truncated, "truncated payload");
    if (std::memcmp(bytes.data(), kSketchMagic, sizeof kSketchMagic) != 0) {
        throw FormatError(FormatErrc::BadMagic, "bad magic");
    }
    ByteReader r(bytes.subspan(sizeof kSketchMagic));
    const std::uint16_t version = r.u16();
    if (version != kSketchFormatVersion) {
        throw FormatError(FormatErrc::UnsupportedVersion, "unsupported version " + std::to_string(version));
    }
    const std::uint8_t tag = r.u8();
    if (tag < 1 || tag > 3) {
        throw FormatError(FormatErrc::UnknownVariant, "unknown variant tag " + std::to_string(tag));
    }

    SketchConfig c;
    c.variant = static_cast<Variant>(tag);
    c.depth = r.u32();
    c.width = r.u64();
    c.seed = r.u64();

    std::uint64_t rng_state = 0;
    if (c.variant == Variant::Cml) {
        c.cml.base = r.f64();
        c.cml.cell_bits = r.u8();
        rng_state = r.u64();
    } else if (c.variant == Variant::Cmts) {
        c.cmts.base_width = r.u32();
        c.cmts.levels = r.u8();
        c.cmts.spire_bits = r.u8();
        const std::uint8_t policy = r.u8();
        if (policy != static_cast<std::uint8_t>(CmtsMergePolicy::AscendingWriteBack)) {
            throw FormatError(FormatErrc::InvalidConfig, "unknown CMTS merge policy");
        }
    }

    try {
        c.validate();
    } catch (const ConfigError& e) {
        throw FormatError(FormatErrc::InvalidConfig, std::string("invalid config: ") + e.what());
    }

    // check the payload size before allocating anything large
    std::uint64_t payload = 0;
    switch (c.variant) {
        case Variant::Cms: payload = std::uint64_t{c.depth} * c.width * 4; break;
        case Variant::Cml: payload = std::uint64_t{c.depth} * c.width * (c.cml.cell_bits / 8); break;
        case Variant::Cmts:
            payload = std::uint64_t{c.depth} * (c.width / c.cmts.base_width) * CmtsGeometry(c.cmts).block_bytes();
            break;
    }
    if (r.remaining() < payload) throw FormatError(FormatErrc::Truncated, "truncated payload");
    if (r.remaining() > payload) throw FormatError(FormatErrc::TrailingBytes, "trailing bytes after payload");
    const auto body = r.take(payload);

    switch (c.variant) {
        case Variant::Cms: {
            CountMinSketch s(c);
            auto cells = s.mutable_cells();
            for (std::size_t i = 0; i < cells.size(); ++i) {
                const auto* p = body.data() + 4 * i;
                cells[i] = p[0] | (p[1] << 8) | (p[2] << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
            }
            return Sketch(Sketch::Impl{std::move(s)});
        }
        case Variant::Cml: {
            CountMinLogSketch s(c);
            auto cells = s.mutable_cell_bytes();
            std::copy(body.begin(), body.end(), cells.begin());
            s.set_rng_state(rng_state);
            return Sketch(Sketch::Impl{std::move(s)});
        }
        case Variant::Cmts: {
            CountMinTreeSketch s(c);
            auto words = s.mutable_words();
            for (std::size_t i = 0; i < body.size(); ++i) {
                words[i / 8] |= static_cast<std::uint64_t>(body[i]) << (8 * (i % 8));
            }
            return Sketch(Sketch::Impl{std::move(s)});
        }
    }
    throw FormatError(FormatErrc::UnknownVariant, "unknown variant");
}

void save_sketch(const Sketch& sketch, const std::filesystem::path& path) {
    const auto bytes = serialize(sketch);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

Sketch load_sketch(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize(bytes);
}

}  // namespace cmt
