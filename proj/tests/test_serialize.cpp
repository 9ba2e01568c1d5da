#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "cmtsketch/cml.hpp"
#include "cmtsketch/serialize.hpp"
#include "cmtsketch/sketch.hpp"

namespace {

using namespace cmt;

Sketch filled(const SketchConfig& c, int n) {
    Sketch s(c);
    for (int i = 0; i < n; ++i) s.update("k" + std::to_string(i % 131));
    return s;
}

std::uint64_t read_le(const std::vector<std::uint8_t>& b, std::size_t at, int n) {
    std::uint64_t v = 0;
    for (int i = n - 1; i >= 0; --i) v = (v << 8) | b[at + i];
    return v;
}

FormatErrc error_of(const std::vector<std::uint8_t>& bytes) {
    try {
        deserialize(bytes);
    } catch (const FormatError& e) {
        return e.code();
    }
    ADD_FAILURE() << "no FormatError";
    return FormatErrc::InvalidConfig;
}

class RoundTrip : public ::testing::TestWithParam<SketchConfig> {};

TEST_P(RoundTrip, ByteIdenticalAndSameEstimates) {
    const Sketch s = filled(GetParam(), 4000);
    const auto bytes = serialize(s);
    EXPECT_EQ(bytes.size(), serialized_header_bytes(s.variant()) + s.payload_bytes());
    const Sketch back = deserialize(bytes);
    EXPECT_EQ(serialize(back), bytes);
    for (int i = 0; i < 131; ++i) {
        const std::string k = "k" + std::to_string(i);
        EXPECT_EQ(back.estimate(k), s.estimate(k));
    }
}

INSTANTIATE_TEST_SUITE_P(Variants, RoundTrip,
                         ::testing::Values(cms_cu_config(4, 512, 3), cmls16_cu_config(4, 512, 3),
                                           cmls8_cu_config(3, 100, 9), cmts_cu_config(4, 512, 3)));

TEST(Serialize, HeaderLayout) {
    const auto bytes = serialize(Sketch(cms_cu_config(2, 8, 77)));
    ASSERT_EQ(bytes.size(), 27u + 64u);
    EXPECT_EQ(std::memcmp(bytes.data(), "CMSK", 4), 0);
    EXPECT_EQ(read_le(bytes, 4, 2), 1u);
    EXPECT_EQ(bytes[6], 1u);
    EXPECT_EQ(read_le(bytes, 7, 4), 2u);
    EXPECT_EQ(read_le(bytes, 11, 8), 8u);
    EXPECT_EQ(read_le(bytes, 19, 8), 77u);
}

TEST(Serialize, CmtsHeaderRecordsLayout) {
    const auto bytes = serialize(Sketch(cmts_cu_config(1, 128, 0)));
    ASSERT_EQ(bytes.size(), 34u + 52u);
    EXPECT_EQ(bytes[6], 3u);
    EXPECT_EQ(read_le(bytes, 27, 4), 128u);
    EXPECT_EQ(bytes[31], 8u);
    EXPECT_EQ(bytes[32], 32u);
    EXPECT_EQ(bytes[33], 0u);
}

TEST(Serialize, CmsCellsAreLittleEndian) {
    Sketch s(cms_cu_config(1, 1, 0));
    s.update("x", 0x01020304);
    const auto bytes = serialize(s);
    EXPECT_EQ(bytes[27], 0x04);
    EXPECT_EQ(bytes[30], 0x01);
}

TEST(Serialize, CmlHeaderRecordsBaseBitsAndRng) {
    const Sketch s = filled(cmls8_cu_config(2, 16, 5), 10);
    const auto bytes = serialize(s);
    double base;
    std::uint64_t bits = read_le(bytes, 27, 8);
    std::memcpy(&base, &bits, 8);
    EXPECT_EQ(base, 1.08);
    EXPECT_EQ(bytes[35], 8u);
    EXPECT_EQ(read_le(bytes, 36, 8), s.get_if<CountMinLogSketch>()->rng_state());
    EXPECT_EQ(bytes.size(), 44u + 32u);
}

TEST(Serialize, CmlRandomStreamResumes) {
    Sketch a = filled(cmls8_cu_config(4, 64, 12), 1000);
    Sketch b = deserialize(serialize(a));
    for (int i = 0; i < 1000; ++i) {
        const std::string k = "z" + std::to_string(i % 17);
        a.update(k);
        b.update(k);
    }
    EXPECT_EQ(serialize(a), serialize(b));
}

TEST(Serialize, Errors) {
    const auto good = serialize(filled(cms_cu_config(2, 8, 1), 5));

    auto bad = good;
    bad[0] = 'X';
    EXPECT_EQ(error_of(bad), FormatErrc::BadMagic);

    bad = good;
    bad[4] = 2;
    EXPECT_EQ(error_of(bad), FormatErrc::UnsupportedVersion);

    bad = good;
    bad[6] = 9;
    EXPECT_EQ(error_of(bad), FormatErrc::UnknownVariant);

    bad = good;
    bad.pop_back();
    EXPECT_EQ(error_of(bad), FormatErrc::Truncated);

    bad = good;
    bad.push_back(0);
    EXPECT_EQ(error_of(bad), FormatErrc::TrailingBytes);

    bad = good;
    bad[7] = 0;
    EXPECT_EQ(error_of(bad), FormatErrc::InvalidConfig);

    EXPECT_EQ(error_of(std::vector<std::uint8_t>(good.begin(), good.begin() + 10)), FormatErrc::Truncated);

    try {
        deserialize(std::vector<std::uint8_t>(good.begin(), good.end() - 3));
        FAIL();
    } catch (const FormatError& e) {
        EXPECT_NE(std::string(e.what()).find("truncated payload"), std::string::npos);
    }
}

TEST(Serialize, HugeDeclaredWidthIsTruncatedNotAllocated) {
    auto bytes = serialize(Sketch(cms_cu_config(1, 1, 0)));
    for (int i = 0; i < 7; ++i) bytes[11 + i] = 0xFF;
    bytes[18] = 0x0F;
    EXPECT_THROW(deserialize(bytes), FormatError);
}

TEST(Serialize, FileRoundTrip) {
    const auto dir = std::filesystem::temp_directory_path() / "cmtsketch_serialize_test";
    std::filesystem::create_directories(dir);
    const Sketch s = filled(cmts_cu_config(2, 256, 8), 700);
    save_sketch(s, dir / "s.bin");
    EXPECT_EQ(serialize(load_sketch(dir / "s.bin")), serialize(s));
    EXPECT_THROW(load_sketch(dir / "missing.bin"), std::runtime_error);
    std::filesystem::remove_all(dir);
}

}  // namespace
