#pragma once

#include <cstdint>
#include <string_view>
#include <utility>
#include <variant>

#include "cmtsketch/cml.hpp"
#include "cmtsketch/cms.hpp"
#include "cmtsketch/cmts.hpp"
#include "cmtsketch/config.hpp"
#include "cmtsketch/hash.hpp"

namespace cmt {

/// Bigram keys join two tokens with the ASCII unit separator.
inline constexpr char kBigramSeparator = '\x1F';

/// Any of the three sketch variants behind one update/estimate interface.
///
/// Hot loops should `visit` once and work on the concrete type; the
/// per-call dispatch here is for tools and tests.
class Sketch {
public:
    using Impl = std::variant<CountMinSketch, CountMinLogSketch, CountMinTreeSketch>;

    explicit Sketch(const SketchConfig& config);
    explicit Sketch(Impl impl) : impl_(std::move(impl)) {}

    KeyDigest digest(std::string_view key) const;

    /// Applies `count` conservative increments. Throws std::invalid_argument
    /// for count == 0.
    void update(KeyDigest key, std::uint64_t count = 1);
    void update(std::string_view key, std::uint64_t count = 1) { update(digest(key), count); }

    /// Minimum over rows of the decoded cell values.
    double estimate(KeyDigest key) const;
    double estimate(std::string_view key) const { return estimate(digest(key)); }

    Variant variant() const;
    const SketchConfig& config() const;
    std::uint64_t payload_bytes() const;

    template <class F>
    decltype(auto) visit(F&& f) {
        return std::visit(std::forward<F>(f), impl_);
    }
    template <class F>
    decltype(auto) visit(F&& f) const {
        return std::visit(std::forward<F>(f), impl_);
    }

    template <class T>
    T* get_if() {
        return std::get_if<T>(&impl_);
    }
    template <class T>
    const T* get_if() const {
        return std::get_if<T>(&impl_);
    }

private:
    static Impl make(const SketchConfig& config);
    Impl impl_;
};

}  // namespace cmt
