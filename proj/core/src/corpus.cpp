#include "cmtsketch/corpus.hpp"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <ostream>
#include <random>

#include "cmtsketch/random.hpp"
#include "cmtsketch/sketch.hpp"

namespace cmt {

std::vector<std::string> tokenize(std::string_view utf8) {
    std::vector<std::string> out;
    std::string current;
    const auto* s = reinterpret_cast<const std::uint8_t*>(utf8.data());
    const auto length = static_cast<std::int32_t>(utf8.size());
    if (utf8.size() > static_cast<std::size_t>(INT32_MAX)) {
        throw std::length_error("text too large to tokenize in one piece");
    }

    std::int32_t i = 0;
    while (i < length) {
        const std::int32_t start = i;
        UChar32 cp;
        U8_NEXT(s, i, length, cp);
        if (cp < 0) {
            throw TokenizeError(static_cast<std::size_t>(start),
                                "invalid UTF-8 at byte offset " + std::to_string(start));
        }
        if (u_isalnum(cp)) {
            const UChar32 lower = u_tolower(cp);
            char buf[U8_MAX_LENGTH];
            std::int32_t n = 0;
            U8_APPEND_UNSAFE(reinterpret_cast<std::uint8_t*>(buf), n, lower);
            current.append(buf, static_cast<std::size_t>(n));
        } else if (!current.empty()) {
            out.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) out.push_back(std::move(current));
    return out;
}

std::string bigram_key(std::string_view first, std::string_view second) {
    std::string k;
    k.reserve(first.size() + 1 + second.size());
    k.append(first);
    k.push_back(kBigramSeparator);
    k.append(second);
    return k;
}

std::vector<std::string> bigrams(std::span<const std::string> tokens) {
    std::vector<std::string> out;
    if (tokens.size() < 2) return out;
    out.reserve(tokens.size() - 1);
    for (std::size_t k = 0; k + 1 < tokens.size(); ++k) out.push_back(bigram_key(tokens[k], tokens[k + 1]));
    return out;
}

std::vector<std::string> TokenSequence::materialize() const {
    std::vector<std::string> out;
    out.reserve(ids.size());
    for (auto id : ids) out.push_back(vocabulary[id]);
    return out;
}

TokenSequence TokenSequence::intern(std::span<const std::string> tokens) {
    TokenSequence seq;
    std::unordered_map<std::string, std::uint32_t> index;
    seq.ids.reserve(tokens.size());
    for (const auto& t : tokens) {
        auto [it, inserted] = index.try_emplace(t, static_cast<std::uint32_t>(seq.vocabulary.size()));
        if (inserted) seq.vocabulary.push_back(t);
        seq.ids.push_back(it->second);
    }
    return seq;
}

TokenSequence read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const auto tokens = tokenize(text);
    return TokenSequence::intern(tokens);
}

TokenSequence zipf_stream(std::uint32_t vocab, double exponent, std::uint64_t length, std::uint64_t seed) {
    if (vocab == 0) throw std::invalid_argument("Zipf vocabulary must be >= 1");
    if (!(exponent > 0.0)) throw std::invalid_argument("Zipf exponent must be > 0");

    TokenSequence seq;
    seq.vocabulary.reserve(vocab);
    for (std::uint32_t r = 1; r <= vocab; ++r) seq.vocabulary.push_back("w" + std::to_string(r));

    std::vector<double> cdf(vocab);
    double acc = 0.0;
    for (std::uint32_t r = 1; r <= vocab; ++r) {
        acc += std::pow(static_cast<double>(r), -exponent);
        cdf[r - 1] = acc;
    }
    for (double& c : cdf) c /= acc;
    cdf.back() = 1.0;

    // mt19937_64's output sequence is fixed by the standard; the mapping to
    // [0, 1) and the inverse-CDF lookup are ours, so streams are portable.
    std::mt19937_64 gen(seed);
    seq.ids.resize(static_cast<std::size_t>(length));
    for (auto& id : seq.ids) {
        const double u = unit_interval(gen());
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        id = static_cast<std::uint32_t>(std::min<std::ptrdiff_t>(it - cdf.begin(), vocab - 1));
    }
    return seq;
}

void write_tokens(const TokenSequence& seq, std::ostream& out) {
    for (std::size_t i = 0; i < seq.ids.size(); ++i) {
        if (i) out.put(' ');
        out << seq.vocabulary[seq.ids[i]];
    }
}

ExactCounts ExactCounts::from(const TokenSequence& seq, StreamIndex* index) {
    ExactCounts ec;
    // vocabulary id -> unigram key index
    std::vector<std::uint32_t> key_of(seq.vocabulary.size(), UINT32_MAX);
    if (index) {
        index->unigram.resize(seq.ids.size());
        index->bigram.resize(seq.ids.empty() ? 0 : seq.ids.size() - 1);
    }

    std::uint32_t prev = 0;
    for (std::size_t pos = 0; pos < seq.ids.size(); ++pos) {
        const std::uint32_t id = seq.ids[pos];
        std::uint32_t u = key_of[id];
        if (u == UINT32_MAX) {
            u = static_cast<std::uint32_t>(ec.unigram_keys_.size());
            key_of[id] = u;
            ec.unigram_keys_.push_back(seq.vocabulary[id]);
            ec.unigram_counts_.push_back(0);
            ec.unigram_index_.emplace(seq.vocabulary[id], u);
        }
        ++ec.unigram_counts_[u];
        if (index) index->unigram[pos] = u;

        if (pos > 0) {
            const std::uint64_t packed = (static_cast<std::uint64_t>(prev) << 32) | u;
            auto [it, inserted] =
                ec.bigram_index_.try_emplace(packed, static_cast<std::uint32_t>(ec.bigram_parts_.size()));
            if (inserted) {
                ec.bigram_parts_.push_back({prev, u});
                ec.bigram_counts_.push_back(0);
            }
            ++ec.bigram_counts_[it->second];
            if (index) index->bigram[pos - 1] = it->second;
        }
        prev = u;
    }
    ec.total_unigrams_ = seq.ids.size();
    ec.total_bigrams_ = seq.ids.empty() ? 0 : seq.ids.size() - 1;
    return ec;
}

std::uint64_t ExactCounts::unigram(std::string_view token) const {
    const auto it = unigram_index_.find(std::string(token));
    return it == unigram_index_.end() ? 0 : unigram_counts_[it->second];
}

std::uint64_t ExactCounts::bigram(std::string_view first, std::string_view second) const {
    const auto a = unigram_index_.find(std::string(first));
    const auto b = unigram_index_.find(std::string(second));
    if (a == unigram_index_.end() || b == unigram_index_.end()) return 0;
    const auto it = bigram_index_.find((static_cast<std::uint64_t>(a->second) << 32) | b->second);
    return it == bigram_index_.end() ? 0 : bigram_counts_[it->second];
}

std::uint64_t ExactCounts::count(std::string_view key) const {
    const auto sep = key.find(kBigramSeparator);
    if (sep == std::string_view::npos) return unigram(key);
    return bigram(key.substr(0, sep), key.substr(sep + 1));
}

std::string ExactCounts::bigram_key_of(std::size_t i) const {
    const Pair p = bigram_parts_[i];
    return bigram_key(unigram_keys_[p.first], unigram_keys_[p.second]);
}

void ExactCounts::write_tsv(std::ostream& out) const {
    for (std::size_t i = 0; i < unigram_keys_.size(); ++i) {
        out << unigram_keys_[i] << '\t' << unigram_counts_[i] << '\n';
    }
    for (std::size_t i = 0; i < bigram_parts_.size(); ++i) {
        const Pair p = bigram_parts_[i];
        out << unigram_keys_[p.first] << ' ' << unigram_keys_[p.second] << '\t' << bigram_counts_[i] << '\n';
    }
}

}  // namespace cmt
