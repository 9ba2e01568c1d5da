#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace cmt {

class TokenizeError : public std::runtime_error {
public:
    TokenizeError(std::size_t offset, const std::string& what)
        : std::runtime_error(what), offset_(offset) {}
    /// Byte offset of the first invalid UTF-8 sequence.
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

/// Lowercases and splits on every code point that is not alphanumeric.
/// Throws TokenizeError on malformed UTF-8.
std::vector<std::string> tokenize(std::string_view utf8);

std::string bigram_key(std::string_view first, std::string_view second);

/// Adjacent pairs, encoded with bigram_key.
std::vector<std::string> bigrams(std::span<const std::string> tokens);

/// A token stream stored as ids into its own vocabulary.
struct TokenSequence {
    std::vector<std::string> vocabulary;
    std::vector<std::uint32_t> ids;

    std::size_t size() const { return ids.size(); }
    std::string_view token(std::size_t pos) const { return vocabulary[ids[pos]]; }

    std::vector<std::string> materialize() const;

    static TokenSequence intern(std::span<const std::string> tokens);
};

/// Reads a UTF-8 text file as one document and tokenizes it.
TokenSequence read_text_file(const std::filesystem::path& path);

/// N i.i.d. draws with P(rank r) proportional to r^-s over r in [1, V];
/// the token of rank r is "w<r>". Deterministic for a given seed.
TokenSequence zipf_stream(std::uint32_t vocab, double exponent, std::uint64_t length, std::uint64_t seed);

/// Writes the tokens separated by single spaces.
void write_tokens(const TokenSequence& seq, std::ostream& out);

/// Position -> key index maps of a stream, filled by ExactCounts::from.
struct StreamIndex {
    std::vector<std::uint32_t> unigram;  // one per token
    std::vector<std::uint32_t> bigram;   // one per adjacent pair
};

/// Exact unigram and bigram multiplicities of one stream.
///
/// Keys are numbered in order of first appearance. Bigram i joins unigram
/// keys bigram_parts()[i].first and .second.
class ExactCounts {
public:
    struct Pair {
        std::uint32_t first;
        std::uint32_t second;
    };

    static ExactCounts from(const TokenSequence& seq, StreamIndex* index = nullptr);

    std::uint64_t unigram(std::string_view token) const;
    std::uint64_t bigram(std::string_view first, std::string_view second) const;
    /// Count of an encoded key; bigram keys contain the separator byte.
    std::uint64_t count(std::string_view key) const;

    std::uint64_t total_unigrams() const { return total_unigrams_; }
    std::uint64_t total_bigrams() const { return total_bigrams_; }
    std::size_t distinct_unigrams() const { return unigram_keys_.size(); }
    std::size_t distinct_bigrams() const { return bigram_parts_.size(); }
    std::size_t distinct_count() const { return distinct_unigrams() + distinct_bigrams(); }

    std::span<const std::string> unigram_keys() const { return unigram_keys_; }
    std::span<const std::uint64_t> unigram_counts() const { return unigram_counts_; }
    std::span<const Pair> bigram_parts() const { return bigram_parts_; }
    std::span<const std::uint64_t> bigram_counts() const { return bigram_counts_; }

    std::string bigram_key_of(std::size_t i) const;

    /// "key<TAB>count" lines, unigrams first, bigram keys rendered "t1 t2".
    void write_tsv(std::ostream& out) const;

private:
    std::vector<std::string> unigram_keys_;
    std::vector<std::uint64_t> unigram_counts_;
    std::unordered_map<std::string, std::uint32_t> unigram_index_;
    std::vector<Pair> bigram_parts_;
    std::vector<std::uint64_t> bigram_counts_;
    std::unordered_map<std::uint64_t, std::uint32_t> bigram_index_;
    std::uint64_t total_unigrams_ = 0;
    std::uint64_t total_bigrams_ = 0;
};

}  // namespace cmt
