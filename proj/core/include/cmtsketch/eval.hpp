#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cmtsketch/config.hpp"
#include "cmtsketch/corpus.hpp"
#include "cmtsketch/hash.hpp"

namespace cmt {

class Sketch;

/// The four compared sketch variants, in report order.
enum class Preset : std::uint8_t {
    CmsCu,
    Cmls16Cu,
    Cmls8Cu,
    CmtsCu,
};

inline constexpr Preset kAllPresets[] = {Preset::CmsCu, Preset::Cmls16Cu, Preset::Cmls8Cu, Preset::CmtsCu};

std::string_view preset_name(Preset p);
/// Accepts "cms", "cmls16", "cmls8", "cmts" or the report names
/// ("CMS-CU", ...), case-insensitively.
std::optional<Preset> parse_preset(std::string_view s);

SketchConfig preset_config(Preset p, std::uint32_t depth, std::uint64_t width, std::uint64_t seed);

/// Widest configuration of `p` at fixed depth whose counter storage is
/// closest to `target_bytes`. CMTS widths are whole blocks. Returns nullopt
/// when not even one column (one block for CMTS) fits.
std::optional<SketchConfig> config_for_bytes(Preset p, std::uint32_t depth, std::uint64_t seed,
                                             double target_bytes);

/// Bytes needed to store every distinct count perfectly: 4 bytes per
/// distinct unigram and bigram, keys not included.
std::uint64_t ideal_bytes(const ExactCounts& exact);
std::uint64_t ideal_bytes(std::size_t distinct_elements);

/// Mean of |est - true| / true. Every true count must be >= 1.
double are(std::span<const double> estimates, std::span<const std::uint64_t> truth);
/// sqrt(mean((est - true)^2)).
double rmse(std::span<const double> estimates, std::span<const std::uint64_t> truth);

/// Natural-log PMI with p(i) = count_i / total_unigrams and
/// p(i,j) = count_ij / total_bigrams.
double pmi(double count_ij, double count_i, double count_j, double total_unigrams, double total_bigrams);

struct PmiError {
    double rmse = 0.0;
    std::size_t evaluated = 0;
    std::size_t excluded = 0;  // bigrams with a zero count on either side
};

/// RMSE over all distinct bigrams of PMI(sketch counts) - PMI(exact counts).
/// Estimates are indexed like the keys of `exact`; totals come from `exact`.
PmiError pmi_rmse(std::span<const double> unigram_estimates, std::span<const double> bigram_estimates,
                  const ExactCounts& exact);
PmiError pmi_rmse(const Sketch& unigrams, const Sketch& bigrams, const ExactCounts& exact);

/// Exact counts plus the per-position key indices needed to replay the
/// stream into sketches.
struct Workload {
    ExactCounts exact;
    StreamIndex index;

    static Workload from(const TokenSequence& seq);

    std::uint64_t ideal_unigram_bytes() const { return ideal_bytes(exact.distinct_unigrams()); }
    std::uint64_t ideal_bigram_bytes() const { return ideal_bytes(exact.distinct_bigrams()); }

    /// Digests of every unigram and bigram key under a hash seed.
    std::pair<std::vector<KeyDigest>, std::vector<KeyDigest>> digests(std::uint64_t seed) const;
};

struct ErrorReport {
    Preset variant = Preset::CmsCu;
    double pressure = 0.0;
    std::uint64_t sketch_bytes = 0;  // counter storage of every sketch in the run
    std::uint64_t ideal_bytes = 0;
    std::uint32_t depth = 0;
    std::uint64_t width = 0;          // the bigram-holding sketch
    std::uint64_t unigram_width = 0;  // equals width for the combined layout
    std::uint64_t seed = 0;
    double are = 0.0;
    double rmse = 0.0;
    double pmi_rmse = 0.0;
    std::size_t pmi_excluded = 0;
    double runtime_ms = 0.0;
};

/// Whether unigrams and bigrams share one sketch or get one each.
enum class SketchLayout : std::uint8_t {
    Combined,  // one sketch per run sized to pressure x ideal_bytes(all keys)
    Separate,  // unigram and bigram sketches, each sized against its own ideal
};

std::string_view layout_name(SketchLayout l);

struct SweepOptions {
    SketchLayout layout = SketchLayout::Combined;
    std::vector<Preset> variants{std::begin(kAllPresets), std::end(kAllPresets)};
    std::vector<double> pressures{0.03, 0.06, 0.125, 0.25, 0.5, 1, 2, 4, 8};
    std::vector<std::uint64_t> seeds{1, 2, 3};
    std::uint32_t depth = 4;
    unsigned threads = 1;
};

struct SweepWarning {
    Preset variant;
    double pressure;
    std::uint64_t seed;
    std::string message;
};

struct SweepResult {
    std::vector<ErrorReport> reports;  // sorted by (variant, pressure, seed)
    std::vector<SweepWarning> warnings;
};

/// For every (variant, pressure, seed): sizes the sketch(es) to pressure
/// times the ideal size at fixed depth, streams the workload once with
/// conservative updates and measures the pooled ARE/RMSE and the PMI RMSE.
/// Points whose footprint is below one column (CMTS: one block) are skipped
/// with a warning. Throws std::invalid_argument when pressures are not
/// ascending.
SweepResult sweep(const Workload& workload, const SweepOptions& options);

/// One run of the sweep, exposed for callers that want a single point.
std::optional<ErrorReport> run_point(const Workload& workload, Preset variant, double pressure,
                                     std::uint64_t seed, std::uint32_t depth,
                                     SketchLayout layout = SketchLayout::Combined,
                                     std::vector<std::string>* warnings = nullptr);

inline constexpr std::string_view kCsvHeader =
    "variant,pressure,sketch_bytes,ideal_bytes,depth,width,seed,are,rmse,pmi_rmse,runtime_ms";

/// Writes the header and one row per report. With `with_runtime` false the
/// runtime column is written as 0 so the file is reproducible.
void write_csv(std::span<const ErrorReport> reports, std::ostream& out, bool with_runtime = true);

/// Every modelling knob behind the reported numbers, as name/value pairs.
std::vector<std::pair<std::string, std::string>> design_metadata(const SweepOptions& options);

}  // namespace cmt
