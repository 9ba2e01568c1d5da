#include "cmtsketch/eval.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <thread>
#include <type_traits>

#include "cmtsketch/sketch.hpp"

namespace cmt {

namespace {

char lower_ascii(char c) { return c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : c; }

bool iequals(std::string_view a, std::string_view b) {
    return a.size() == b.size() &&
           std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) { return lower_ascii(x) == lower_ascii(y); });
}

// Counter storage per `width unit` at the given depth, and the unit size
// in columns.
std::pair<double, std::uint64_t> unit_cost(Preset p, std::uint32_t depth) {
    switch (p) {
        case Preset::CmsCu: return {4.0 * depth, 1};
        case Preset::Cmls16Cu: return {2.0 * depth, 1};
        case Preset::Cmls8Cu: return {1.0 * depth, 1};
        case Preset::CmtsCu: {
            const SketchConfig c = cmts_cu_config(depth, 128, 0);
            return {static_cast<double>(CmtsGeometry(c.cmts).block_bytes()) * depth, c.cmts.base_width};
        }
    }
    throw std::invalid_argument("unknown preset");
}

template <class S>
void feed(S& sketch, std::span<const KeyDigest> digests, std::span<const std::uint32_t> stream) {
    for (std::uint32_t k : stream) sketch.increment(digests[k]);
}

template <class S>
void collect(const S& sketch, std::span<const KeyDigest> digests, std::vector<double>& out) {
    out.resize(digests.size());
    for (std::size_t i = 0; i < digests.size(); ++i) out[i] = static_cast<double>(sketch.estimate(digests[i]));
}

std::string format_real(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

struct SizedSketches {
    std::optional<SketchConfig> unigram;
    std::optional<SketchConfig> bigram;  // unused for the combined layout
    double target = 0.0;
};

SizedSketches size_run(const Workload& w, Preset variant, double pressure, std::uint64_t seed, std::uint32_t depth,
                       SketchLayout layout) {
    SizedSketches out;
    if (layout == SketchLayout::Combined) {
        out.target = pressure * static_cast<double>(ideal_bytes(w.exact));
        out.unigram = config_for_bytes(variant, depth, seed, out.target);
    } else {
        const double ut = pressure * static_cast<double>(w.ideal_unigram_bytes());
        const double bt = pressure * static_cast<double>(w.ideal_bigram_bytes());
        out.target = ut + bt;
        out.unigram = config_for_bytes(variant, depth, seed, ut);
        out.bigram = config_for_bytes(variant, depth, seed, bt);
    }
    return out;
}

std::optional<ErrorReport> run_point_with(const Workload& w, Preset variant, double pressure, std::uint64_t seed,
                                          std::uint32_t depth, SketchLayout layout,
                                          std::span<const KeyDigest> uni_digests,
                                          std::span<const KeyDigest> bi_digests, std::vector<std::string>* warnings) {
    const auto start = std::chrono::steady_clock::now();
    const bool combined = layout == SketchLayout::Combined;
    const SizedSketches sized = size_run(w, variant, pressure, seed, depth, layout);
    if (!sized.unigram || (!combined && !sized.bigram)) {
        if (warnings) {
            warnings->push_back("skipped: target footprint " + format_real(sized.target) + " B is below one " +
                                std::string(variant == Preset::CmtsCu ? "block" : "column") + " per sketch");
        }
        return std::nullopt;
    }

    Sketch uni(*sized.unigram);
    std::optional<Sketch> bi_storage;
    if (!combined) bi_storage.emplace(*sized.bigram);
    Sketch& bi = combined ? uni : *bi_storage;

    const std::uint64_t bytes = uni.payload_bytes() + (combined ? 0 : bi.payload_bytes());
    if (warnings && std::abs(static_cast<double>(bytes) - sized.target) > 0.02 * sized.target) {
        warnings->push_back("footprint " + std::to_string(bytes) + " B is more than 2% off target " +
                            format_real(sized.target) + " B");
    }

    std::vector<double> uni_est;
    std::vector<double> bi_est;
    if (combined) {
        // token k, then the pair (k, k+1), so both populations interleave
        uni.visit([&](auto& s) {
            const auto& us = w.index.unigram;
            const auto& bs = w.index.bigram;
            for (std::size_t k = 0; k < us.size(); ++k) {
                s.increment(uni_digests[us[k]]);
                if (k < bs.size()) s.increment(bi_digests[bs[k]]);
            }
            collect(s, uni_digests, uni_est);
            collect(s, bi_digests, bi_est);
        });
    } else {
        uni.visit([&](auto& s) {
            feed(s, uni_digests, w.index.unigram);
            collect(s, uni_digests, uni_est);
        });
        bi.visit([&](auto& s) {
            feed(s, bi_digests, w.index.bigram);
            collect(s, bi_digests, bi_est);
        });
    }

    std::vector<double> pooled_est(uni_est);
    pooled_est.insert(pooled_est.end(), bi_est.begin(), bi_est.end());
    std::vector<std::uint64_t> pooled_true(w.exact.unigram_counts().begin(), w.exact.unigram_counts().end());
    pooled_true.insert(pooled_true.end(), w.exact.bigram_counts().begin(), w.exact.bigram_counts().end());

    ErrorReport r;
    r.variant = variant;
    r.pressure = pressure;
    r.sketch_bytes = bytes;
    r.ideal_bytes = ideal_bytes(w.exact);
    r.depth = depth;
    r.width = bi.config().width;
    r.unigram_width = uni.config().width;
    r.seed = seed;
    r.are = are(pooled_est, pooled_true);
    r.rmse = rmse(pooled_est, pooled_true);
    const PmiError pe = pmi_rmse(uni_est, bi_est, w.exact);
    r.pmi_rmse = pe.rmse;
    r.pmi_excluded = pe.excluded;
    if (warnings && pe.excluded > 0) {
        warnings->push_back(std::to_string(pe.excluded) + " bigrams excluded from PMI (zero count)");
    }
    r.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return r;
}

}  // namespace

std::string_view layout_name(SketchLayout l) {
    return l == SketchLayout::Combined ? "combined" : "separate";
}

std::string_view preset_name(Preset p) {
    switch (p) {
        case Preset::CmsCu: return "CMS-CU";
        case Preset::Cmls16Cu: return "CMLS16-CU";
        case Preset::Cmls8Cu: return "CMLS8-CU";
        case Preset::CmtsCu: return "CMTS-CU";
    }
    return "unknown";
}

std::optional<Preset> parse_preset(std::string_view s) {
    static constexpr std::pair<std::string_view, Preset> kShort[] = {
        {"cms", Preset::CmsCu}, {"cmls16", Preset::Cmls16Cu}, {"cmls8", Preset::Cmls8Cu}, {"cmts", Preset::CmtsCu}};
    for (const auto& [name, p] : kShort) {
        if (iequals(s, name) || iequals(s, preset_name(p))) return p;
    }
    return std::nullopt;
}

SketchConfig preset_config(Preset p, std::uint32_t depth, std::uint64_t width, std::uint64_t seed) {
    switch (p) {
        case Preset::CmsCu: return cms_cu_config(depth, width, seed);
        case Preset::Cmls16Cu: return cmls16_cu_config(depth, width, seed);
        case Preset::Cmls8Cu: return cmls8_cu_config(depth, width, seed);
        case Preset::CmtsCu: return cmts_cu_config(depth, width, seed);
    }
    throw std::invalid_argument("unknown preset");
}

std::optional<SketchConfig> config_for_bytes(Preset p, std::uint32_t depth, std::uint64_t seed,
                                             double target_bytes) {
    if (depth == 0) throw ConfigError("depth must be >= 1");
    const auto [cost, columns] = unit_cost(p, depth);
    const double units = std::round(target_bytes / cost);
    if (!(units >= 1.0)) return std::nullopt;
    return preset_config(p, depth, static_cast<std::uint64_t>(units) * columns, seed);
}

std::uint64_t ideal_bytes(std::size_t distinct_elements) {
    return 4 * static_cast<std::uint64_t>(distinct_elements);
}

std::uint64_t ideal_bytes(const ExactCounts& exact) {
    return ideal_bytes(exact.distinct_count());
}

double are(std::span<const double> estimates, std::span<const std::uint64_t> truth) {
    if (estimates.size() != truth.size()) throw std::invalid_argument("estimate/truth size mismatch");
    if (truth.empty()) return 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] == 0) throw std::invalid_argument("ARE needs true counts >= 1");
        const double t = static_cast<double>(truth[i]);
        sum += std::abs(estimates[i] - t) / t;
    }
    return sum / static_cast<double>(truth.size());
}

double rmse(std::span<const double> estimates, std::span<const std::uint64_t> truth) {
    if (estimates.size() != truth.size()) throw std::invalid_argument("estimate/truth size mismatch");
    if (truth.empty()) return 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const double d = estimates[i] - static_cast<double>(truth[i]);
        sum += d * d;
    }
    return std::sqrt(sum / static_cast<double>(truth.size()));
}

double pmi(double count_ij, double count_i, double count_j, double total_unigrams, double total_bigrams) {
    return std::log((count_ij / total_bigrams) / ((count_i / total_unigrams) * (count_j / total_unigrams)));
}

PmiError pmi_rmse(std::span<const double> unigram_estimates, std::span<const double> bigram_estimates,
                  const ExactCounts& exact) {
    if (unigram_estimates.size() != exact.distinct_unigrams() ||
        bigram_estimates.size() != exact.distinct_bigrams()) {
        throw std::invalid_argument("estimate arrays do not match the exact key sets");
    }
    const double tu = static_cast<double>(exact.total_unigrams());
    const double tb = static_cast<double>(exact.total_bigrams());
    const auto uc = exact.unigram_counts();
    const auto bc = exact.bigram_counts();
    const auto parts = exact.bigram_parts();

    PmiError out;
    double sum = 0.0;
    for (std::size_t k = 0; k < parts.size(); ++k) {
        const auto [i, j] = parts[k];
        const double ei = unigram_estimates[i];
        const double ej = unigram_estimates[j];
        const double eij = bigram_estimates[k];
        if (!(ei > 0.0) || !(ej > 0.0) || !(eij > 0.0) || uc[i] == 0 || uc[j] == 0 || bc[k] == 0) {
            ++out.excluded;
            continue;
        }
        const double truth = pmi(static_cast<double>(bc[k]), static_cast<double>(uc[i]),
                                 static_cast<double>(uc[j]), tu, tb);
        const double d = pmi(eij, ei, ej, tu, tb) - truth;
        sum += d * d;
        ++out.evaluated;
    }
    out.rmse = out.evaluated ? std::sqrt(sum / static_cast<double>(out.evaluated)) : 0.0;
    return out;
}

PmiError pmi_rmse(const Sketch& unigrams, const Sketch& bigrams, const ExactCounts& exact) {
    std::vector<double> ue(exact.distinct_unigrams());
    std::vector<double> be(exact.distinct_bigrams());
    const auto keys = exact.unigram_keys();
    for (std::size_t i = 0; i < keys.size(); ++i) ue[i] = unigrams.estimate(keys[i]);
    for (std::size_t k = 0; k < be.size(); ++k) be[k] = bigrams.estimate(exact.bigram_key_of(k));
    return pmi_rmse(ue, be, exact);
}

Workload Workload::from(const TokenSequence& seq) {
    Workload w;
    w.exact = ExactCounts::from(seq, &w.index);
    return w;
}

std::pair<std::vector<KeyDigest>, std::vector<KeyDigest>> Workload::digests(std::uint64_t seed) const {
    const auto keys = exact.unigram_keys();
    std::vector<KeyDigest> uni(keys.size());
    for (std::size_t i = 0; i < keys.size(); ++i) uni[i] = {hash_bytes(keys[i], seed)};

    const auto parts = exact.bigram_parts();
    std::vector<KeyDigest> bi(parts.size());
    std::string buf;
    for (std::size_t k = 0; k < parts.size(); ++k) {
        buf.assign(keys[parts[k].first]);
        buf.push_back(kBigramSeparator);
        buf.append(keys[parts[k].second]);
        bi[k] = {hash_bytes(buf, seed)};
    }
    return {std::move(uni), std::move(bi)};
}

std::optional<ErrorReport> run_point(const Workload& workload, Preset variant, double pressure, std::uint64_t seed,
                                     std::uint32_t depth, SketchLayout layout, std::vector<std::string>* warnings) {
    const auto [uni, bi] = workload.digests(seed);
    return run_point_with(workload, variant, pressure, seed, depth, layout, uni, bi, warnings);
}

SweepResult sweep(const Workload& workload, const SweepOptions& options) {
    if (!std::is_sorted(options.pressures.begin(), options.pressures.end())) {
        throw std::invalid_argument("pressures must be sorted ascending");
    }
    for (double p : options.pressures) {
        if (!(p > 0.0)) throw std::invalid_argument("pressures must be positive");
    }

    struct Task {
        Preset variant;
        double pressure;
        std::size_t seed_index;
    };
    std::vector<Task> tasks;
    for (Preset v : options.variants) {
        for (double p : options.pressures) {
            for (std::size_t s = 0; s < options.seeds.size(); ++s) tasks.push_back({v, p, s});
        }
    }

    std::vector<std::pair<std::vector<KeyDigest>, std::vector<KeyDigest>>> digests;
    digests.reserve(options.seeds.size());
    for (std::uint64_t seed : options.seeds) digests.push_back(workload.digests(seed));

    std::vector<std::optional<ErrorReport>> results(tasks.size());
    std::vector<std::vector<std::string>> notes(tasks.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t t = next++; t < tasks.size(); t = next++) {
            const Task& task = tasks[t];
            const auto& [uni, bi] = digests[task.seed_index];
            results[t] = run_point_with(workload, task.variant, task.pressure, options.seeds[task.seed_index],
                                        options.depth, options.layout, uni, bi, &notes[t]);
        }
    };

    const unsigned threads = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(tasks.size())));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    }

    SweepResult out;
    std::vector<std::size_t> order(tasks.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const Task& x = tasks[a];
        const Task& y = tasks[b];
        const auto kx = std::make_tuple(static_cast<int>(x.variant), x.pressure, options.seeds[x.seed_index]);
        const auto ky = std::make_tuple(static_cast<int>(y.variant), y.pressure, options.seeds[y.seed_index]);
        return kx < ky;
    });
    for (std::size_t t : order) {
        if (results[t]) out.reports.push_back(*results[t]);
        for (auto& msg : notes[t]) {
            out.warnings.push_back({tasks[t].variant, tasks[t].pressure, options.seeds[tasks[t].seed_index], msg});
        }
    }
    return out;
}

void write_csv(std::span<const ErrorReport> reports, std::ostream& out, bool with_runtime) {
    out << kCsvHeader << '\n';
    for (const ErrorReport& r : reports) {
        out << preset_name(r.variant) << ',' << format_real(r.pressure) << ',' << r.sketch_bytes << ','
            << r.ideal_bytes << ',' << r.depth << ',' << r.width << ',' << r.seed << ',' << format_real(r.are)
            << ',' << format_real(r.rmse) << ',' << format_real(r.pmi_rmse) << ','
            << (with_runtime ? format_real(std::round(r.runtime_ms * 1000.0) / 1000.0) : std::string("0")) << '\n';
    }
}

std::vector<std::pair<std::string, std::string>> design_metadata(const SweepOptions& options) {
    std::string pressures;
    for (double p : options.pressures) pressures += (pressures.empty() ? "" : ",") + format_real(p);
    std::string seeds;
    for (auto s : options.seeds) seeds += (seeds.empty() ? "" : ",") + std::to_string(s);
    std::string variants;
    for (auto v : options.variants) variants += (variants.empty() ? "" : ",") + std::string(preset_name(v));

    const SketchConfig cmts = cmts_cu_config(options.depth, 128, 0);
    return {
        {"hash", "seeded 64-bit multiply-xor-shift over key bytes; per-row seeds via splitmix64 finalizer"},
        {"cell_mapping", "cell = mix64(digest ^ row_seed) mod width"},
        {"bigram_separator", "0x1F"},
        {"update_semantics", "update(key, n) = n conservative single increments"},
        {"cms_cell_bits", "32 (saturating)"},
        {"cml_decode", "0 if c=0; (base^c - 1)/(base - 1) otherwise"},
        {"cml_fire_probability", "base^-c_min"},
        {"cml_rng", "one splitmix64 stream per sketch, seeded from the hash seed"},
        {"cml_conservative_update", "rows at the minimum exponent advance on one shared draw"},
        {"cmls16", "base=1.00025 cell_bits=16"},
        {"cmls8", "base=1.08 cell_bits=8"},
        {"cmts_layout", "W=" + std::to_string(cmts.cmts.base_width) + " L=" + std::to_string(cmts.cmts.levels) +
                            " S=" + std::to_string(cmts.cmts.spire_bits)},
        {"cmts_layer_widths", "counting W>>l, barrier max(W>>(l+1),1), one spire per block"},
        {"cmts_barriers_for_value", "min(L, bit_length((v+2) div 4)), bit_length(0)=0"},
        {"cmts_write_policy", "barriers OR-ed, counting bits overwritten"},
        {"cmts_conservative_update", "rows strictly below min+1 are written"},
        {"cmts_merge_policy", "ascending write-back of clamped sums, ties by offset"},
        {"saturation", "silent clamp at the variant maximum"},
        {"bigram_window", "adjacent pairs, single document, no sentence segmentation"},
        {"tokenizer", "ICU lowercase; split on non-alphanumeric code points"},
        {"are_key_set", "all distinct unigrams and bigrams, pooled"},
        {"ideal_bytes", "4 bytes per distinct unigram and bigram"},
        {"sketch_layout", std::string(layout_name(options.layout))},
        {"sketch_sizing", options.layout == SketchLayout::Combined
                              ? "one sketch holding unigrams and bigrams at pressure x ideal_bytes"
                              : "separate unigram and bigram sketches, each at pressure x its own ideal size"},
        {"stream_order", "token k then bigram (k, k+1) for the combined layout"},
        {"width_rounding", "nearest whole column (CMTS: whole block)"},
        {"depth", std::to_string(options.depth)},
        {"pmi", "natural log; totals from the exact stream; zero counts excluded"},
        {"variants", variants},
        {"pressures", pressures},
        {"seeds", seeds},
    };
}

}  // namespace cmt
