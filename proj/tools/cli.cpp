#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "cmtsketch/corpus.hpp"
#include "cmtsketch/eval.hpp"
#include "cmtsketch/serialize.hpp"
#include "cmtsketch/sketch.hpp"

namespace cmt::cli {

namespace {

struct GenZipfArgs {
    std::uint32_t vocab = 100000;
    double exponent = 1.0;
    std::uint64_t length = 5000000;
    std::uint64_t seed = 1;
    std::string out;
};

struct CountArgs {
    std::string input;
    std::string variant = "cmts";
    std::uint32_t depth = 4;
    std::uint64_t width = 1 << 16;
    std::uint64_t seed = 1;
    std::optional<double> cml_base;
    std::optional<std::uint32_t> cml_bits;
    std::uint32_t cmts_base_width = 128;
    std::uint32_t cmts_levels = 0;  // 0: full depth
    std::uint32_t cmts_spire = 32;
    bool separate = false;
    std::string out;
};

struct EvalArgs {
    std::string input;
    std::uint32_t zipf_vocab = 100000;
    double zipf_exponent = 1.0;
    std::uint64_t zipf_length = 5000000;
    std::uint64_t zipf_seed = 1;
    std::vector<std::string> variants{"cms", "cmls16", "cmls8", "cmts"};
    std::vector<double> pressures{0.03, 0.06, 0.125, 0.25, 0.5, 1, 2, 4, 8};
    std::vector<std::uint64_t> seeds{1, 2, 3};
    std::uint32_t depth = 4;
    unsigned threads = 0;  // 0: hardware concurrency
    bool separate = false;
    bool reproducible = false;
    std::string out;
};

struct QueryArgs {
    std::string sketch;
    std::vector<std::string> key;
};

struct MergeArgs {
    std::string a;
    std::string b;
    std::string out;
};

std::string format_real(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

void write_file(const std::string& path, const std::string& contents) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    f << contents;
    if (!f) throw std::runtime_error("write failed: " + path);
}

unsigned thread_budget(unsigned requested) {
    unsigned n = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("SKETCH_THREADS")) {
        char* end = nullptr;
        const unsigned long cap = std::strtoul(env, &end, 10);
        if (end != env && cap > 0) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
    }
    return n;
}

SketchConfig count_config(const CountArgs& a) {
    SketchConfig c;
    if (a.variant == "cml") {
        c = cmls16_cu_config(a.depth, a.width, a.seed);
    } else if (const auto p = parse_preset(a.variant)) {
        c = preset_config(*p, a.depth, a.width, a.seed);
    } else {
        throw CLI::ValidationError("--variant", "unknown variant '" + a.variant + "'");
    }
    if (c.variant == Variant::Cml) {
        if (a.cml_base) c.cml.base = *a.cml_base;
        if (a.cml_bits) c.cml.cell_bits = *a.cml_bits;
    }
    if (c.variant == Variant::Cmts) {
        c.cmts = a.cmts_levels == 0 ? CmtsLayout::full_depth(a.cmts_base_width, a.cmts_spire)
                                    : CmtsLayout{a.cmts_base_width, a.cmts_levels, a.cmts_spire};
    }
    c.validate();
    return c;
}

int cmd_gen_zipf(const GenZipfArgs& a, std::ostream& out) {
    const TokenSequence seq = zipf_stream(a.vocab, a.exponent, a.length, a.seed);
    std::ofstream f(a.out, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + a.out + " for writing");
    write_tokens(seq, f);
    f.close();
    if (!f) throw std::runtime_error("write failed: " + a.out);
    out << "wrote " << seq.size() << " tokens to " << a.out << '\n';
    return kExitOk;
}

int cmd_count(const CountArgs& a, std::ostream& out) {
    const SketchConfig config = count_config(a);
    const TokenSequence seq = read_text_file(a.input);

    Sketch uni(config);
    std::optional<Sketch> bi_storage;
    if (a.separate) bi_storage.emplace(config);
    Sketch& bi = a.separate ? *bi_storage : uni;

    std::string key;
    std::uint64_t updates = 0;
    const auto t0 = std::chrono::steady_clock::now();
    for (std::size_t k = 0; k < seq.size(); ++k) {
        uni.update(seq.token(k));
        ++updates;
        if (k + 1 < seq.size()) {
            key.assign(seq.token(k));
            key.push_back(kBigramSeparator);
            key.append(seq.token(k + 1));
            bi.update(key);
            ++updates;
        }
    }
    const double sketch_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    // the same keys through a hash map, for a throughput reference
    const auto t1 = std::chrono::steady_clock::now();
    std::unordered_map<std::string, std::uint32_t> exact;
    for (std::size_t k = 0; k < seq.size(); ++k) {
        ++exact[std::string(seq.token(k))];
        if (k + 1 < seq.size()) {
            key.assign(seq.token(k));
            key.push_back(kBigramSeparator);
            key.append(seq.token(k + 1));
            ++exact[key];
        }
    }
    const double map_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t1).count();

    if (a.separate) {
        save_sketch(uni, a.out + ".uni");
        save_sketch(bi, a.out + ".bi");
    } else {
        save_sketch(uni, a.out);
    }

    const ExactCounts ec = ExactCounts::from(seq);
    out << "tokens=" << seq.size() << " distinct_unigrams=" << ec.distinct_unigrams()
        << " distinct_bigrams=" << ec.distinct_bigrams() << " updates=" << updates
        << " updates_per_s=" << format_real(sketch_s > 0 ? updates / sketch_s : 0.0)
        << " unordered_map_updates_per_s=" << format_real(map_s > 0 ? updates / map_s : 0.0) << '\n';
    return kExitOk;
}

int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
    SweepOptions opt;
    opt.layout = a.separate ? SketchLayout::Separate : SketchLayout::Combined;
    opt.variants.clear();
    for (const auto& v : a.variants) {
        const auto p = parse_preset(v);
        if (!p) throw CLI::ValidationError("--variants", "unknown variant '" + v + "'");
        opt.variants.push_back(*p);
    }
    opt.pressures = a.pressures;
    std::sort(opt.pressures.begin(), opt.pressures.end());
    opt.pressures.erase(std::unique(opt.pressures.begin(), opt.pressures.end()), opt.pressures.end());
    for (double p : opt.pressures) {
        if (!(p > 0.0)) throw CLI::ValidationError("--pressures", "pressures must be positive");
    }
    opt.seeds = a.seeds;
    opt.depth = a.depth;
    opt.threads = thread_budget(a.threads);

    nlohmann::json run;
    TokenSequence seq;
    if (!a.input.empty()) {
        seq = read_text_file(a.input);
        run["source"] = {{"type", "text"}, {"path", a.input}};
    } else {
        seq = zipf_stream(a.zipf_vocab, a.zipf_exponent, a.zipf_length, a.zipf_seed);
        run["source"] = {{"type", "zipf"},
                         {"vocab", a.zipf_vocab},
                         {"exponent", a.zipf_exponent},
                         {"length", a.zipf_length},
                         {"seed", a.zipf_seed}};
    }
    const Workload workload = Workload::from(seq);
    const SweepResult result = sweep(workload, opt);

    std::ostringstream csv;
    write_csv(result.reports, csv, !a.reproducible);
    write_file(a.out, csv.str());

    std::ostringstream warn;
    for (const auto& w : result.warnings) {
        warn << preset_name(w.variant) << ',' << format_real(w.pressure) << ',' << w.seed << ',' << w.message << '\n';
    }
    write_file(a.out + ".warnings", warn.str());

    nlohmann::json meta;
    run["variants"] = a.variants;
    run["pressures"] = opt.pressures;
    run["seeds"] = opt.seeds;
    run["depth"] = opt.depth;
    run["layout"] = std::string(layout_name(opt.layout));
    run["reproducible"] = a.reproducible;
    meta["run"] = run;
    for (const auto& [k, v] : design_metadata(opt)) meta["design"][k] = v;
    meta["corpus"] = {{"tokens", workload.exact.total_unigrams()},
                      {"distinct_unigrams", workload.exact.distinct_unigrams()},
                      {"distinct_bigrams", workload.exact.distinct_bigrams()},
                      {"ideal_bytes", ideal_bytes(workload.exact)}};
    write_file(a.out + ".meta.json", meta.dump(2) + "\n");

    out << "wrote " << result.reports.size() << " rows to " << a.out << '\n';
    if (!result.warnings.empty()) {
        err << result.warnings.size() << " warning(s) written to " << a.out << ".warnings\n";
    }
    return kExitOk;
}

int cmd_query(const QueryArgs& a, std::ostream& out) {
    const Sketch sketch = load_sketch(a.sketch);
    std::string key;
    for (std::size_t i = 0; i < a.key.size(); ++i) {
        if (i) key.push_back(kBigramSeparator);
        key += a.key[i];
    }
    const double est = sketch.estimate(key);
    if (sketch.variant() == Variant::Cml) {
        out << format_real(est) << '\n';
    } else {
        out << static_cast<std::uint64_t>(est) << '\n';
    }
    return kExitOk;
}

int cmd_merge(const MergeArgs& a, std::ostream& out) {
    const Sketch x = load_sketch(a.a);
    const Sketch y = load_sketch(a.b);
    const auto* tx = x.get_if<CountMinTreeSketch>();
    const auto* ty = y.get_if<CountMinTreeSketch>();
    if (!tx || !ty) throw std::runtime_error("merge requires two CMTS sketches");
    const Sketch merged(Sketch::Impl{CountMinTreeSketch::merge(*tx, *ty)});
    save_sketch(merged, a.out);
    out << "merged into " << a.out << '\n';
    return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Count-Min Tree Sketch toolkit: counting, querying and error sweeps", "cmtsketch"};
    app.require_subcommand(1);
    app.set_config("--config", "", "TOML-style file whose entries expand to flags");

    GenZipfArgs gz;
    auto* gen = app.add_subcommand("gen-zipf", "Write a synthetic Zipf token stream");
    gen->add_option("--vocab,-V", gz.vocab, "Vocabulary size")->check(CLI::PositiveNumber);
    gen->add_option("--exponent,-s", gz.exponent, "Zipf exponent")->check(CLI::PositiveNumber);
    gen->add_option("--length,-N", gz.length, "Number of tokens");
    gen->add_option("--seed", gz.seed, "Generator seed");
    gen->add_option("--out,-o", gz.out, "Output text file")->required();

    CountArgs ca;
    auto* count = app.add_subcommand("count", "Count unigrams and bigrams of a text file into a sketch");
    count->add_option("--input,-i", ca.input, "UTF-8 text file")->required()->check(CLI::ExistingFile);
    count->add_option("--variant", ca.variant, "cms, cmls16, cmls8, cml or cmts");
    count->add_option("--depth,-d", ca.depth, "Rows")->check(CLI::PositiveNumber);
    count->add_option("--width,-w", ca.width, "Counters per row")->check(CLI::PositiveNumber);
    count->add_option("--seed", ca.seed, "Hash seed");
    count->add_option("--cml-base", ca.cml_base, "Logarithmic base (CML)");
    count->add_option("--cml-bits", ca.cml_bits, "Cell width, 8 or 16 (CML)")->check(CLI::IsMember({8, 16}));
    count->add_option("--cmts-base-width", ca.cmts_base_width, "Counters per block (CMTS)");
    count->add_option("--cmts-levels", ca.cmts_levels, "Barrier levels, 0 for log2(W)+1 (CMTS)");
    count->add_option("--cmts-spire", ca.cmts_spire, "Spire bits (CMTS)");
    count->add_flag("--separate-sketches", ca.separate, "Write <out>.uni and <out>.bi instead of one sketch");
    count->add_option("--out,-o", ca.out, "Output sketch file")->required();

    EvalArgs ea;
    auto* eval = app.add_subcommand("eval", "Run the error-vs-memory-pressure sweep and write CSV");
    eval->add_option("--input,-i", ea.input, "UTF-8 text file (default: synthetic Zipf stream)")
        ->check(CLI::ExistingFile);
    eval->add_option("--zipf-vocab", ea.zipf_vocab)->check(CLI::PositiveNumber);
    eval->add_option("--zipf-exponent", ea.zipf_exponent)->check(CLI::PositiveNumber);
    eval->add_option("--zipf-length", ea.zipf_length);
    eval->add_option("--zipf-seed", ea.zipf_seed);
    eval->add_option("--variants", ea.variants, "Comma-separated variants")->delimiter(',');
    eval->add_option("--pressures", ea.pressures, "Comma-separated sketch/ideal size ratios")->delimiter(',');
    eval->add_option("--seeds", ea.seeds, "Comma-separated hash seeds")->delimiter(',');
    eval->add_option("--depth,-d", ea.depth, "Rows")->check(CLI::PositiveNumber);
    eval->add_option("--threads", ea.threads, "Worker threads (capped by SKETCH_THREADS)");
    eval->add_flag("--separate-sketches", ea.separate, "One sketch per population instead of a shared one");
    eval->add_flag("--reproducible", ea.reproducible, "Write 0 in the runtime_ms column");
    eval->add_option("--out,-o", ea.out, "Output CSV")->required();

    QueryArgs qa;
    auto* query = app.add_subcommand("query", "Print the estimate of a key; several tokens form a bigram");
    query->add_option("--sketch,-s", qa.sketch, "Sketch file")->required();
    query->add_option("key", qa.key, "Token, or two tokens for a bigram")->required();

    MergeArgs ma;
    auto* merge = app.add_subcommand("merge", "Merge two CMTS sketch files");
    merge->add_option("a", ma.a, "First sketch")->required()->check(CLI::ExistingFile);
    merge->add_option("b", ma.b, "Second sketch")->required()->check(CLI::ExistingFile);
    merge->add_option("--out,-o", ma.out, "Output sketch file")->required();

    try {
        app.parse(argc, argv);
        if (*gen) return cmd_gen_zipf(gz, out);
        if (*count) return cmd_count(ca, out);
        if (*eval) return cmd_eval(ea, out, err);
        if (*query) return cmd_query(qa, out);
        if (*merge) return cmd_merge(ma, out);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitUsage;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<const char*> argv{"cmtsketch"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace cmt::cli
