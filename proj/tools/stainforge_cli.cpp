// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the stainforge Project.

// stainforge command-line front end.
//
// Exit codes:
//   0  success
//   1  usage error (unknown or conflicting flags), rejected before any I/O
//   2  unreadable input directory, or missing/invalid statistics file
//   3  too few decodable images (fit: fewer than 2; apply/export-style: none)
//   4  output could not be written (partial outputs are removed)
//   5  internal error
//
// Data goes to standard output as `key=value` lines after a `---` marker;
// warnings and progress go to standard error.

#include <stainforge/stainforge.h>

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;

namespace {

enum Exit : int {
    kExitOk = 0,
    kExitUsage = 1,
    kExitInput = 2,
    kExitTooFew = 3,
    kExitOutput = 4,
    kExitInternal = 5,
};

struct CliFailure {
    int code;
    std::string message;
};

[[noreturn]] void fail(int code, const std::string& message) { throw CliFailure{code, message}; }

[[noreturn]] void fail_status(int code, const std::string& context) {
    fail(code, context + ": " + sf_last_error());
}

// Owning wrappers around the C handles.
template <class T, void (*Free)(T*)>
struct HandleDeleter {
    void operator()(T* p) const { Free(p); }
};
using Image = std::unique_ptr<sf_image, HandleDeleter<sf_image, sf_image_free>>;
using PathList = std::unique_ptr<sf_path_list, HandleDeleter<sf_path_list, sf_path_list_free>>;
using Fitter = std::unique_ptr<sf_fitter, HandleDeleter<sf_fitter, sf_fitter_free>>;
using StatsSet = std::unique_ptr<sf_stats_set, HandleDeleter<sf_stats_set, sf_stats_set_free>>;
using Pipeline = std::unique_ptr<sf_pipeline, HandleDeleter<sf_pipeline, sf_pipeline_free>>;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

std::string fmt3(const double* v) { return fmt(v[0]) + "," + fmt(v[1]) + "," + fmt(v[2]); }

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(item);
    return out;
}

std::vector<sf_space> parse_spaces(const std::string& text) {
    std::vector<sf_space> out;
    for (const auto& name : split(text, ',')) {
        sf_space s;
        if (sf_space_from_name(name.c_str(), &s) != SF_OK) fail(kExitUsage, "unknown color space '" + name + "'");
        if (std::find(out.begin(), out.end(), s) != out.end()) fail(kExitUsage, "color space listed twice: " + name);
        out.push_back(s);
    }
    if (out.empty()) fail(kExitUsage, "--spaces is empty");
    return out;
}

sf_space parse_space(const std::string& name) {
    sf_space s;
    if (sf_space_from_name(name.c_str(), &s) != SF_OK) fail(kExitUsage, "unknown color space '" + name + "'");
    return s;
}

sf_family parse_family(const std::string& name) {
    sf_family f;
    if (sf_family_from_name(name.c_str(), &f) != SF_OK) fail(kExitUsage, "unknown family '" + name + "'");
    return f;
}

// "all" -> 0 (no subsampling).
std::size_t parse_per_class(const std::string& text) {
    if (text == "all") return 0;
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(text, &pos);
        if (pos != text.size() || v < 1) throw std::invalid_argument(text);
        return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
        fail(kExitUsage, "--per-class must be a positive integer or 'all'");
    }
}

unsigned default_workers() {
    if (const char* env = std::getenv("STAINFORGE_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1 && v <= 1024) return static_cast<unsigned>(v);
        std::cerr << "warning: ignoring invalid STAINFORGE_THREADS='" << env << "'\n";
    }
    return 1;
}

PathList scan_corpus(const std::string& dir, std::size_t per_class, std::uint64_t seed) {
    sf_path_list* raw = nullptr;
    if (sf_corpus_scan(dir.c_str(), &raw) != SF_OK) fail_status(kExitInput, "cannot read input directory");
    PathList all(raw);
    if (per_class == 0 || sf_path_list_size(all.get()) == 0) return all;
    sf_path_list* picked = nullptr;
    if (sf_corpus_subsample(all.get(), per_class, seed, &picked) != SF_OK) fail_status(kExitInternal, "subsampling");
    return PathList(picked);
}

// Returns null (after a warning) for files that cannot be decoded.
Image try_load(const char* path, std::size_t& skipped) {
    sf_image* img = nullptr;
    const sf_status st = sf_image_load(path, &img);
    if (st == SF_OK) return Image(img);
    if (st != SF_ERR_DECODE && st != SF_ERR_IO) fail_status(kExitInternal, std::string("loading ") + path);
    std::cerr << "warning: skipping " << path << ": " << sf_last_error() << '\n';
    ++skipped;
    return nullptr;
}

// ---- fit ------------------------------------------------------------------

struct FitArgs {
    std::string input_dir;
    std::string spaces = "lab,hsv,hed";
    std::string per_class = "all";
    std::string family = "gaussian";
    double dof = 5.0;
    std::uint64_t seed = 0;
    std::string out;
};

int run_fit(const FitArgs& a) {
    const auto spaces = parse_spaces(a.spaces);
    const std::size_t per_class = parse_per_class(a.per_class);
    const sf_family family = parse_family(a.family);
    if (family == SF_FAMILY_STUDENT_T && !(a.dof > 2.0)) fail(kExitUsage, "--dof must be > 2");

    std::vector<Fitter> fitters;
    for (sf_space s : spaces) {
        sf_fitter* f = nullptr;
        if (sf_fitter_create(s, family, a.dof, &f) != SF_OK) fail_status(kExitUsage, "fitter");
        fitters.emplace_back(f);
    }

    PathList paths = scan_corpus(a.input_dir, per_class, a.seed);
    std::size_t skipped = 0, used = 0;
    for (std::size_t i = 0; i < sf_path_list_size(paths.get()); ++i) {
        Image img = try_load(sf_path_list_get(paths.get(), i), skipped);
        if (!img) continue;
        for (auto& f : fitters)
            if (sf_fitter_add_image(f.get(), img.get()) != SF_OK) fail_status(kExitInternal, "fitting");
        ++used;
    }
    if (used < 2)
        fail(kExitTooFew, "need at least 2 decodable images, found " + std::to_string(used));

    sf_stats_set* raw = nullptr;
    if (sf_stats_set_create(&raw) != SF_OK) fail_status(kExitInternal, "stats");
    StatsSet set(raw);
    for (auto& f : fitters)
        if (sf_stats_set_add_fit(set.get(), f.get()) != SF_OK) fail_status(kExitInternal, "fitting");
    if (sf_stats_set_save(set.get(), a.out.c_str()) != SF_OK) {
        std::error_code ec;
        fs::remove(a.out, ec);
        fail_status(kExitOutput, "writing statistics file");
    }

    std::cout << "fitted " << used << " images (" << skipped << " skipped) -> " << a.out << '\n';
    std::cout << "---\n";
    std::cout << "command=fit\n" << "images=" << used << '\n' << "skipped=" << skipped << '\n';
    for (sf_space s : spaces) {
        sf_distribution_info info;
        sf_stats_set_get(set.get(), s, &info);
        const std::string k = sf_space_name(s);
        const double avg_sd[3] = {std::sqrt(info.avg_var[0]), std::sqrt(info.avg_var[1]), std::sqrt(info.avg_var[2])};
        const double std_sd[3] = {std::sqrt(info.std_var[0]), std::sqrt(info.std_var[1]), std::sqrt(info.std_var[2])};
        std::cout << k << ".n=" << info.n_samples << '\n'
                  << k << ".family=" << sf_family_name(info.family) << '\n'
                  << k << ".avg.mean=" << fmt3(info.avg_mean) << '\n'
                  << k << ".avg.std=" << fmt3(avg_sd) << '\n'
                  << k << ".std.mean=" << fmt3(info.std_mean) << '\n'
                  << k << ".std.std=" << fmt3(std_sd) << '\n';
    }
    std::cout << "stats=" << a.out << '\n';
    return kExitOk;
}

// ---- apply ----------------------------------------------------------------

struct ApplyArgs {
    std::string input_dir;
    std::string output_dir;
    std::string stats;
    std::string mode = "randstainna";
    std::string space;
    std::string space_probs;
    std::string strength;
    std::string template_image;
    std::string family;
    double dof = 5.0;
    std::uint64_t seed = 0;
    unsigned workers = 0;
    std::size_t batch_size = 32;
    bool shared_template = false;
};

// Records created files and directories so a failed run can be rolled back.
class OutputJournal {
public:
    void created_file(const fs::path& p) { files_.push_back(p); }

    void ensure_dir(const fs::path& dir) {
        std::vector<fs::path> missing;
        for (fs::path d = dir; !d.empty() && !fs::exists(d); d = d.parent_path()) missing.push_back(d);
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec) fail(kExitOutput, "cannot create directory " + dir.string() + ": " + ec.message());
        dirs_.insert(dirs_.end(), missing.begin(), missing.end());
    }

    void roll_back() {
        std::error_code ec;
        for (auto it = files_.rbegin(); it != files_.rend(); ++it) fs::remove(*it, ec);
        for (const auto& d : dirs_) fs::remove(d, ec);   // deepest first; only removes empty dirs
        files_.clear();
        dirs_.clear();
    }

private:
    std::vector<fs::path> files_;
    std::vector<fs::path> dirs_;
};

// Relative output path for each input: extension replaced by .png; inputs
// whose .png name would collide keep their extension (a.jpg -> a.jpg.png).
std::vector<fs::path> output_names(const fs::path& root, const sf_path_list* paths) {
    const std::size_t n = sf_path_list_size(paths);
    std::vector<fs::path> rel(n);
    std::map<fs::path, int> uses;
    for (std::size_t i = 0; i < n; ++i) {
        rel[i] = fs::path(sf_path_list_get(paths, i)).lexically_relative(root);
        ++uses[fs::path(rel[i]).replace_extension(".png")];
    }
    for (auto& r : rel) {
        fs::path png = fs::path(r).replace_extension(".png");
        const bool is_png = r.extension() == ".png";
        if (uses[png] > 1 && !is_png)
            r += ".png";
        else
            r = png;
    }
    return rel;
}

int run_apply(const ApplyArgs& a, const CLI::App& cmd) {
    // Flag validation, before any I/O.
    sf_mode mode;
    if (sf_mode_from_name(a.mode.c_str(), &mode) != SF_OK) fail(kExitUsage, "unknown mode '" + a.mode + "'");
    auto given = [&](const char* flag) { return cmd.count(flag) > 0; };
    const bool randomized = mode == SF_MODE_RANDSTAINNA || mode == SF_MODE_FIXED_SPACE;
    const bool sa = mode == SF_MODE_SA1 || mode == SF_MODE_SA2;
    if (given("--space-probs") && mode != SF_MODE_RANDSTAINNA)
        fail(kExitUsage, "--space-probs only applies to --mode randstainna");
    if (given("--space") && mode == SF_MODE_RANDSTAINNA)
        fail(kExitUsage, "--space conflicts with --mode randstainna (use --space-probs)");
    if (given("--space") && mode == SF_MODE_PASSTHROUGH) fail(kExitUsage, "--space does not apply to passthrough");
    if (mode == SF_MODE_FIXED_SPACE && !given("--space")) fail(kExitUsage, "--mode fixed requires --space");
    if (given("--template-image") && mode != SF_MODE_SN) fail(kExitUsage, "--template-image only applies to --mode sn");
    if (given("--strength") && !sa) fail(kExitUsage, "--strength only applies to --mode sa1/sa2");
    if ((given("--family") || given("--dof")) && !randomized)
        fail(kExitUsage, "--family/--dof only apply to --mode randstainna/fixed");
    if (a.shared_template && !randomized) fail(kExitUsage, "--shared-template only applies to --mode randstainna/fixed");
    if (a.batch_size == 0) fail(kExitUsage, "--batch-size must be >= 1");

    sf_pipeline_options opt;
    sf_pipeline_options_init(&opt);
    opt.mode = mode;
    opt.seed = a.seed;
    opt.batch_shared_template = a.shared_template ? 1 : 0;
    if (given("--space")) {
        opt.space = parse_space(a.space);
    } else if (mode == SF_MODE_SA1) {
        opt.space = SF_SPACE_HED;
    } else if (mode == SF_MODE_SA2) {
        opt.space = SF_SPACE_HSV;
    }
    if (mode == SF_MODE_SA1 && opt.space != SF_SPACE_HED && opt.space != SF_SPACE_LAB)
        fail(kExitUsage, "sa1 runs in hed or lab");
    if (mode == SF_MODE_SA2 && opt.space != SF_SPACE_HSV && opt.space != SF_SPACE_LAB)
        fail(kExitUsage, "sa2 runs in hsv or lab");
    if (given("--space-probs")) {
        const auto parts = split(a.space_probs, ',');
        if (parts.size() != 3) fail(kExitUsage, "--space-probs takes three comma-separated values (lab,hsv,hed)");
        double sum = 0.0;
        for (int i = 0; i < 3; ++i) {
            try {
                std::size_t pos = 0;
                opt.space_probs[i] = std::stod(parts[i], &pos);
                if (pos != parts[i].size()) throw std::invalid_argument(parts[i]);
            } catch (const std::exception&) {
                fail(kExitUsage, "bad probability '" + parts[i] + "'");
            }
            if (!(opt.space_probs[i] >= 0.0)) fail(kExitUsage, "probabilities must be >= 0");
            sum += opt.space_probs[i];
        }
        if (std::abs(sum - 1.0) > 1e-9) fail(kExitUsage, "--space-probs must sum to 1");
    }
    if (given("--strength")) {
        if (a.strength == "light")
            opt.strength = SF_STRENGTH_LIGHT;
        else if (a.strength == "strong")
            opt.strength = SF_STRENGTH_STRONG;
        else
            fail(kExitUsage, "--strength must be light or strong");
    }
    if (given("--family")) {
        opt.override_family = 1;
        opt.family = parse_family(a.family);
        opt.dof = a.dof;
        if (opt.family == SF_FAMILY_STUDENT_T && !(a.dof > 2.0)) fail(kExitUsage, "--dof must be > 2");
    }
    const unsigned workers = a.workers > 0 ? a.workers : default_workers();
    const bool needs_stats = randomized || (mode == SF_MODE_SN && !given("--template-image"));
    if (needs_stats && a.stats.empty()) fail(kExitInput, "--mode " + a.mode + " requires --stats");

    // Inputs.
    StatsSet stats;
    if (!a.stats.empty()) {
        sf_stats_set* raw = nullptr;
        if (sf_stats_set_load(a.stats.c_str(), &raw) != SF_OK) fail_status(kExitInput, "statistics file " + a.stats);
        stats.reset(raw);
    }
    Image template_img;
    if (given("--template-image")) {
        sf_image* raw = nullptr;
        if (sf_image_load(a.template_image.c_str(), &raw) != SF_OK) fail_status(kExitInput, "template image");
        template_img.reset(raw);
        opt.template_image = template_img.get();
    }
    sf_pipeline* raw_pipeline = nullptr;
    if (const sf_status st = sf_pipeline_create(stats.get(), &opt, &raw_pipeline); st != SF_OK)
        fail_status(st == SF_ERR_MISSING_DISTRIBUTION ? kExitInput : kExitUsage, "pipeline");
    Pipeline pipeline(raw_pipeline);

    PathList paths = scan_corpus(a.input_dir, 0, 0);
    const std::size_t n = sf_path_list_size(paths.get());
    if (n == 0) fail(kExitTooFew, "no images found in " + a.input_dir);
    const fs::path in_root(a.input_dir), out_root(a.output_dir);
    const auto rel = output_names(in_root, paths.get());

    OutputJournal journal;
    std::size_t written = 0, skipped = 0;
    double clamped_pixels = 0.0, total_pixels = 0.0;
    try {
        journal.ensure_dir(out_root);
        for (std::size_t start = 0; start < n; start += a.batch_size) {
            const std::size_t end = std::min(n, start + a.batch_size);
            std::vector<Image> loaded(end - start);
            for (std::size_t i = start; i < end; ++i) loaded[i - start] = try_load(sf_path_list_get(paths.get(), i), skipped);

            // Transform each run of consecutive decodable images as one batch,
            // keeping every item's global index.
            for (std::size_t i = start; i < end;) {
                if (!loaded[i - start]) {
                    ++i;
                    continue;
                }
                std::size_t j = i;
                std::vector<const sf_image*> run;
                while (j < end && loaded[j - start]) run.push_back(loaded[j++ - start].get());
                std::vector<sf_image*> outs(run.size(), nullptr);
                std::vector<double> fractions(run.size(), 0.0);
                std::size_t failed = 0;
                if (sf_pipeline_transform_batch(pipeline.get(), run.data(), run.size(), i, workers, outs.data(),
                                                fractions.data(), &failed) != SF_OK)
                    fail_status(kExitInternal, std::string("transforming ") + sf_path_list_get(paths.get(), i + failed));
                std::vector<Image> owned;
                for (sf_image* o : outs) owned.emplace_back(o);
                for (std::size_t k = 0; k < run.size(); ++k) {
                    const fs::path dst = out_root / rel[i + k];
                    journal.ensure_dir(dst.parent_path());
                    const bool existed = fs::exists(dst);
                    if (sf_image_save_png(owned[k].get(), dst.string().c_str()) != SF_OK) {
                        if (!existed) journal.created_file(dst);
                        fail_status(kExitOutput, "writing " + dst.string());
                    }
                    journal.created_file(dst);
                    const double px = static_cast<double>(sf_image_width(owned[k].get())) * sf_image_height(owned[k].get());
                    clamped_pixels += fractions[k] * px;
                    total_pixels += px;
                    ++written;
                }
                i = j;
            }
        }
    } catch (const CliFailure&) {
        journal.roll_back();
        throw;
    }
    if (written == 0) {
        journal.roll_back();
        fail(kExitTooFew, "no decodable images in " + a.input_dir);
    }

    const double clamped = total_pixels > 0.0 ? clamped_pixels / total_pixels : 0.0;
    std::cout << "wrote " << written << " images (" << skipped << " skipped) to " << a.output_dir << '\n';
    std::cout << "---\n"
              << "command=apply\n"
              << "mode=" << sf_mode_name(mode) << '\n'
              << "images=" << written << '\n'
              << "skipped=" << skipped << '\n'
              << "workers=" << workers << '\n'
              << "clamped_fraction=" << fmt(clamped) << '\n';
    return kExitOk;
}

// ---- export-style ---------------------------------------------------------

struct ExportArgs {
    std::string input_dir;
    std::string space = "lab";
    std::string out;
    std::string per_class = "all";
    std::uint64_t seed = 0;
};

int run_export(const ExportArgs& a) {
    const sf_space space = parse_space(a.space);
    const std::size_t per_class = parse_per_class(a.per_class);
    PathList paths = scan_corpus(a.input_dir, per_class, a.seed);
    std::size_t rows = 0, skipped = 0;
    const sf_status st = sf_export_style_csv(paths.get(), space, a.out.empty() ? nullptr : a.out.c_str(), &rows, &skipped);
    if (st == SF_ERR_INSUFFICIENT_SAMPLES) fail_status(kExitTooFew, "export-style");
    if (st == SF_ERR_SINK_WRITE) {
        if (!a.out.empty()) {
            std::error_code ec;
            fs::remove(a.out, ec);
        }
        fail_status(kExitOutput, "export-style");
    }
    if (st != SF_OK) fail_status(kExitInternal, "export-style");
    if (a.out.empty()) {
        // CSV occupies standard output.
        std::cerr << "exported " << rows << " rows (" << skipped << " skipped)\n";
    } else {
        std::cout << "---\n"
                  << "command=export-style\n"
                  << "space=" << sf_space_name(space) << '\n'
                  << "rows=" << rows << '\n'
                  << "skipped=" << skipped << '\n'
                  << "csv=" << a.out << '\n';
    }
    return kExitOk;
}

// ---- bench ----------------------------------------------------------------

struct BenchArgs {
    std::size_t images = 32;
    std::uint32_t size = 224;
    std::string workers = "1,2,4";
    std::string modes = "passthrough,randstainna,sn,sa1,sa2";
    std::size_t repeat = 3;
    std::uint64_t seed = 0;
};

// H&E-flavoured synthetic patches: a pink stroma background with purple
// nuclei blobs, per-image stain shift and per-pixel noise.
std::vector<std::vector<std::uint8_t>> synthetic_corpus(std::size_t count, std::uint32_t size, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, 6.0);
    std::vector<std::vector<std::uint8_t>> out;
    for (std::size_t n = 0; n < count; ++n) {
        const double shift[3] = {20.0 * (unit(rng) - 0.5), 20.0 * (unit(rng) - 0.5), 20.0 * (unit(rng) - 0.5)};
        const double stroma[3] = {225.0 + shift[0], 160.0 + shift[1], 200.0 + shift[2]};
        const double nucleus[3] = {110.0 + shift[0], 70.0 + shift[1], 160.0 + shift[2]};
        struct Blob {
            double x, y, r;
        };
        std::vector<Blob> blobs(12);
        for (auto& b : blobs) b = {unit(rng) * size, unit(rng) * size, 4.0 + 8.0 * unit(rng)};
        std::vector<std::uint8_t> px(static_cast<std::size_t>(size) * size * 3);
        for (std::uint32_t y = 0; y < size; ++y)
            for (std::uint32_t x = 0; x < size; ++x) {
                bool in_nucleus = false;
                for (const auto& b : blobs)
                    if ((x - b.x) * (x - b.x) + (y - b.y) * (y - b.y) < b.r * b.r) in_nucleus = true;
                const double* base = in_nucleus ? nucleus : stroma;
                for (int c = 0; c < 3; ++c) {
                    const double v = std::clamp(base[c] + noise(rng), 0.0, 255.0);
                    px[(static_cast<std::size_t>(y) * size + x) * 3 + c] = static_cast<std::uint8_t>(std::lround(v));
                }
            }
        out.push_back(std::move(px));
    }
    return out;
}

int run_bench(const BenchArgs& a) {
    if (a.images == 0 || a.size == 0 || a.repeat == 0) fail(kExitUsage, "--images, --size and --repeat must be >= 1");
    std::vector<unsigned> worker_counts;
    for (const auto& w : split(a.workers, ',')) {
        try {
            const int v = std::stoi(w);
            if (v < 1) throw std::invalid_argument(w);
            worker_counts.push_back(static_cast<unsigned>(v));
        } catch (const std::exception&) {
            fail(kExitUsage, "bad worker count '" + w + "'");
        }
    }
    std::vector<sf_mode> modes;
    for (const auto& m : split(a.modes, ',')) {
        sf_mode mode;
        if (sf_mode_from_name(m.c_str(), &mode) != SF_OK) fail(kExitUsage, "unknown mode '" + m + "'");
        modes.push_back(mode);
    }
    if (worker_counts.empty() || modes.empty()) fail(kExitUsage, "--workers and --modes must be non-empty");

    const auto corpus = synthetic_corpus(a.images, a.size, a.seed);
    std::vector<Image> images;
    std::vector<const sf_image*> views;
    std::vector<const std::uint8_t*> buffers;
    for (const auto& px : corpus) {
        sf_image* img = nullptr;
        if (sf_image_create(a.size, a.size, px.data(), &img) != SF_OK) fail_status(kExitInternal, "bench corpus");
        images.emplace_back(img);
        views.push_back(img);
        buffers.push_back(px.data());
    }
    const std::vector<std::uint32_t> dims(corpus.size(), a.size);
    const sf_space all_spaces[3] = {SF_SPACE_LAB, SF_SPACE_HSV, SF_SPACE_HED};
    sf_stats_set* raw_stats = nullptr;
    if (corpus.size() >= 2) {
        if (sf_fit_from_buffers(buffers.data(), dims.data(), dims.data(), corpus.size(), all_spaces, 3,
                                SF_FAMILY_GAUSSIAN, 5.0, &raw_stats) != SF_OK)
            fail_status(kExitInternal, "bench fit");
    }
    StatsSet stats(raw_stats);

    std::cout << "bench: " << a.images << " synthetic " << a.size << "x" << a.size << " images, best of "
              << a.repeat << " runs, " << std::thread::hardware_concurrency() << " hardware threads\n";
    std::cout << "---\n"
              << "command=bench\n"
              << "images=" << a.images << '\n'
              << "size=" << a.size << '\n'
              << "hardware_threads=" << std::thread::hardware_concurrency() << '\n';
    for (sf_mode mode : modes) {
        sf_pipeline_options opt;
        sf_pipeline_options_init(&opt);
        opt.mode = mode;
        opt.seed = a.seed;
        if (mode == SF_MODE_SA1) opt.space = SF_SPACE_HED;
        if (mode == SF_MODE_SA2) opt.space = SF_SPACE_HSV;
        sf_pipeline* raw = nullptr;
        if (sf_pipeline_create(stats.get(), &opt, &raw) != SF_OK) {
            std::cerr << "warning: skipping mode " << sf_mode_name(mode) << ": " << sf_last_error() << '\n';
            continue;
        }
        Pipeline pipeline(raw);
        for (unsigned w : worker_counts) {
            double best = 0.0;
            for (std::size_t r = 0; r < a.repeat; ++r) {
                std::vector<sf_image*> outs(views.size(), nullptr);
                const auto t0 = std::chrono::steady_clock::now();
                if (sf_pipeline_transform_batch(pipeline.get(), views.data(), views.size(), 0, w, outs.data(), nullptr,
                                                nullptr) != SF_OK)
                    fail_status(kExitInternal, "bench transform");
                const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                for (sf_image* o : outs) sf_image_free(o);
                best = std::max(best, static_cast<double>(views.size()) / std::max(secs, 1e-9));
            }
            std::cout << "bench." << sf_mode_name(mode) << ".workers" << w << ".images_per_second=" << fmt(best) << '\n';
        }
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"stainforge: stain-style fitting, randomized stain normalization and augmentation"};
    app.set_version_flag("--version", std::string(sf_version()));
    app.require_subcommand(1);

    FitArgs fit;
    auto* fit_cmd = app.add_subcommand("fit", "Fit per-space stain-style distributions over an image corpus");
    fit_cmd->add_option("--input-dir", fit.input_dir, "Corpus root (class folders optional)")->required();
    fit_cmd->add_option("--spaces", fit.spaces, "Comma-separated subset of lab,hsv,hed")->capture_default_str();
    fit_cmd->add_option("--per-class", fit.per_class, "Images sampled per class folder, or 'all'")->capture_default_str();
    fit_cmd->add_option("--family", fit.family, "gaussian | t | uniform | laplace")->capture_default_str();
    fit_cmd->add_option("--dof", fit.dof, "Degrees of freedom for family t")->capture_default_str();
    fit_cmd->add_option("--seed", fit.seed, "Subsampling seed")->capture_default_str();
    fit_cmd->add_option("--out", fit.out, "Statistics file to write")->required();

    ApplyArgs apply;
    auto* apply_cmd = app.add_subcommand("apply", "Transform a directory tree of images");
    apply_cmd->add_option("--input-dir", apply.input_dir)->required();
    apply_cmd->add_option("--output-dir", apply.output_dir)->required();
    apply_cmd->add_option("--stats", apply.stats, "Statistics file from `fit`");
    apply_cmd->add_option("--mode", apply.mode, "randstainna | fixed | sn | sa1 | sa2 | passthrough")->capture_default_str();
    apply_cmd->add_option("--space", apply.space, "Working space for fixed/sn/sa1/sa2");
    apply_cmd->add_option("--space-probs", apply.space_probs, "lab,hsv,hed selection probabilities (randstainna)");
    apply_cmd->add_option("--strength", apply.strength, "light | strong (sa1/sa2)");
    apply_cmd->add_option("--template-image", apply.template_image, "Reference image for sn");
    apply_cmd->add_option("--family", apply.family, "Override the fitted sampling family");
    apply_cmd->add_option("--dof", apply.dof, "Degrees of freedom for --family t");
    apply_cmd->add_option("--seed", apply.seed)->capture_default_str();
    apply_cmd->add_option("--workers", apply.workers, "Worker threads (default: $STAINFORGE_THREADS or 1)");
    apply_cmd->add_option("--batch-size", apply.batch_size, "Images per batch")->capture_default_str();
    apply_cmd->add_flag("--shared-template", apply.shared_template, "One template per batch instead of per image");

    ExportArgs exp;
    auto* exp_cmd = app.add_subcommand("export-style", "Write per-image style vectors (A, D) as CSV");
    exp_cmd->add_option("--input-dir", exp.input_dir)->required();
    exp_cmd->add_option("--space", exp.space)->capture_default_str();
    exp_cmd->add_option("--out", exp.out, "CSV file (default: standard output)");
    exp_cmd->add_option("--per-class", exp.per_class)->capture_default_str();
    exp_cmd->add_option("--seed", exp.seed)->capture_default_str();

    BenchArgs bench;
    auto* bench_cmd = app.add_subcommand("bench", "Measure transform throughput on a synthetic corpus");
    bench_cmd->add_option("--images", bench.images)->capture_default_str();
    bench_cmd->add_option("--size", bench.size)->capture_default_str();
    bench_cmd->add_option("--workers", bench.workers, "Comma-separated worker counts")->capture_default_str();
    bench_cmd->add_option("--modes", bench.modes)->capture_default_str();
    bench_cmd->add_option("--repeat", bench.repeat)->capture_default_str();
    bench_cmd->add_option("--seed", bench.seed)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*fit_cmd) return run_fit(fit);
        if (*apply_cmd) return run_apply(apply, *apply_cmd);
        if (*exp_cmd) return run_export(exp);
        if (*bench_cmd) return run_bench(bench);
    } catch (const CliFailure& f) {
        std::cerr << "error: " << f.message << '\n';
        return f.code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInternal;
    }
    return kExitUsage;
}
