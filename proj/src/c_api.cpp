// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the stainforge Project.

#include <stainforge/stainforge.h>

#include <stainforge/error.hpp>
#include <stainforge/image_io.hpp>
#include <stainforge/stats_file.hpp>

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iostream>
#include <memory>
#include <new>
#include <string>

using namespace stainforge;

struct sf_image {
    RgbImage img;
};

struct sf_path_list {
    std::vector<std::string> paths;
};

struct sf_fitter {
    StyleAccumulator acc;
    DistributionFamily family;
};

struct sf_stats_set {
    StatsSet set;
};

struct sf_rng {
    Rng rng;
};

struct sf_pipeline {
    Pipeline pipeline;
};

namespace {

thread_local std::string g_last_error;

sf_status to_status(ErrorCode code) {
    switch (code) {
    case ErrorCode::InvalidArgument: return SF_ERR_INVALID_ARGUMENT;
    case ErrorCode::MixedColorSpace: return SF_ERR_MIXED_COLOR_SPACE;
    case ErrorCode::InsufficientSamples: return SF_ERR_INSUFFICIENT_SAMPLES;
    case ErrorCode::EmptyCorpus: return SF_ERR_EMPTY_CORPUS;
    case ErrorCode::MissingDistribution: return SF_ERR_MISSING_DISTRIBUTION;
    case ErrorCode::Io: return SF_ERR_IO;
    case ErrorCode::Decode: return SF_ERR_DECODE;
    case ErrorCode::Parse: return SF_ERR_PARSE;
    case ErrorCode::VersionMismatch: return SF_ERR_VERSION_MISMATCH;
    case ErrorCode::SinkWrite: return SF_ERR_SINK_WRITE;
    }
    return SF_ERR_INTERNAL;
}

sf_status set_error(sf_status status, const std::string& message) {
    g_last_error = message;
    return status;
}

// Runs `body`, translating exceptions into status codes.
template <class F>
sf_status guarded(F&& body) {
    try {
        body();
        return SF_OK;
    } catch (const Error& e) {
        return set_error(to_status(e.code()), e.what());
    } catch (const std::bad_alloc&) {
        return set_error(SF_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return set_error(SF_ERR_INTERNAL, e.what());
    } catch (...) {
        return set_error(SF_ERR_INTERNAL, "unknown error");
    }
}

void require(bool ok, const char* what) {
    if (!ok) throw Error(ErrorCode::InvalidArgument, what);
}

ColorSpace space_of(sf_space s) {
    require(s == SF_SPACE_LAB || s == SF_SPACE_HSV || s == SF_SPACE_HED, "invalid color space");
    return static_cast<ColorSpace>(s);
}

DistributionFamily family_of(sf_family f, double dof) {
    switch (f) {
    case SF_FAMILY_GAUSSIAN: return DistributionFamily::gaussian();
    case SF_FAMILY_STUDENT_T: return DistributionFamily::student_t(dof > 0.0 ? dof : DistributionFamily::kDefaultDof);
    case SF_FAMILY_UNIFORM: return DistributionFamily::uniform();
    case SF_FAMILY_LAPLACE: return DistributionFamily::laplace();
    }
    throw Error(ErrorCode::InvalidArgument, "invalid distribution family");
}

sf_family family_tag(DistributionFamily::Kind k) {
    switch (k) {
    case DistributionFamily::Kind::Gaussian: return SF_FAMILY_GAUSSIAN;
    case DistributionFamily::Kind::StudentT: return SF_FAMILY_STUDENT_T;
    case DistributionFamily::Kind::Uniform: return SF_FAMILY_UNIFORM;
    case DistributionFamily::Kind::Laplace: return SF_FAMILY_LAPLACE;
    }
    return SF_FAMILY_GAUSSIAN;
}

RgbImage image_from_buffer(const uint8_t* rgb, uint32_t width, uint32_t height) {
    require(rgb != nullptr, "pixel buffer is null");
    require(width > 0 && height > 0, "image dimensions must be nonzero");
    const std::size_t n = static_cast<std::size_t>(width) * height * 3;
    return RgbImage(width, height, std::vector<std::uint8_t>(rgb, rgb + n));
}

Mode mode_of(sf_mode m) {
    switch (m) {
    case SF_MODE_RANDSTAINNA: return Mode::RandStainNA;
    case SF_MODE_FIXED_SPACE: return Mode::FixedSpace;
    case SF_MODE_SN: return Mode::SnBaseline;
    case SF_MODE_SA1: return Mode::Sa1Baseline;
    case SF_MODE_SA2: return Mode::Sa2Baseline;
    case SF_MODE_PASSTHROUGH: return Mode::PassThrough;
    }
    throw Error(ErrorCode::InvalidArgument, "invalid mode");
}

} // namespace

extern "C" {

const char* sf_version(void) { return STAINFORGE_VERSION_STRING; }

const char* sf_last_error(void) { return g_last_error.c_str(); }

const char* sf_status_name(sf_status status) {
    switch (status) {
    case SF_OK: return "OK";
    case SF_ERR_INVALID_ARGUMENT: return "InvalidArgument";
    case SF_ERR_MIXED_COLOR_SPACE: return "MixedColorSpace";
    case SF_ERR_INSUFFICIENT_SAMPLES: return "InsufficientSamples";
    case SF_ERR_EMPTY_CORPUS: return "EmptyCorpus";
    case SF_ERR_MISSING_DISTRIBUTION: return "MissingDistribution";
    case SF_ERR_IO: return "Io";
    case SF_ERR_DECODE: return "Decode";
    case SF_ERR_PARSE: return "Parse";
    case SF_ERR_VERSION_MISMATCH: return "VersionMismatch";
    case SF_ERR_SINK_WRITE: return "SinkWrite";
    case SF_ERR_INTERNAL: return "Internal";
    }
    return "Unknown";
}

const char* sf_space_name(sf_space space) {
    switch (space) {
    case SF_SPACE_LAB: return "lab";
    case SF_SPACE_HSV: return "hsv";
    case SF_SPACE_HED: return "hed";
    }
    return "?";
}

sf_status sf_space_from_name(const char* name, sf_space* out) {
    return guarded([&] {
        require(name && out, "null argument");
        *out = static_cast<sf_space>(parse_color_space(name));
    });
}

const char* sf_family_name(sf_family family) {
    switch (family) {
    case SF_FAMILY_GAUSSIAN: return "gaussian";
    case SF_FAMILY_STUDENT_T: return "t";
    case SF_FAMILY_UNIFORM: return "uniform";
    case SF_FAMILY_LAPLACE: return "laplace";
    }
    return "?";
}

sf_status sf_family_from_name(const char* name, sf_family* out) {
    return guarded([&] {
        require(name && out, "null argument");
        *out = family_tag(parse_family(name).kind);
    });
}

const char* sf_mode_name(sf_mode mode) {
    try {
        return to_string(mode_of(mode)).data();
    } catch (...) {
        return "?";
    }
}

sf_status sf_mode_from_name(const char* name, sf_mode* out) {
    return guarded([&] {
        require(name && out, "null argument");
        *out = static_cast<sf_mode>(parse_mode(name));
    });
}

// ---- images ---------------------------------------------------------------

sf_status sf_image_create(uint32_t width, uint32_t height, const uint8_t* rgb, sf_image** out) {
    return guarded([&] {
        require(out != nullptr, "null output");
        *out = new sf_image{image_from_buffer(rgb, width, height)};
    });
}

sf_status sf_image_load(const char* path, sf_image** out) {
    return guarded([&] {
        require(path && out, "null argument");
        *out = new sf_image{load_image(path)};
    });
}

sf_status sf_image_save_png(const sf_image* image, const char* path) {
    return guarded([&] {
        require(image && path, "null argument");
        save_png(image->img, path);
    });
}

uint32_t sf_image_width(const sf_image* image) { return image ? image->img.width() : 0; }
uint32_t sf_image_height(const sf_image* image) { return image ? image->img.height() : 0; }
const uint8_t* sf_image_data(const sf_image* image) { return image ? image->img.data().data() : nullptr; }
void sf_image_free(sf_image* image) { delete image; }

sf_status sf_image_channel_stats(const sf_image* image, sf_space space, double avg[3], double std_out[3]) {
    return guarded([&] {
        require(image && avg && std_out, "null argument");
        const ChannelStats s = channel_stats(to_planes(image->img, space_of(space)));
        std::memcpy(avg, s.avg.data(), sizeof(double) * 3);
        std::memcpy(std_out, s.std.data(), sizeof(double) * 3);
    });
}

// ---- corpus ---------------------------------------------------------------

sf_status sf_corpus_scan(const char* root, sf_path_list** out) {
    return guarded([&] {
        require(root && out, "null argument");
        auto list = std::make_unique<sf_path_list>();
        for (const auto& p : scan_images(root)) list->paths.push_back(p.string());
        *out = list.release();
    });
}

sf_status sf_corpus_subsample(const sf_path_list* paths, size_t per_class, uint64_t seed, sf_path_list** out) {
    return guarded([&] {
        require(paths && out, "null argument");
        std::vector<std::filesystem::path> in(paths->paths.begin(), paths->paths.end());
        auto list = std::make_unique<sf_path_list>();
        for (const auto& p : subsample_corpus(in, per_class, seed)) list->paths.push_back(p.string());
        *out = list.release();
    });
}

size_t sf_path_list_size(const sf_path_list* list) { return list ? list->paths.size() : 0; }

const char* sf_path_list_get(const sf_path_list* list, size_t index) {
    if (!list || index >= list->paths.size()) return nullptr;
    return list->paths[index].c_str();
}

void sf_path_list_free(sf_path_list* list) { delete list; }

// ---- fitting --------------------------------------------------------------

sf_status sf_fitter_create(sf_space space, sf_family family, double dof, sf_fitter** out) {
    return guarded([&] {
        require(out != nullptr, "null output");
        *out = new sf_fitter{StyleAccumulator(space_of(space)), family_of(family, dof)};
    });
}

sf_status sf_fitter_add_image(sf_fitter* fitter, const sf_image* image) {
    return guarded([&] {
        require(fitter && image, "null argument");
        fitter->acc.add(channel_stats(to_planes(image->img, fitter->acc.space())));
    });
}

sf_status sf_fitter_add_stats(sf_fitter* fitter, const double avg[3], const double std_in[3]) {
    return guarded([&] {
        require(fitter && avg && std_in, "null argument");
        fitter->acc.add({fitter->acc.space(), {avg[0], avg[1], avg[2]}, {std_in[0], std_in[1], std_in[2]}});
    });
}

uint64_t sf_fitter_count(const sf_fitter* fitter) { return fitter ? fitter->acc.count() : 0; }
void sf_fitter_free(sf_fitter* fitter) { delete fitter; }

sf_status sf_stats_set_create(sf_stats_set** out) {
    return guarded([&] {
        require(out != nullptr, "null output");
        *out = new sf_stats_set{};
    });
}

sf_status sf_stats_set_add_fit(sf_stats_set* set, const sf_fitter* fitter) {
    return guarded([&] {
        require(set && fitter, "null argument");
        set->set.put(fitter->acc.finish(fitter->family));
    });
}

sf_status sf_stats_set_load(const char* path, sf_stats_set** out) {
    return guarded([&] {
        require(path && out, "null argument");
        *out = new sf_stats_set{load_stats(path)};
    });
}

sf_status sf_stats_set_parse(const char* text, size_t length, sf_stats_set** out) {
    return guarded([&] {
        require(text && out, "null argument");
        *out = new sf_stats_set{parse_stats(std::string_view(text, length))};
    });
}

sf_status sf_stats_set_save(const sf_stats_set* set, const char* path) {
    return guarded([&] {
        require(set && path, "null argument");
        save_stats(set->set, path);
    });
}

sf_status sf_stats_set_serialize(const sf_stats_set* set, char** out_text) {
    return guarded([&] {
        require(set && out_text, "null argument");
        const std::string text = serialize_stats(set->set);
        char* buf = static_cast<char*>(std::malloc(text.size() + 1));
        if (!buf) throw std::bad_alloc();
        std::memcpy(buf, text.c_str(), text.size() + 1);
        *out_text = buf;
    });
}

int sf_stats_set_has(const sf_stats_set* set, sf_space space) {
    if (!set || space < SF_SPACE_LAB || space > SF_SPACE_HED) return 0;
    return set->set.has(static_cast<ColorSpace>(space)) ? 1 : 0;
}

sf_status sf_stats_set_get(const sf_stats_set* set, sf_space space, sf_distribution_info* out) {
    return guarded([&] {
        require(set && out, "null argument");
        const StyleDistribution& d = set->set.at(space_of(space));
        out->space = space;
        out->family = family_tag(d.family.kind);
        out->dof = d.family.dof;
        out->n_samples = d.n_samples;
        for (int c = 0; c < 3; ++c) {
            out->avg_mean[c] = d.mean_of_avg[c];
            out->avg_var[c] = d.var_of_avg[c];
            out->std_mean[c] = d.mean_of_std[c];
            out->std_var[c] = d.var_of_std[c];
        }
    });
}

void sf_stats_set_free(sf_stats_set* set) { delete set; }
void sf_string_free(char* text) { std::free(text); }

sf_status sf_fit_from_buffers(const uint8_t* const* pixels, const uint32_t* widths, const uint32_t* heights,
                              size_t count, const sf_space* spaces, size_t n_spaces, sf_family family,
                              double dof, sf_stats_set** out) {
    return guarded([&] {
        require(pixels && widths && heights && spaces && out, "null argument");
        require(n_spaces > 0, "no color spaces requested");
        const DistributionFamily fam = family_of(family, dof);
        std::vector<StyleAccumulator> accs;
        for (size_t s = 0; s < n_spaces; ++s) accs.emplace_back(space_of(spaces[s]));
        for (size_t i = 0; i < count; ++i) {
            const RgbImage img = image_from_buffer(pixels[i], widths[i], heights[i]);
            for (auto& acc : accs) acc.add(channel_stats(to_planes(img, acc.space())));
        }
        auto set = std::make_unique<sf_stats_set>();
        for (const auto& acc : accs) set->set.put(acc.finish(fam));
        *out = set.release();
    });
}

sf_status sf_export_style_csv(const sf_path_list* paths, sf_space space, const char* out_path,
                              size_t* rows_written, size_t* skipped) {
    return guarded([&] {
        require(paths != nullptr, "null argument");
        const ColorSpace cs = space_of(space);
        std::vector<StyleRecord> records;
        size_t n_skipped = 0;
        for (const auto& p : paths->paths) {
            try {
                records.push_back({p, channel_stats(to_planes(load_image(p), cs))});
            } catch (const Error& e) {
                if (e.code() != ErrorCode::Decode && e.code() != ErrorCode::Io) throw;
                std::cerr << "warning: skipping " << p << ": " << e.what() << '\n';
                ++n_skipped;
            }
        }
        if (skipped) *skipped = n_skipped;
        size_t rows = 0;
        if (out_path) {
            std::ofstream file(out_path, std::ios::binary | std::ios::trunc);
            if (!file) throw Error(ErrorCode::SinkWrite, std::string("cannot create ") + out_path);
            rows = export_style_csv(records, file);
        } else {
            rows = export_style_csv(records, std::cout);
        }
        if (rows_written) *rows_written = rows;
    });
}

// ---- randomness -----------------------------------------------------------

sf_status sf_rng_create(uint64_t seed, sf_rng** out) {
    return guarded([&] {
        require(out != nullptr, "null output");
        *out = new sf_rng{Rng(seed)};
    });
}

sf_status sf_rng_derive(uint64_t seed, uint64_t index, sf_rng** out) {
    return guarded([&] {
        require(out != nullptr, "null output");
        *out = new sf_rng{Rng::derive(seed, index)};
    });
}

void sf_rng_free(sf_rng* rng) { delete rng; }

// ---- pipeline -------------------------------------------------------------

void sf_pipeline_options_init(sf_pipeline_options* options) {
    if (!options) return;
    options->mode = SF_MODE_RANDSTAINNA;
    options->space_probs[0] = options->space_probs[1] = options->space_probs[2] = 1.0 / 3.0;
    options->space = SF_SPACE_LAB;
    options->strength = SF_STRENGTH_LIGHT;
    options->override_family = 0;
    options->family = SF_FAMILY_GAUSSIAN;
    options->dof = DistributionFamily::kDefaultDof;
    options->seed = 0;
    options->batch_shared_template = 0;
    options->template_image = nullptr;
}

sf_status sf_pipeline_create(const sf_stats_set* stats, const sf_pipeline_options* options, sf_pipeline** out) {
    return guarded([&] {
        require(options && out, "null argument");
        PipelineConfig cfg;
        cfg.mode = mode_of(options->mode);
        cfg.space_probs = {options->space_probs[0], options->space_probs[1], options->space_probs[2]};
        if (stats) cfg.distributions = stats->set;
        if (options->override_family) cfg.family_override = family_of(options->family, options->dof);
        cfg.seed = options->seed;
        cfg.space = space_of(options->space);
        cfg.batch_shared_template = options->batch_shared_template != 0;
        if (cfg.mode == Mode::SnBaseline && options->template_image)
            cfg.sn_template = channel_stats(to_planes(options->template_image->img, cfg.space));
        if (cfg.mode == Mode::Sa1Baseline || cfg.mode == Mode::Sa2Baseline) {
            require(options->strength == SF_STRENGTH_LIGHT || options->strength == SF_STRENGTH_STRONG,
                    "invalid strength");
            cfg.sa = SaConfig::preset(cfg.mode == Mode::Sa1Baseline ? SaScheme::Sa1 : SaScheme::Sa2, cfg.space,
                                      options->strength == SF_STRENGTH_LIGHT ? SaStrength::Light
                                                                             : SaStrength::Strong);
        }
        *out = new sf_pipeline{Pipeline(std::move(cfg))};
    });
}

void sf_pipeline_free(sf_pipeline* pipeline) { delete pipeline; }

sf_status sf_pipeline_transform(const sf_pipeline* pipeline, const sf_image* image, sf_rng* rng, sf_image** out,
                                double* clamped_fraction) {
    return guarded([&] {
        require(pipeline && image && rng && out, "null argument");
        NormalizeOutcome r = pipeline->pipeline.transform(image->img, rng->rng);
        if (clamped_fraction) *clamped_fraction = r.clamped_fraction;
        *out = new sf_image{std::move(r.image)};
    });
}

sf_status sf_pipeline_transform_item(const sf_pipeline* pipeline, const sf_image* image, uint64_t item_index,
                                     sf_image** out, double* clamped_fraction) {
    return guarded([&] {
        require(pipeline && image && out, "null argument");
        NormalizeOutcome r = pipeline->pipeline.transform_item(image->img, item_index);
        if (clamped_fraction) *clamped_fraction = r.clamped_fraction;
        *out = new sf_image{std::move(r.image)};
    });
}

sf_status sf_pipeline_transform_batch(const sf_pipeline* pipeline, const sf_image* const* images, size_t count,
                                      uint64_t first_index, unsigned workers, sf_image** outputs,
                                      double* clamped_fractions, size_t* failed_index) {
    return guarded([&] {
        require(pipeline && images && outputs, "null argument");
        require(count > 0, "empty batch");
        std::vector<RgbImage> batch;
        batch.reserve(count);
        for (size_t i = 0; i < count; ++i) {
            if (!images[i]) {
                if (failed_index) *failed_index = i;
                throw Error(ErrorCode::InvalidArgument, "item " + std::to_string(i) + ": null image");
            }
            batch.push_back(images[i]->img);
        }
        std::vector<NormalizeOutcome> results;
        try {
            results = pipeline->pipeline.transform_batch(batch, first_index, workers);
        } catch (const BatchItemError& e) {
            if (failed_index) *failed_index = e.index();
            throw;
        }
        std::vector<std::unique_ptr<sf_image>> owned;
        owned.reserve(count);
        for (auto& r : results) owned.push_back(std::make_unique<sf_image>(sf_image{std::move(r.image)}));
        for (size_t i = 0; i < count; ++i) {
            if (clamped_fractions) clamped_fractions[i] = results[i].clamped_fraction;
            outputs[i] = owned[i].release();
        }
    });
}

sf_status sf_transform_buffer(const sf_pipeline* pipeline, const uint8_t* rgb, uint32_t width, uint32_t height,
                              uint64_t item_index, uint8_t* out_rgb, double* clamped_fraction) {
    return guarded([&] {
        require(pipeline && out_rgb, "null argument");
        NormalizeOutcome r = pipeline->pipeline.transform_item(image_from_buffer(rgb, width, height), item_index);
        std::memcpy(out_rgb, r.image.data().data(), r.image.data().size());
        if (clamped_fraction) *clamped_fraction = r.clamped_fraction;
    });
}

} // extern "C"
