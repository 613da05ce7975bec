/*
 * SPDX-License-Identifier: Apache-2.0
 * Copyright Contributors to the stainforge Project.
 *
 * C interface of libstainforge.
 *
 * All objects are opaque handles created by sf_*_create / sf_*_load style
 * functions and released with the matching sf_*_free. Every fallible call
 * returns an sf_status; on failure a human-readable message for the calling
 * thread is available from sf_last_error() until the next failing call on
 * that thread.
 *
 * Handles are not internally synchronized, except that a fully constructed
 * sf_pipeline or sf_stats_set may be used for read-only operations from any
 * number of threads at once.
 */

#ifndef STAINFORGE_H
#define STAINFORGE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(STAINFORGE_BUILDING_LIBRARY)
#    define SF_API __declspec(dllexport)
#  else
#    define SF_API __declspec(dllimport)
#  endif
#else
#  define SF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sf_status {
    SF_OK = 0,
    SF_ERR_INVALID_ARGUMENT = 1,
    SF_ERR_MIXED_COLOR_SPACE = 2,
    SF_ERR_INSUFFICIENT_SAMPLES = 3,
    SF_ERR_EMPTY_CORPUS = 4,
    SF_ERR_MISSING_DISTRIBUTION = 5,
    SF_ERR_IO = 6,
    SF_ERR_DECODE = 7,
    SF_ERR_PARSE = 8,
    SF_ERR_VERSION_MISMATCH = 9,
    SF_ERR_SINK_WRITE = 10,
    SF_ERR_INTERNAL = 99
} sf_status;

typedef enum sf_space { SF_SPACE_LAB = 0, SF_SPACE_HSV = 1, SF_SPACE_HED = 2 } sf_space;

typedef enum sf_family {
    SF_FAMILY_GAUSSIAN = 0,
    SF_FAMILY_STUDENT_T = 1,
    SF_FAMILY_UNIFORM = 2,
    SF_FAMILY_LAPLACE = 3
} sf_family;

typedef enum sf_mode {
    SF_MODE_RANDSTAINNA = 0,
    SF_MODE_FIXED_SPACE = 1,
    SF_MODE_SN = 2,
    SF_MODE_SA1 = 3,
    SF_MODE_SA2 = 4,
    SF_MODE_PASSTHROUGH = 5
} sf_mode;

typedef enum sf_strength { SF_STRENGTH_LIGHT = 0, SF_STRENGTH_STRONG = 1 } sf_strength;

typedef struct sf_image sf_image;
typedef struct sf_path_list sf_path_list;
typedef struct sf_fitter sf_fitter;
typedef struct sf_stats_set sf_stats_set;
typedef struct sf_rng sf_rng;
typedef struct sf_pipeline sf_pipeline;

typedef struct sf_distribution_info {
    sf_space space;
    sf_family family;
    double dof;
    uint64_t n_samples;
    double avg_mean[3];
    double avg_var[3];
    double std_mean[3];
    double std_var[3];
} sf_distribution_info;

typedef struct sf_pipeline_options {
    sf_mode mode;
    double space_probs[3];          /* RANDSTAINNA; indexed by sf_space */
    sf_space space;                 /* FIXED_SPACE, SN, SA1, SA2 */
    sf_strength strength;           /* SA1, SA2 */
    int override_family;            /* nonzero: sample with `family` instead of the fitted one */
    sf_family family;
    double dof;
    uint64_t seed;
    int batch_shared_template;      /* nonzero: one template per transform_batch call */
    const sf_image* template_image; /* SN: measure this image instead of the mean template */
} sf_pipeline_options;

/* ---- library ---------------------------------------------------------- */

SF_API const char* sf_version(void);
SF_API const char* sf_last_error(void);
SF_API const char* sf_status_name(sf_status status);

SF_API const char* sf_space_name(sf_space space);
SF_API sf_status sf_space_from_name(const char* name, sf_space* out);
SF_API const char* sf_family_name(sf_family family);
SF_API sf_status sf_family_from_name(const char* name, sf_family* out);
SF_API const char* sf_mode_name(sf_mode mode);
SF_API sf_status sf_mode_from_name(const char* name, sf_mode* out);

/* ---- images ----------------------------------------------------------- */

/* Copies width*height*3 bytes of interleaved RGB. */
SF_API sf_status sf_image_create(uint32_t width, uint32_t height, const uint8_t* rgb, sf_image** out);
SF_API sf_status sf_image_load(const char* path, sf_image** out);
SF_API sf_status sf_image_save_png(const sf_image* image, const char* path);
SF_API uint32_t sf_image_width(const sf_image* image);
SF_API uint32_t sf_image_height(const sf_image* image);
SF_API const uint8_t* sf_image_data(const sf_image* image);
SF_API void sf_image_free(sf_image* image);

/* Per-channel mean and population std of the image in `space`. */
SF_API sf_status sf_image_channel_stats(const sf_image* image, sf_space space, double avg[3], double std_out[3]);

/* ---- corpus ----------------------------------------------------------- */

/* Image files below `root`, recursively, sorted by path. */
SF_API sf_status sf_corpus_scan(const char* root, sf_path_list** out);
/* Per-class sample (class = parent directory name), input order preserved. */
SF_API sf_status sf_corpus_subsample(const sf_path_list* paths, size_t per_class, uint64_t seed, sf_path_list** out);
SF_API size_t sf_path_list_size(const sf_path_list* list);
SF_API const char* sf_path_list_get(const sf_path_list* list, size_t index);
SF_API void sf_path_list_free(sf_path_list* list);

/* ---- fitting ---------------------------------------------------------- */

SF_API sf_status sf_fitter_create(sf_space space, sf_family family, double dof, sf_fitter** out);
SF_API sf_status sf_fitter_add_image(sf_fitter* fitter, const sf_image* image);
SF_API sf_status sf_fitter_add_stats(sf_fitter* fitter, const double avg[3], const double std_in[3]);
SF_API uint64_t sf_fitter_count(const sf_fitter* fitter);
SF_API void sf_fitter_free(sf_fitter* fitter);

SF_API sf_status sf_stats_set_create(sf_stats_set** out);
/* Finishes the fitter's estimate and stores it, replacing any previous fit for that space. */
SF_API sf_status sf_stats_set_add_fit(sf_stats_set* set, const sf_fitter* fitter);
SF_API sf_status sf_stats_set_load(const char* path, sf_stats_set** out);
SF_API sf_status sf_stats_set_parse(const char* text, size_t length, sf_stats_set** out);
SF_API sf_status sf_stats_set_save(const sf_stats_set* set, const char* path);
/* Returns a heap string owned by the caller; release with sf_string_free. */
SF_API sf_status sf_stats_set_serialize(const sf_stats_set* set, char** out_text);
SF_API int sf_stats_set_has(const sf_stats_set* set, sf_space space);
SF_API sf_status sf_stats_set_get(const sf_stats_set* set, sf_space space, sf_distribution_info* out);
SF_API void sf_stats_set_free(sf_stats_set* set);
SF_API void sf_string_free(char* text);

/* Fit from borrowed row-major RGB buffers, one fit per requested space. */
SF_API sf_status sf_fit_from_buffers(const uint8_t* const* pixels, const uint32_t* widths,
                                     const uint32_t* heights, size_t count, const sf_space* spaces,
                                     size_t n_spaces, sf_family family, double dof, sf_stats_set** out);

/* Writes the style CSV (path,space,a1..a3,d1..d3) for every decodable image in
 * `paths`; `out_path` NULL writes to standard output. Undecodable images are
 * skipped and counted. */
SF_API sf_status sf_export_style_csv(const sf_path_list* paths, sf_space space, const char* out_path,
                                     size_t* rows_written, size_t* skipped);

/* ---- randomness ------------------------------------------------------- */

SF_API sf_status sf_rng_create(uint64_t seed, sf_rng** out);
/* Generator for item `index` of a run seeded with `seed`. */
SF_API sf_status sf_rng_derive(uint64_t seed, uint64_t index, sf_rng** out);
SF_API void sf_rng_free(sf_rng* rng);

/* ---- pipeline --------------------------------------------------------- */

/* Defaults: RANDSTAINNA, uniform 1/3 probabilities, LAB, light, seed 0. */
SF_API void sf_pipeline_options_init(sf_pipeline_options* options);
/* `stats` may be NULL for modes that do not need fitted distributions. The
 * pipeline copies what it needs; `stats` and `template_image` may be freed
 * afterwards. */
SF_API sf_status sf_pipeline_create(const sf_stats_set* stats, const sf_pipeline_options* options,
                                    sf_pipeline** out);
SF_API void sf_pipeline_free(sf_pipeline* pipeline);

/* Draws from `rng`; consecutive calls with the same generator produce fresh templates. */
SF_API sf_status sf_pipeline_transform(const sf_pipeline* pipeline, const sf_image* image, sf_rng* rng,
                                       sf_image** out, double* clamped_fraction);
/* Uses the generator derived from (options.seed, item_index). */
SF_API sf_status sf_pipeline_transform_item(const sf_pipeline* pipeline, const sf_image* image,
                                            uint64_t item_index, sf_image** out, double* clamped_fraction);
/* Item i uses item index first_index + i. Output is independent of `workers`.
 * On failure no outputs are returned and *failed_index (if non-NULL) names the
 * first failing item. */
SF_API sf_status sf_pipeline_transform_batch(const sf_pipeline* pipeline, const sf_image* const* images,
                                             size_t count, uint64_t first_index, unsigned workers,
                                             sf_image** outputs, double* clamped_fractions,
                                             size_t* failed_index);
/* Borrowed-buffer variant of sf_pipeline_transform_item; writes width*height*3 bytes to `out_rgb`. */
SF_API sf_status sf_transform_buffer(const sf_pipeline* pipeline, const uint8_t* rgb, uint32_t width,
                                     uint32_t height, uint64_t item_index, uint8_t* out_rgb,
                                     double* clamped_fraction);

#ifdef __cplusplus
}
#endif

#endif /* STAINFORGE_H */
