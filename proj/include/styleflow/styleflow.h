/*
 * styleflow C API.
 *
 * Every handle is opaque and owned by the caller once returned; release it
 * with the matching *_destroy function (NULL is accepted there). Functions
 * returning sf_status leave a thread-local message retrievable through
 * sf_last_error() whenever they fail.
 */
#ifndef STYLEFLOW_H
#define STYLEFLOW_H

#include <stddef.h>

#if defined(_WIN32)
#  if defined(STYLEFLOW_BUILDING)
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
  SF_ERR_INVALID_ARGUMENT = 1, /* null handle / pointer, index out of range */
  SF_ERR_DIMENSION = 2,
  SF_ERR_PARAMETER = 3,
  SF_ERR_HOOK_CONTRACT = 4,
  SF_ERR_CAPTURE_CONFLICT = 5,
  SF_ERR_INJECTION_MISS = 6,
  SF_ERR_PARSE = 7,
  SF_ERR_FORMAT = 8,
  SF_ERR_IO = 9,
  SF_ERR_INTERNAL = 10
} sf_status;

typedef struct sf_image sf_image;
typedef struct sf_config sf_config;
typedef struct sf_report sf_report;
typedef struct sf_ablation sf_ablation;

/* Optional externally computed FID / LPIPS feeding the ArtFID column. */
typedef struct sf_externals {
  int has_fid;
  double fid;
  int has_lpips;
  double lpips;
} sf_externals;

SF_API const char* sf_version(void);
SF_API const char* sf_status_string(sf_status status);
SF_API const char* sf_last_error(void);

/* Images: 3 x height x width, planar, values in [0, 1]. */
SF_API sf_status sf_image_load(const char* path, sf_image** out);
SF_API sf_status sf_image_create(int width, int height, const double* planar, sf_image** out);
SF_API sf_status sf_image_save(const sf_image* image, const char* path);
SF_API int sf_image_width(const sf_image* image);
SF_API int sf_image_height(const sf_image* image);
/* Copies 3*width*height values; count must be at least that. */
SF_API sf_status sf_image_copy_pixels(const sf_image* image, double* out, size_t count);
SF_API void sf_image_destroy(sf_image* image);

/* Configuration as key=value pairs (keys documented in README). */
SF_API sf_status sf_config_create(sf_config** out);
SF_API sf_status sf_config_set(sf_config* config, const char* key, const char* value);
SF_API sf_status sf_config_load_file(sf_config* config, const char* path);
SF_API sf_status sf_config_validate(const sf_config* config);
SF_API void sf_config_destroy(sf_config* config);

/* Single transfer. */
SF_API sf_status sf_transfer(const sf_image* content, const sf_image* style,
                             const sf_config* config, sf_report** out);
SF_API sf_status sf_report_stylized(const sf_report* report, sf_image** out);
SF_API sf_status sf_report_roundtrip_rms(const sf_report* report, double* out);
SF_API sf_status sf_report_snapshot_count(const sf_report* report, size_t* out);
/* Writes a one-row metrics CSV; externals may be NULL. */
SF_API sf_status sf_report_write_metrics(const sf_report* report, const sf_image* style,
                                         const char* label, const sf_externals* externals,
                                         const char* csv_path);
SF_API void sf_report_destroy(sf_report* report);

/* Ablation suite: full, -SG-SA, -SPI, -CA-AdaIN, -DF-CA. */
SF_API sf_status sf_ablate(const sf_image* content, const sf_image* style,
                           const sf_config* config, sf_ablation** out);
SF_API int sf_ablation_count(const sf_ablation* ablation);
SF_API const char* sf_ablation_label(const sf_ablation* ablation, int index);
SF_API sf_status sf_ablation_stylized(const sf_ablation* ablation, int index, sf_image** out);
SF_API sf_status sf_ablation_write_metrics(const sf_ablation* ablation, const sf_image* style,
                                           const sf_externals* externals,
                                           const char* csv_path);
SF_API void sf_ablation_destroy(sf_ablation* ablation);

/* Parameter sweep written straight to CSV. values may be NULL for the axis
 * defaults; axis is one of "alpha", "spi_n", "blocks", "guidance". */
SF_API sf_status sf_sweep(const sf_image* content, const sf_image* style,
                          const sf_config* config, const char* axis, const char* values,
                          const sf_externals* externals, const char* csv_path);

SF_API sf_status sf_artfid(double fid, double lpips, double* out);

typedef void (*sf_selftest_callback)(const char* name, int passed, const char* detail,
                                     void* user);
/* Runs the built-in oracle checks; failures receives the failing count. */
SF_API sf_status sf_selftest(sf_selftest_callback callback, void* user, int* failures);

#ifdef __cplusplus
}
#endif

#endif /* STYLEFLOW_H */
