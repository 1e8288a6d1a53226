#ifndef MOLSPS_H
#define MOLSPS_H

/* C interface to the molecular single-photon source toolkit.
 *
 * Objects are opaque handles created by msps_* calls and released with the
 * matching *_free function. Every fallible call returns an msps_status; on
 * failure msps_last_error() describes the problem (per thread). */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(MOLSPS_BUILDING)
#define MSPS_API __declspec(dllexport)
#else
#define MSPS_API __declspec(dllimport)
#endif
#else
#define MSPS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum msps_status {
  MSPS_OK = 0,
  MSPS_ERR_CONFIG = 1,
  MSPS_ERR_PHYSICS = 2,
  MSPS_ERR_IO = 3,
  MSPS_ERR_CONVERGENCE = 4,
  MSPS_ERR_INPUT = 5,
  MSPS_ERR_INTERNAL = 6
} msps_status;

typedef enum msps_split { MSPS_SPLIT_SINGLE = 0, MSPS_SPLIT_HBT = 1 } msps_split;
typedef enum msps_tag_format { MSPS_FORMAT_PTAG = 0, MSPS_FORMAT_CSV = 1 } msps_tag_format;
typedef enum msps_dimension {
  MSPS_DIM_TIME = 0,
  MSPS_DIM_FREQUENCY,
  MSPS_DIM_RATE,
  MSPS_DIM_LENGTH,
  MSPS_DIM_VOLTAGE,
  MSPS_DIM_DIMENSIONLESS
} msps_dimension;

typedef struct msps_config msps_config;
typedef struct msps_photons msps_photons;
typedef struct msps_tags msps_tags;
typedef struct msps_histogram msps_histogram;
typedef struct msps_spectrum msps_spectrum;
typedef struct msps_stark_map msps_stark_map;
typedef struct msps_image msps_image;

MSPS_API const char* msps_version(void);
/* Message of the last failed call on this thread; "" after a success. */
MSPS_API const char* msps_last_error(void);

/* ---- configuration ---- */

MSPS_API msps_status msps_config_load(const char* path, msps_config** out);
MSPS_API msps_status msps_config_parse(const char* text, size_t length, msps_config** out);
MSPS_API void msps_config_free(msps_config* cfg);
MSPS_API size_t msps_config_scene_count(const msps_config* cfg);
/* Label of a microscope; "" for the primary one. */
MSPS_API const char* msps_config_scene_label(const msps_config* cfg, size_t scene);
/* Molecules of a scene in ascending id order. */
MSPS_API size_t msps_config_molecule_count(const msps_config* cfg, size_t scene);
MSPS_API int msps_config_molecule_id(const msps_config* cfg, size_t scene, size_t index);
MSPS_API msps_status msps_config_set_voltage(msps_config* cfg, size_t scene, double volts);
MSPS_API msps_status msps_config_pulse_period(const msps_config* cfg, double* seconds);
/* 0 for cw, 1 for pulsed. */
MSPS_API int msps_config_is_pulsed(const msps_config* cfg);
/* First 16 hex digits of SHA-256 over the scene and laser (17 bytes with NUL). */
MSPS_API msps_status msps_config_scene_digest(const msps_config* cfg, size_t scene, char out[17]);

/* Reads "250 ps", "1e-9", "42V"... in SI base units of `dim`. */
MSPS_API msps_status msps_parse_quantity(const char* text, msps_dimension dim, double* out);

/* ---- emission and detection ---- */

/* Independent sub-seed number `stream` of a master seed (splitmix64). */
MSPS_API uint64_t msps_derive_seed(uint64_t seed, uint64_t stream);

typedef struct msps_photon {
  double emit_time;
  double frequency;
  double excite_time;
  int32_t source_id; /* -1 for background */
  int32_t zero_phonon; /* 1 for the 0-0 line */
} msps_photon;

MSPS_API msps_status msps_simulate(const msps_config* cfg, size_t scene, double duration, uint64_t seed,
                                   msps_photons** out);
MSPS_API void msps_photons_free(msps_photons* photons);
MSPS_API size_t msps_photons_count(const msps_photons* photons);
MSPS_API msps_status msps_photons_get(const msps_photons* photons, size_t index, msps_photon* out);
MSPS_API msps_status msps_photons_write_truth(const msps_photons* photons, const char* path);

MSPS_API msps_status msps_detect(const msps_config* cfg, const msps_photons* photons, msps_split split,
                                 double duration, uint64_t seed, msps_tags** out);
/* `duration` <= 0 keeps the file's own (CSV: one tick past the last tag). */
MSPS_API msps_status msps_tags_read(const char* path, double duration, msps_tags** out);
MSPS_API msps_status msps_tags_write(const msps_tags* tags, const char* path, msps_tag_format format);
MSPS_API void msps_tags_free(msps_tags* tags);
MSPS_API double msps_tags_duration(const msps_tags* tags);
MSPS_API uint64_t msps_tags_resolution_ps(const msps_tags* tags);
MSPS_API size_t msps_tags_channel_count(const msps_tags* tags);
/* Borrowed view, valid until the handle is freed. Missing channel: n = 0. */
MSPS_API msps_status msps_tags_channel(const msps_tags* tags, int channel, const uint64_t** data, size_t* n);

/* ---- correlation ---- */

typedef struct msps_histogram_info {
  double bin_width;
  double max_lag;
  double rate_a;
  double rate_b;
  double duration;
  int normalized;
} msps_histogram_info;

typedef struct msps_antibunching {
  double g2_zero;
  double decay_time; /* NaN when not identified */
  double plateau;
  double residual_norm;
  int decay_identified;
} msps_antibunching;

typedef struct msps_pulsed_ratio {
  double ratio;
  double central_area;
  double mean_side_area;
  int side_peaks;
} msps_pulsed_ratio;

MSPS_API msps_status msps_correlate(const msps_tags* tags, int channel_a, int channel_b, double bin_width,
                                    double max_lag, msps_histogram** out);
MSPS_API msps_status msps_histogram_normalize(const msps_histogram* raw, msps_histogram** out);
MSPS_API void msps_histogram_free(msps_histogram* h);
MSPS_API msps_status msps_histogram_info_get(const msps_histogram* h, msps_histogram_info* out);
MSPS_API msps_status msps_histogram_bins(const msps_histogram* h, const double** bins, size_t* n);
/* CSV "lag_s,value". */
MSPS_API msps_status msps_histogram_write_csv(const msps_histogram* h, const char* path);
MSPS_API msps_status msps_fit_antibunching(const msps_histogram* normalized, msps_antibunching* out);
MSPS_API msps_status msps_pulsed_peak_ratio(const msps_histogram* raw, double period, double window,
                                           msps_pulsed_ratio* out);

/* ---- two-photon interference ---- */

typedef struct msps_hom_settings {
  uint64_t n_pulses;
  uint64_t seed;
  int force_simultaneous;
} msps_hom_settings;

typedef struct msps_hom_result {
  uint64_t n_pulses;
  uint64_t both_emitted;
  uint64_t singles;
  uint64_t coincidences;
  double p_estimate;
  double p_error;
  double voltage;
} msps_hom_result;

/* Overlap of two lifetime-limited wavepackets with rates `gamma_a`, `gamma_b`
 * (s^-1), carrier difference `detuning` (Hz) and start times `ta`, `tb`. */
MSPS_API msps_status msps_wavepacket_overlap(double gamma_a, double gamma_b, double detuning, double ta,
                                             double tb, double* out);
/* Scene `b` is driven at `voltage_b`. */
MSPS_API msps_status msps_hom(const msps_config* cfg, size_t scene_a, size_t scene_b, double voltage_b,
                              const msps_hom_settings* settings, msps_hom_result* out);

/* ---- spectroscopy ---- */

typedef struct msps_line {
  double wavelength_nm;
  double weight;
  int zero_phonon;
} msps_line;

typedef struct msps_stark_row {
  double voltage;
  double separation;
  double fwhm;
  int maxima;
  int indistinguishable;
} msps_stark_row;

typedef struct msps_image_info {
  int nx;
  int ny;
  double pixel_pitch_um;
  double origin_x_um;
  double origin_y_um;
} msps_image_info;

typedef struct msps_peak_fit {
  double center;
  double fwhm;
  double amplitude;
  double offset;
  double residual_norm;
} msps_peak_fit;

MSPS_API msps_status msps_excitation_spectrum(const msps_config* cfg, size_t scene, msps_spectrum** out);
MSPS_API msps_status msps_emission_spectrum(const msps_config* cfg, size_t scene, int molecule_id,
                                            msps_spectrum** out);
MSPS_API void msps_spectrum_free(msps_spectrum* s);
MSPS_API msps_status msps_spectrum_data(const msps_spectrum* s, const double** axis, const double** values,
                                        size_t* n);
/* Discrete lines of an emission spectrum (none for excitation spectra). */
MSPS_API size_t msps_spectrum_line_count(const msps_spectrum* s);
MSPS_API msps_status msps_spectrum_line(const msps_spectrum* s, size_t index, msps_line* out);
MSPS_API msps_status msps_spectrum_fit_lorentzian(const msps_spectrum* s, msps_peak_fit* out);
MSPS_API msps_status msps_spectrum_write_csv(const msps_spectrum* s, const char* path);

MSPS_API msps_status msps_stark_scan(const msps_config* cfg, size_t scene_a, size_t scene_b,
                                     const double* voltages, size_t n, msps_stark_map** out);
MSPS_API void msps_stark_map_free(msps_stark_map* map);
MSPS_API size_t msps_stark_map_rows(const msps_stark_map* map);
MSPS_API msps_status msps_stark_map_row(const msps_stark_map* map, size_t index, msps_stark_row* out);
MSPS_API msps_status msps_stark_map_write_csv(const msps_stark_map* map, const char* path);

/* `noisy` = 0 gives the noiseless expectation image. */
MSPS_API msps_status msps_confocal_scan(const msps_config* cfg, size_t scene, int noisy, uint64_t seed,
                                        msps_image** out);
MSPS_API void msps_image_free(msps_image* img);
MSPS_API msps_status msps_image_info_get(const msps_image* img, msps_image_info* out);
MSPS_API msps_status msps_image_values(const msps_image* img, const double** values, size_t* n);
MSPS_API msps_status msps_image_fit_cross_section(const msps_image* img, msps_peak_fit* out);
/* `scale` receives the factor applied to fit 16-bit PGM (may be NULL). */
MSPS_API msps_status msps_image_write_pgm(const msps_image* img, const char* path, double* scale);

/* ---- closed-form photophysics ---- */

typedef struct msps_budget_entry {
  int molecule_id;
  double pump_rate;
  double excited_population;
  double detected_rate;
} msps_budget_entry;

MSPS_API double msps_natural_linewidth(double t1);
MSPS_API double msps_diffraction_fwhm(double wavelength_nm, double na);
MSPS_API double msps_stark_calibrate(double separation_hz, double merge_voltage, double gap_m);
/* Fills up to `capacity` entries, one per molecule; `count` gets the total. */
MSPS_API msps_status msps_rate_budget(const msps_config* cfg, size_t scene, msps_budget_entry* entries,
                                      size_t capacity, size_t* count);

/* ---- files ---- */

MSPS_API msps_status msps_write_file_atomic(const char* path, const void* data, size_t length);
/* Lower-case hex SHA-256 of a file (65 bytes with NUL). */
MSPS_API msps_status msps_file_sha256(const char* path, char out[65]);

#ifdef __cplusplus
}
#endif

#endif
