#ifndef MVPLC_H
#define MVPLC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MvplcStatus {
  MVPLC_STATUS_OK = 0,
  MVPLC_STATUS_NULL_POINTER = 1,
  MVPLC_STATUS_INVALID_ARGUMENT = 2,
  MVPLC_STATUS_CONFIG = 3,
  MVPLC_STATUS_IO = 4,
  MVPLC_STATUS_LENGTH_MISMATCH = 5,
  MVPLC_STATUS_NUMERIC = 6,
  MVPLC_STATUS_PANIC = 7,
} MvplcStatus;

/**
 * Simulation configuration handle.
 */
typedef struct MvplcSimConfig MvplcSimConfig;

/**
 * Turbo codec handle.
 */
typedef struct MvplcTurboCodec MvplcTurboCodec;

/**
 * Cable constants, same fields and units as the Rust `CableParams`.
 */
typedef struct MvplcCableParams {
  double mu_c;
  double sigma_c;
  double spacing;
  double mu_0;
  double eps_0;
  double radius;
  double tan_delta;
  double coupling;
  double ground_resistance;
} MvplcCableParams;

/**
 * One simulated BER point.
 */
typedef struct MvplcBerRecord {
  double f_low;
  double f_high;
  double snr_db;
  int32_t coded;
  uint64_t bits;
  uint64_t errors;
  double ber;
  double ebn0_db;
} MvplcBerRecord;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message into `buf` (NUL
 * terminated, truncated to fit) and returns the full message length in
 * bytes, excluding the terminator.
 */
size_t mvplc_last_error_message(char *buf, size_t len);

/**
 * Measured MV cable constants with coupling 0.3 and zero ground resistance.
 */
enum MvplcStatus mvplc_cable_params_default(struct MvplcCableParams *out);

/**
 * Writes the row-major 3x3 R, L, C and G matrices at frequency `f` Hz.
 * Each output must hold 9 doubles.
 */
enum MvplcStatus mvplc_rlgc(const struct MvplcCableParams *params,
                            double f,
                            double *r,
                            double *l,
                            double *c,
                            double *g);

/**
 * Evaluates `H_ij(f)` for a multipath profile given as `n_paths` gains and
 * lengths (delays follow from the propagation speed). `re`/`im` receive the
 * row-major matrix, row `i` = transmit phase.
 */
enum MvplcStatus mvplc_transfer_matrix(const struct MvplcCableParams *params,
                                       double f,
                                       const double *gains,
                                       const double *lengths,
                                       size_t n_paths,
                                       double *re,
                                       double *im);

/**
 * Draws `count` complex Class-A samples into `re`/`im`.
 */
enum MvplcStatus mvplc_noise_sample(double impulse_index,
                                    double gamma,
                                    double sigma2,
                                    uint64_t seed,
                                    size_t count,
                                    double *re,
                                    double *im);

/**
 * Reference simulation setup.
 */
enum MvplcStatus mvplc_sim_config_default(struct MvplcSimConfig **out);

/**
 * Parses a config file.
 */
enum MvplcStatus mvplc_sim_config_from_file(const char *path, struct MvplcSimConfig **out);

/**
 * Parses config text.
 */
enum MvplcStatus mvplc_sim_config_parse(const char *text, struct MvplcSimConfig **out);

enum MvplcStatus mvplc_sim_config_set_seed(struct MvplcSimConfig *cfg, uint64_t seed);

enum MvplcStatus mvplc_sim_config_set_bits(struct MvplcSimConfig *cfg,
                                           uint64_t min_bits,
                                           uint64_t max_bits);

/**
 * Releases a config handle. Null is ignored.
 */
void mvplc_sim_config_free(struct MvplcSimConfig *cfg);

/**
 * Simulates one SNR point on the band `[f_low, f_high]` Hz.
 */
enum MvplcStatus mvplc_run_point(const struct MvplcSimConfig *cfg,
                                 double f_low,
                                 double f_high,
                                 double snr_db,
                                 int32_t coded,
                                 struct MvplcBerRecord *out);

/**
 * Runs the configured sweep and writes the CSV table to `path`.
 */
enum MvplcStatus mvplc_sweep_to_csv(const struct MvplcSimConfig *cfg, const char *path);

/**
 * Creates a codec for a PB size in bytes and a rate given as a fraction
 * (1/2, 16/18 or 1/3).
 */
enum MvplcStatus mvplc_turbo_new(size_t pb_bytes,
                                 uint32_t rate_num,
                                 uint32_t rate_den,
                                 struct MvplcTurboCodec **out);

enum MvplcStatus mvplc_turbo_set_iterations(struct MvplcTurboCodec *codec, size_t iterations);

/**
 * Information bits per block, or 0 for a null handle.
 */
size_t mvplc_turbo_info_bits(const struct MvplcTurboCodec *codec);

/**
 * Coded bits per block, or 0 for a null handle.
 */
size_t mvplc_turbo_coded_bits(const struct MvplcTurboCodec *codec);

/**
 * Encodes `n_info` bits (one 0/1 value per byte) into `out`, which must
 * hold exactly the coded length.
 */
enum MvplcStatus mvplc_turbo_encode(const struct MvplcTurboCodec *codec,
                                    const uint8_t *info,
                                    size_t n_info,
                                    uint8_t *out,
                                    size_t n_out);

/**
 * Decodes channel LLRs (`ln P(1)/P(0)`, transmission order) into
 * `n_out` = info-length hard bits.
 */
enum MvplcStatus mvplc_turbo_decode(const struct MvplcTurboCodec *codec,
                                    const double *llrs,
                                    size_t n_llrs,
                                    uint8_t *out,
                                    size_t n_out);

/**
 * Releases a codec handle. Null is ignored.
 */
void mvplc_turbo_free(struct MvplcTurboCodec *codec);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MVPLC_H */
