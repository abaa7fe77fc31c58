#ifndef IPMM_C_H
#define IPMM_C_H

/*
 * C interface to the restoration library.  All functions return an
 * ipmm_status; on any failure the thread-local message from
 * ipmm_last_error() describes what went wrong.  Handles are opaque and owned
 * by the caller, released with the matching _free function.  Pointers
 * returned by accessor functions (strings, image views) borrow from their
 * handle and stay valid until that handle is freed or reused.
 */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ipmm_status {
  IPMM_OK = 0,
  IPMM_ERR_INVALID = 1,  /* bad argument or configuration */
  IPMM_ERR_IO = 2,       /* file could not be read or written */
  IPMM_ERR_NUMERIC = 3,  /* objective or solver failure */
  IPMM_ERR_INTERNAL = 4
} ipmm_status;

typedef struct ipmm_image ipmm_image;       /* 1 (gray) or 3 (RGB) channels */
typedef struct ipmm_config ipmm_config;     /* key=value run configuration */
typedef struct ipmm_solution ipmm_solution; /* restored image plus traces */

/* Last error message of the current thread; never NULL. */
const char* ipmm_last_error(void);

/* ----------------------------------------------------------------- images */

/* Creates an image from a buffer of length rows*cols*channels laid out
 * channel by channel, each channel row-major, values in [0,1]. */
ipmm_status ipmm_image_create(int64_t rows, int64_t cols, int channels,
                              const double* data, ipmm_image** out);
/* Reads a binary PGM (P5) or PPM (P6) file. */
ipmm_status ipmm_image_load(const char* path, ipmm_image** out);
/* Writes PGM for 1-channel images, PPM for 3-channel ones. */
ipmm_status ipmm_image_save(const ipmm_image* img, const char* path);

int64_t ipmm_image_rows(const ipmm_image* img);
int64_t ipmm_image_cols(const ipmm_image* img);
int ipmm_image_channels(const ipmm_image* img);
/* Copies the pixel data out in the layout of ipmm_image_create. */
ipmm_status ipmm_image_read(const ipmm_image* img, double* buffer, size_t buffer_len);
void ipmm_image_free(ipmm_image* img);

/* ------------------------------------------------------------ configuration */

/* A fresh configuration with the task defaults left unresolved. */
ipmm_status ipmm_config_create(ipmm_config** out);
/* Sets one field by name: the CLI flag names (task, in, ref, out, mask,
 * trace, penalty, eps, q, nu, lambda, noise, blur, kernel_size, sigma, rank,
 * seed) or any solver field (varrho, gamma_lo, gamma_hi, mu_bar, alpha0,
 * tau0, rho_tau, eps_star, stall_window, stall_tol, max_outer,
 * max_backtracks, lbfgs_memory, lbfgs_max_iters). */
ipmm_status ipmm_config_set(ipmm_config* cfg, const char* key, const char* value);
/* Applies every pair of a key=value file (later ipmm_config_set calls win). */
ipmm_status ipmm_config_load_file(ipmm_config* cfg, const char* path);
/* The run-level configuration as key=value text (borrowed pointer). */
const char* ipmm_config_text(ipmm_config* cfg);
void ipmm_config_free(ipmm_config* cfg);

/* ---------------------------------------------------------------- pipeline */

/* Builds the observation mask named by the configuration's `mask` field
 * ("block", "block:r1,c1,...", "random:frac", or a bitmap path) as a 0/1
 * image (1 = observed).  Fails if the field is empty. */
ipmm_status ipmm_mask_build(const ipmm_config* cfg, int64_t rows, int64_t cols,
                            ipmm_image** out_mask);

/* Degrades an image per the configuration: blur (deblur task only), impulse
 * noise at the configured level, then zero-fill of masked pixels.  out_mask
 * (optional) receives the mask when one was configured, else NULL;
 * out_corrupted (optional) receives the count of noise-corrupted pixels. */
ipmm_status ipmm_degrade(const ipmm_config* cfg, const ipmm_image* img,
                         ipmm_image** out_degraded, ipmm_image** out_mask,
                         int64_t* out_corrupted);

/* Restores a blurred, impulse-noisy gray image. */
ipmm_status ipmm_deblur(const ipmm_config* cfg, const ipmm_image* observed,
                        ipmm_solution** out);

/* Restores a masked image (gray or color); mask pixels < 0.5 are unobserved. */
ipmm_status ipmm_inpaint(const ipmm_config* cfg, const ipmm_image* observed,
                         const ipmm_image* mask, ipmm_solution** out);

/* ---------------------------------------------------------------- solutions */

/* The restored image (borrowed; freed with the solution). */
const ipmm_image* ipmm_solution_image(const ipmm_solution* sol);
/* Number of independently solved channels (1 gray, 3 color). */
int ipmm_solution_channels(const ipmm_solution* sol);
/* Per-channel iteration trace (borrowed strings). */
const char* ipmm_solution_trace_csv(const ipmm_solution* sol, int channel);
const char* ipmm_solution_trace_json(const ipmm_solution* sol, int channel);
int ipmm_solution_iterations(const ipmm_solution* sol, int channel);
/* 1 when every channel stopped by tolerance, 0 on an iteration cap. */
int ipmm_solution_converged(const ipmm_solution* sol);
/* Effective configuration (run fields plus derived solver settings). */
const char* ipmm_solution_config_text(const ipmm_solution* sol);
void ipmm_solution_free(ipmm_solution* sol);

/* ----------------------------------------------------------------- metrics */

ipmm_status ipmm_psnr(const ipmm_image* img, const ipmm_image* ref, double* out);
ipmm_status ipmm_ssim(const ipmm_image* img, const ipmm_image* ref, double* out);

/* Replays the solver invariants on a JSON trace; IPMM_OK when clean, else
 * IPMM_ERR_NUMERIC with the violations in ipmm_last_error(). */
ipmm_status ipmm_verify_trace_json(const char* json_text);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* IPMM_C_H */
