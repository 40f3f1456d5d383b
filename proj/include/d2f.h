/* Copyright (C) 2026 d2f authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * C API of the d2f shared library: diffusion-to-flow-matching trajectory
 * alignment, toy training/sampling, rectification, and the paired-experiment
 * harness. Handles are opaque; every function returns a d2f_status and
 * leaves a human-readable message in d2f_last_error() on failure.
 */

#ifndef D2F_H
#define D2F_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define D2F_API __declspec(dllexport)
#else
#define D2F_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum d2f_status {
    D2F_OK = 0,
    D2F_ERR_INVALID_ARGUMENT = 1,
    D2F_ERR_OUT_OF_RANGE = 2,
    D2F_ERR_STATE = 3,
    D2F_ERR_IO = 4,
    D2F_ERR_INTERNAL = 5,
} d2f_status;

typedef enum d2f_param_kind {
    D2F_PARAM_EPSILON = 0,
    D2F_PARAM_V = 1,
    D2F_PARAM_X0 = 2,
    D2F_PARAM_VELOCITY = 3,
} d2f_param_kind;

typedef enum d2f_regime {
    D2F_REGIME_DIFFUSION_PRETRAIN = 0,
    D2F_REGIME_DIFFUSION_FINETUNE = 1,
    D2F_REGIME_NAIVE_FM = 2,
    D2F_REGIME_DIFF2FLOW = 3,
} d2f_regime;

typedef enum d2f_sample_mode {
    D2F_SAMPLE_DIFF2FLOW_EULER = 0,
    D2F_SAMPLE_DDIM = 1,
    D2F_SAMPLE_DDIM_SHIFTED = 2,
} d2f_sample_mode;

typedef enum d2f_dataset_kind {
    D2F_DATASET_TWO_MOONS = 0,
    D2F_DATASET_EIGHT_GAUSSIANS = 1,
    D2F_DATASET_CHECKERBOARD = 2,
} d2f_dataset_kind;

typedef struct d2f_schedule d2f_schedule; /* noise schedule + bridge */
typedef struct d2f_model d2f_model;
typedef struct d2f_pairs d2f_pairs;

/* Message for the most recent failure on this thread. */
D2F_API const char* d2f_last_error(void);
D2F_API const char* d2f_status_name(d2f_status status);

/* --- schedule & bridge -------------------------------------------------- */

D2F_API d2f_status d2f_schedule_create(int32_t steps, double beta_min,
                                       double beta_max, d2f_schedule** out);
D2F_API void d2f_schedule_free(d2f_schedule* s);
D2F_API d2f_status d2f_schedule_steps(const d2f_schedule* s, int32_t* out);
D2F_API d2f_status d2f_schedule_coeffs_at(const d2f_schedule* s, double t_dm,
                                          double* alpha, double* sigma);
D2F_API d2f_status d2f_schedule_snr_at(const d2f_schedule* s, double t_dm,
                                       double* snr);

D2F_API d2f_status d2f_bridge_t_dm_to_fm(const d2f_schedule* s, double t_dm,
                                         double* t_fm);
D2F_API d2f_status d2f_bridge_t_fm_to_dm(const d2f_schedule* s, double t_fm,
                                         double* t_dm);
D2F_API d2f_status d2f_bridge_x_dm_to_fm(const d2f_schedule* s, const double* x,
                                         size_t dim, double t_dm, double* out);
D2F_API d2f_status d2f_bridge_x_fm_to_dm(const d2f_schedule* s, const double* x,
                                         size_t dim, double t_fm, double* out,
                                         double* out_t_dm);
/* CSV table of (t_dm, t_fm, scale) rows at the given stride; path NULL or
 * "-" writes to stdout. */
D2F_API d2f_status d2f_bridge_table(const d2f_schedule* s, double step,
                                    const char* path);

/* --- model ---------------------------------------------------------------- */

typedef struct d2f_model_desc {
    int32_t data_dim;        /* default 2 */
    int32_t embed_dim;       /* default 64, even */
    int32_t hidden[8];       /* widths; zero-terminated when fewer than 8 */
    int32_t n_hidden;        /* default 4 x 128 */
    d2f_param_kind param;    /* default D2F_PARAM_V */
    double max_period;       /* default 10000 */
    uint64_t init_seed;
} d2f_model_desc;

D2F_API void d2f_model_desc_default(d2f_model_desc* desc);
D2F_API d2f_status d2f_model_create(const d2f_model_desc* desc, d2f_model** out);
D2F_API void d2f_model_free(d2f_model* m);
D2F_API d2f_status d2f_model_save(const d2f_model* m, const char* path);
D2F_API d2f_status d2f_model_load(const char* path, d2f_model** out);
D2F_API d2f_status d2f_model_param_kind(const d2f_model* m, d2f_param_kind* out);
D2F_API d2f_status d2f_model_data_dim(const d2f_model* m, int32_t* out);
D2F_API d2f_status d2f_model_param_counts(const d2f_model* m, uint64_t* total,
                                          uint64_t* trainable);
D2F_API d2f_status d2f_model_forward(const d2f_model* m, const double* x,
                                     size_t dim, double t, double* out);
D2F_API d2f_status d2f_model_attach_lora(d2f_model* m, int32_t rank,
                                         double fraction, uint64_t seed);
D2F_API d2f_status d2f_model_merge_lora(d2f_model* m);

/* --- data & metrics --------------------------------------------------------- */

D2F_API d2f_status d2f_dataset_generate(d2f_dataset_kind kind, int64_t n,
                                        double noise_std, uint64_t seed,
                                        double* out /* n x 2, row-major */);
D2F_API d2f_status d2f_sliced_w2(const double* a, int64_t na, const double* b,
                                 int64_t nb, size_t dim, int32_t n_proj,
                                 uint64_t seed, double* out);
D2F_API d2f_status d2f_mmd_rbf(const double* a, int64_t na, const double* b,
                               int64_t nb, size_t dim, double bandwidth,
                               double* out);
D2F_API d2f_status d2f_median_bandwidth(const double* a, int64_t n, size_t dim,
                                        double* out);

/* --- training ----------------------------------------------------------------- */

typedef struct d2f_train_config {
    d2f_regime regime;
    int64_t steps;
    int32_t batch;
    double lr;
    int32_t cosine_decay;     /* 0: constant lr */
    uint64_t seed;
    int32_t lora_rank;        /* > 0 attaches adapters of this rank */
    double lora_fraction;     /* > 0 (and rank == 0): per-layer rank fraction */
    int32_t log_every;
    int32_t naive_time_unit;  /* 0: feed t*T to the naive baseline; 1: raw t */
} d2f_train_config;

D2F_API void d2f_train_config_default(d2f_train_config* cfg);

/* Trains in place on (data: n x data_dim row-major); optionally writes the
 * loss trace as JSON lines. */
D2F_API d2f_status d2f_train(d2f_model* m, const d2f_schedule* s,
                             const d2f_train_config* cfg, const double* data,
                             int64_t n, const char* trace_path);

/* --- sampling -------------------------------------------------------------------- */

typedef struct d2f_sample_run {
    d2f_sample_mode mode;
    int32_t n_steps;
    int32_t n_samples;
    uint64_t seed;
    double shift;             /* ddim_shifted only, in [0, 1) */
    int32_t naive_time_unit;  /* velocity heads: 0 feeds t*T, 1 raw t */
} d2f_sample_run;

D2F_API void d2f_sample_run_default(d2f_sample_run* run);

/* out: n_samples x data_dim row-major. trajectory_dir, when non-NULL, gets
 * one (t, x...) CSV per sample. */
D2F_API d2f_status d2f_sample(const d2f_model* m, const d2f_schedule* s,
                              const d2f_sample_run* run, double* out,
                              const char* trajectory_dir);

D2F_API d2f_status d2f_straightness(const d2f_model* m, const d2f_schedule* s,
                                    int32_t n_probe, int32_t n_t, uint64_t seed,
                                    double* out);

/* --- reflow ----------------------------------------------------------------------- */

D2F_API d2f_status d2f_reflow_generate_pairs(const d2f_model* m,
                                             const d2f_schedule* s,
                                             int64_t n_pairs, int32_t n_steps,
                                             uint64_t seed, d2f_pairs** out);
D2F_API void d2f_pairs_free(d2f_pairs* p);
D2F_API d2f_status d2f_pairs_save(const d2f_pairs* p, const char* path);
D2F_API d2f_status d2f_pairs_load(const char* path, d2f_pairs** out);
D2F_API d2f_status d2f_pairs_count(const d2f_pairs* p, int64_t* out);
D2F_API d2f_status d2f_pairs_dim(const d2f_pairs* p, int32_t* out);

/* Rectification: the diff2flow loop over stored couplings, in place. */
D2F_API d2f_status d2f_reflow_rectify(d2f_model* m, const d2f_schedule* s,
                                      const d2f_pairs* pairs,
                                      const d2f_train_config* cfg,
                                      const char* trace_path);

/* --- experiments -------------------------------------------------------------------- */

typedef struct d2f_experiment_config {
    uint64_t base_seed;
    int32_t n_seeds;
    int32_t dataset;          /* d2f_dataset_kind, or -1 for the default */
    double noise_std;
    int32_t schedule_steps;
    double beta_min, beta_max;
    int64_t pretrain_steps;
    int64_t finetune_steps;
    int32_t batch;
    double pretrain_lr, finetune_lr;
    double lora_fraction;
    int32_t eval_nfe, eval_n, n_proj;
    int64_t rectify_steps;
    int32_t n_pairs, pair_nfe;
    double shift;
    int32_t ddim_nfe;
    int32_t threads;          /* 0: D2F_THREADS env or hardware count */
    const char* prior_checkpoint; /* optional shared prior */
    const char* prior_dir;        /* optional prior cache directory */
} d2f_experiment_config;

D2F_API void d2f_experiment_config_default(d2f_experiment_config* cfg);

/* names: convergence_full, convergence_lora, reflow_fewstep, shifted_ddim,
 * terminal_snr. *passed reflects the experiment's acceptance threshold. */
D2F_API d2f_status d2f_experiment_run(const char* name,
                                      const d2f_experiment_config* cfg,
                                      const char* out_dir, int32_t* passed);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* D2F_H */
