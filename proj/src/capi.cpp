// Copyright (C) 2026 d2f authors
// SPDX-License-Identifier: Apache-2.0
//

#include "d2f.h"

#include <cstring>
#include <filesystem>
#include <iostream>
#include <new>
#include <optional>
#include <stdexcept>
#include <string>

#include "d2f/bridge.hpp"
#include "d2f/data.hpp"
#include "d2f/experiments.hpp"
#include "d2f/io.hpp"
#include "d2f/metrics.hpp"
#include "d2f/net.hpp"
#include "d2f/reflow.hpp"
#include "d2f/sample.hpp"
#include "d2f/train.hpp"

struct d2f_schedule {
    d2f::TrajectoryBridge bridge;
};

struct d2f_model {
    d2f::ToyModel model;
};

struct d2f_pairs {
    d2f::PairSet pairs;
};

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& msg) { g_last_error = msg; }

/// Runs fn, translating exceptions into status codes.
template <typename Fn>
d2f_status guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const std::out_of_range& e) {
        set_error(e.what());
        return D2F_ERR_OUT_OF_RANGE;
    } catch (const std::invalid_argument& e) {
        set_error(e.what());
        return D2F_ERR_INVALID_ARGUMENT;
    } catch (const std::logic_error& e) {
        set_error(e.what());
        return D2F_ERR_STATE;
    } catch (const std::runtime_error& e) {
        set_error(e.what());
        return D2F_ERR_IO;
    } catch (const std::bad_alloc&) {
        set_error("out of memory");
        return D2F_ERR_INTERNAL;
    } catch (const std::exception& e) {
        set_error(e.what());
        return D2F_ERR_INTERNAL;
    }
}

d2f_status require(bool ok, const char* msg) {
    if (ok) return D2F_OK;
    set_error(msg);
    return D2F_ERR_INVALID_ARGUMENT;
}

d2f::Mat wrap_rows(const double* data, std::int64_t n, size_t dim) {
    d2f::Mat m(n, static_cast<Eigen::Index>(dim));
    for (std::int64_t i = 0; i < n; ++i)
        for (size_t c = 0; c < dim; ++c)
            m(i, static_cast<Eigen::Index>(c)) = data[static_cast<size_t>(i) * dim + c];
    return m;
}

void unwrap_rows(const d2f::Mat& m, double* out) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            out[static_cast<size_t>(i) * static_cast<size_t>(m.cols()) +
                static_cast<size_t>(c)] = m(i, c);
}

d2f::TrainConfig to_train_config(const d2f_train_config& c) {
    d2f::TrainConfig tc;
    tc.regime = static_cast<d2f::Regime>(c.regime);
    tc.steps = c.steps;
    tc.batch = c.batch;
    tc.lr = c.lr;
    tc.lr_schedule = c.cosine_decay ? d2f::LrSchedule::cosine_decay
                                    : d2f::LrSchedule::constant;
    tc.seed = c.seed;
    if (c.lora_rank > 0 || c.lora_fraction > 0.0)
        tc.lora = d2f::LoraSpec{c.lora_rank, c.lora_fraction};
    tc.log_every = c.log_every;
    tc.naive_time_mode = c.naive_time_unit ? d2f::NaiveTimeMode::unit
                                           : d2f::NaiveTimeMode::scaled;
    return tc;
}

}  // namespace

extern "C" {

const char* d2f_last_error(void) { return g_last_error.c_str(); }

const char* d2f_status_name(d2f_status status) {
    switch (status) {
        case D2F_OK: return "ok";
        case D2F_ERR_INVALID_ARGUMENT: return "invalid argument";
        case D2F_ERR_OUT_OF_RANGE: return "out of range";
        case D2F_ERR_STATE: return "invalid state";
        case D2F_ERR_IO: return "io error";
        case D2F_ERR_INTERNAL: return "internal error";
    }
    return "unknown";
}

// --- schedule & bridge ------------------------------------------------------

d2f_status d2f_schedule_create(int32_t steps, double beta_min, double beta_max,
                               d2f_schedule** out) {
    if (auto st = require(out != nullptr, "null output handle")) return st;
    return guarded([&] {
        auto s = d2f::NoiseSchedule::linear_vp(steps, beta_min, beta_max);
        *out = new d2f_schedule{d2f::TrajectoryBridge(std::move(s))};
        return D2F_OK;
    });
}

void d2f_schedule_free(d2f_schedule* s) { delete s; }

d2f_status d2f_schedule_steps(const d2f_schedule* s, int32_t* out) {
    if (auto st = require(s && out, "null argument")) return st;
    *out = s->bridge.schedule().steps();
    return D2F_OK;
}

d2f_status d2f_schedule_coeffs_at(const d2f_schedule* s, double t_dm,
                                  double* alpha, double* sigma) {
    if (auto st = require(s && alpha && sigma, "null argument")) return st;
    return guarded([&] {
        auto [a, sg] = s->bridge.schedule().coeffs_at(d2f::DmTime{t_dm});
        *alpha = a;
        *sigma = sg;
        return D2F_OK;
    });
}

d2f_status d2f_schedule_snr_at(const d2f_schedule* s, double t_dm, double* snr) {
    if (auto st = require(s && snr, "null argument")) return st;
    return guarded([&] {
        *snr = s->bridge.schedule().snr_at(d2f::DmTime{t_dm});
        return D2F_OK;
    });
}

d2f_status d2f_bridge_t_dm_to_fm(const d2f_schedule* s, double t_dm,
                                 double* t_fm) {
    if (auto st = require(s && t_fm, "null argument")) return st;
    return guarded([&] {
        *t_fm = s->bridge.t_dm_to_fm(d2f::DmTime{t_dm}).value;
        return D2F_OK;
    });
}

d2f_status d2f_bridge_t_fm_to_dm(const d2f_schedule* s, double t_fm,
                                 double* t_dm) {
    if (auto st = require(s && t_dm, "null argument")) return st;
    return guarded([&] {
        *t_dm = s->bridge.t_fm_to_dm(d2f::FmTime{t_fm}).value;
        return D2F_OK;
    });
}

d2f_status d2f_bridge_x_dm_to_fm(const d2f_schedule* s, const double* x,
                                 size_t dim, double t_dm, double* out) {
    if (auto st = require(s && x && out && dim > 0, "null argument")) return st;
    return guarded([&] {
        d2f::Vec v = Eigen::Map<const d2f::Vec>(x, static_cast<Eigen::Index>(dim));
        d2f::Vec r = s->bridge.x_dm_to_fm(v, d2f::DmTime{t_dm});
        Eigen::Map<d2f::Vec>(out, r.size()) = r;
        return D2F_OK;
    });
}

d2f_status d2f_bridge_x_fm_to_dm(const d2f_schedule* s, const double* x,
                                 size_t dim, double t_fm, double* out,
                                 double* out_t_dm) {
    if (auto st = require(s && x && out && out_t_dm && dim > 0, "null argument"))
        return st;
    return guarded([&] {
        d2f::Vec v = Eigen::Map<const d2f::Vec>(x, static_cast<Eigen::Index>(dim));
        auto [r, t] = s->bridge.x_fm_to_dm(v, d2f::FmTime{t_fm});
        Eigen::Map<d2f::Vec>(out, r.size()) = r;
        *out_t_dm = t.value;
        return D2F_OK;
    });
}

d2f_status d2f_bridge_table(const d2f_schedule* s, double step, const char* path) {
    if (auto st = require(s != nullptr, "null schedule")) return st;
    return guarded([&] {
        if (!path || std::strcmp(path, "-") == 0)
            d2f::write_bridge_table(std::cout, s->bridge, step);
        else
            d2f::write_bridge_table(std::string(path), s->bridge, step);
        return D2F_OK;
    });
}

// --- model --------------------------------------------------------------------

void d2f_model_desc_default(d2f_model_desc* desc) {
    if (!desc) return;
    *desc = d2f_model_desc{};
    desc->data_dim = 2;
    desc->embed_dim = 64;
    desc->n_hidden = 4;
    for (int i = 0; i < 4; ++i) desc->hidden[i] = 128;
    desc->param = D2F_PARAM_V;
    desc->max_period = 1e4;
    desc->init_seed = 0;
}

d2f_status d2f_model_create(const d2f_model_desc* desc, d2f_model** out) {
    if (auto st = require(desc && out, "null argument")) return st;
    if (auto st = require(desc->n_hidden >= 1 && desc->n_hidden <= 8,
                          "n_hidden must be in [1, 8]"))
        return st;
    return guarded([&] {
        std::vector<int> hidden(desc->hidden, desc->hidden + desc->n_hidden);
        *out = new d2f_model{d2f::ToyModel(
            desc->data_dim, hidden, desc->embed_dim,
            static_cast<d2f::Parameterization>(desc->param), desc->init_seed,
            desc->max_period)};
        return D2F_OK;
    });
}

void d2f_model_free(d2f_model* m) { delete m; }

d2f_status d2f_model_save(const d2f_model* m, const char* path) {
    if (auto st = require(m && path, "null argument")) return st;
    return guarded([&] {
        m->model.save(path);
        return D2F_OK;
    });
}

d2f_status d2f_model_load(const char* path, d2f_model** out) {
    if (auto st = require(path && out, "null argument")) return st;
    return guarded([&] {
        *out = new d2f_model{d2f::ToyModel::load(path)};
        return D2F_OK;
    });
}

d2f_status d2f_model_param_kind(const d2f_model* m, d2f_param_kind* out) {
    if (auto st = require(m && out, "null argument")) return st;
    *out = static_cast<d2f_param_kind>(m->model.param());
    return D2F_OK;
}

d2f_status d2f_model_data_dim(const d2f_model* m, int32_t* out) {
    if (auto st = require(m && out, "null argument")) return st;
    *out = m->model.data_dim();
    return D2F_OK;
}

d2f_status d2f_model_param_counts(const d2f_model* m, uint64_t* total,
                                  uint64_t* trainable) {
    if (auto st = require(m && total && trainable, "null argument")) return st;
    *total = m->model.param_count();
    *trainable = m->model.trainable_count();
    return D2F_OK;
}

d2f_status d2f_model_forward(const d2f_model* m, const double* x, size_t dim,
                             double t, double* out) {
    if (auto st = require(m && x && out, "null argument")) return st;
    return guarded([&] {
        d2f::Vec v = Eigen::Map<const d2f::Vec>(x, static_cast<Eigen::Index>(dim));
        d2f::Vec r = m->model.forward(v, t);
        Eigen::Map<d2f::Vec>(out, r.size()) = r;
        return D2F_OK;
    });
}

d2f_status d2f_model_attach_lora(d2f_model* m, int32_t rank, double fraction,
                                 uint64_t seed) {
    if (auto st = require(m != nullptr, "null model")) return st;
    return guarded([&] {
        d2f::Rng rng(seed, 0x6c6f7261u);
        if (rank > 0)
            m->model.attach_lora(rank, rng);
        else
            m->model.attach_lora_fraction(fraction, rng);
        return D2F_OK;
    });
}

d2f_status d2f_model_merge_lora(d2f_model* m) {
    if (auto st = require(m != nullptr, "null model")) return st;
    return guarded([&] {
        m->model.merge_lora();
        return D2F_OK;
    });
}

// --- data & metrics -------------------------------------------------------------

d2f_status d2f_dataset_generate(d2f_dataset_kind kind, int64_t n,
                                double noise_std, uint64_t seed, double* out) {
    if (auto st = require(out != nullptr, "null output")) return st;
    return guarded([&] {
        d2f::ToyDatasetSpec spec;
        spec.kind = static_cast<d2f::DatasetKind>(kind);
        spec.n = static_cast<int>(n);
        spec.noise_std = noise_std;
        spec.seed = seed;
        unwrap_rows(d2f::make_dataset(spec), out);
        return D2F_OK;
    });
}

d2f_status d2f_sliced_w2(const double* a, int64_t na, const double* b,
                         int64_t nb, size_t dim, int32_t n_proj, uint64_t seed,
                         double* out) {
    if (auto st = require(a && b && out, "null argument")) return st;
    return guarded([&] {
        *out = d2f::sliced_w2(wrap_rows(a, na, dim), wrap_rows(b, nb, dim),
                              n_proj, seed);
        return D2F_OK;
    });
}

d2f_status d2f_mmd_rbf(const double* a, int64_t na, const double* b, int64_t nb,
                       size_t dim, double bandwidth, double* out) {
    if (auto st = require(a && b && out, "null argument")) return st;
    return guarded([&] {
        *out = d2f::mmd_rbf(wrap_rows(a, na, dim), wrap_rows(b, nb, dim),
                            bandwidth);
        return D2F_OK;
    });
}

d2f_status d2f_median_bandwidth(const double* a, int64_t n, size_t dim,
                                double* out) {
    if (auto st = require(a && out, "null argument")) return st;
    return guarded([&] {
        *out = d2f::median_bandwidth(wrap_rows(a, n, dim));
        return D2F_OK;
    });
}

// --- training ----------------------------------------------------------------------

void d2f_train_config_default(d2f_train_config* cfg) {
    if (!cfg) return;
    *cfg = d2f_train_config{};
    cfg->regime = D2F_REGIME_DIFFUSION_PRETRAIN;
    cfg->steps = 20000;
    cfg->batch = 256;
    cfg->lr = 1e-3;
    cfg->log_every = 50;
}

d2f_status d2f_train(d2f_model* m, const d2f_schedule* s,
                     const d2f_train_config* cfg, const double* data, int64_t n,
                     const char* trace_path) {
    if (auto st = require(m && s && cfg && data && n > 0, "null argument"))
        return st;
    return guarded([&] {
        d2f::Mat d = wrap_rows(data, n, static_cast<size_t>(m->model.data_dim()));
        auto [model, trace] =
            d2f::run_training(to_train_config(*cfg), d, s->bridge,
                              std::move(m->model));
        m->model = std::move(model);
        if (trace_path) trace.save_jsonl(trace_path);
        return D2F_OK;
    });
}

// --- sampling ------------------------------------------------------------------------

void d2f_sample_run_default(d2f_sample_run* run) {
    if (!run) return;
    *run = d2f_sample_run{};
    run->mode = D2F_SAMPLE_DIFF2FLOW_EULER;
    run->n_steps = 32;
    run->n_samples = 1;
}

d2f_status d2f_sample(const d2f_model* m, const d2f_schedule* s,
                      const d2f_sample_run* run, double* out,
                      const char* trajectory_dir) {
    if (auto st = require(m && s && run && out, "null argument")) return st;
    return guarded([&] {
        d2f::SampleRun r;
        r.mode = static_cast<d2f::SampleMode>(run->mode);
        r.n_steps = run->n_steps;
        r.n_samples = run->n_samples;
        r.seed = run->seed;
        r.shift = run->shift;
        r.naive_time_mode = run->naive_time_unit ? d2f::NaiveTimeMode::unit
                                                 : d2f::NaiveTimeMode::scaled;
        r.record_trajectory = trajectory_dir != nullptr;
        d2f::SampleResult res =
            r.mode == d2f::SampleMode::diff2flow_euler
                ? d2f::sample_diff2flow(m->model, s->bridge, r)
                : d2f::sample_ddim(m->model, s->bridge, r);
        unwrap_rows(res.samples, out);
        if (trajectory_dir) {
            std::filesystem::create_directories(trajectory_dir);
            for (size_t i = 0; i < res.trajectories.size(); ++i)
                d2f::write_trajectory_csv(
                    (std::filesystem::path(trajectory_dir) /
                     ("trajectory_" + std::to_string(i) + ".csv"))
                        .string(),
                    res.trajectories[i]);
        }
        return D2F_OK;
    });
}

d2f_status d2f_straightness(const d2f_model* m, const d2f_schedule* s,
                            int32_t n_probe, int32_t n_t, uint64_t seed,
                            double* out) {
    if (auto st = require(m && s && out, "null argument")) return st;
    return guarded([&] {
        d2f::Rng rng(seed);
        *out = d2f::straightness(m->model, s->bridge, n_probe, n_t, rng);
        return D2F_OK;
    });
}

// --- reflow ----------------------------------------------------------------------------

d2f_status d2f_reflow_generate_pairs(const d2f_model* m, const d2f_schedule* s,
                                     int64_t n_pairs, int32_t n_steps,
                                     uint64_t seed, d2f_pairs** out) {
    if (auto st = require(m && s && out, "null argument")) return st;
    return guarded([&] {
        *out = new d2f_pairs{d2f::generate_pairs(
            m->model, s->bridge, static_cast<int>(n_pairs), n_steps, seed)};
        return D2F_OK;
    });
}

void d2f_pairs_free(d2f_pairs* p) { delete p; }

d2f_status d2f_pairs_save(const d2f_pairs* p, const char* path) {
    if (auto st = require(p && path, "null argument")) return st;
    return guarded([&] {
        d2f::save_pairs(p->pairs, path);
        return D2F_OK;
    });
}

d2f_status d2f_pairs_load(const char* path, d2f_pairs** out) {
    if (auto st = require(path && out, "null argument")) return st;
    return guarded([&] {
        *out = new d2f_pairs{d2f::load_pairs(path)};
        return D2F_OK;
    });
}

d2f_status d2f_pairs_count(const d2f_pairs* p, int64_t* out) {
    if (auto st = require(p && out, "null argument")) return st;
    *out = static_cast<int64_t>(p->pairs.count());
    return D2F_OK;
}

d2f_status d2f_pairs_dim(const d2f_pairs* p, int32_t* out) {
    if (auto st = require(p && out, "null argument")) return st;
    *out = p->pairs.dim();
    return D2F_OK;
}

d2f_status d2f_reflow_rectify(d2f_model* m, const d2f_schedule* s,
                              const d2f_pairs* pairs,
                              const d2f_train_config* cfg,
                              const char* trace_path) {
    if (auto st = require(m && s && pairs && cfg, "null argument")) return st;
    return guarded([&] {
        auto [model, trace] = d2f::rectify(m->model, pairs->pairs,
                                           to_train_config(*cfg), s->bridge);
        m->model = std::move(model);
        if (trace_path) trace.save_jsonl(trace_path);
        return D2F_OK;
    });
}

// --- experiments --------------------------------------------------------------------------

void d2f_experiment_config_default(d2f_experiment_config* cfg) {
    if (!cfg) return;
    *cfg = d2f_experiment_config{};
    d2f::ExperimentConfig d;
    cfg->base_seed = d.base_seed;
    cfg->n_seeds = d.n_seeds;
    cfg->dataset = -1;
    cfg->noise_std = d.noise_std;
    cfg->schedule_steps = d.schedule_steps;
    cfg->beta_min = d.beta_min;
    cfg->beta_max = d.beta_max;
    cfg->pretrain_steps = d.pretrain_steps;
    cfg->finetune_steps = d.finetune_steps;
    cfg->batch = d.batch;
    cfg->pretrain_lr = d.pretrain_lr;
    cfg->finetune_lr = d.finetune_lr;
    cfg->lora_fraction = d.lora_fraction;
    cfg->eval_nfe = d.eval_nfe;
    cfg->eval_n = d.eval_n;
    cfg->n_proj = d.n_proj;
    cfg->rectify_steps = d.rectify_steps;
    cfg->n_pairs = d.n_pairs;
    cfg->pair_nfe = d.pair_nfe;
    cfg->shift = d.shift;
    cfg->ddim_nfe = d.ddim_nfe;
    cfg->threads = d.threads;
    cfg->prior_checkpoint = nullptr;
    cfg->prior_dir = nullptr;
}

d2f_status d2f_experiment_run(const char* name,
                              const d2f_experiment_config* cfg,
                              const char* out_dir, int32_t* passed) {
    if (auto st = require(name && cfg && out_dir && passed, "null argument"))
        return st;
    auto parsed = d2f::parse_experiment_name(name);
    if (auto st = require(parsed.has_value(), "unknown experiment name"))
        return st;
    return guarded([&] {
        d2f::ExperimentConfig c;
        c.base_seed = cfg->base_seed;
        c.n_seeds = cfg->n_seeds;
        if (cfg->dataset >= 0)
            c.dataset = static_cast<d2f::DatasetKind>(cfg->dataset);
        c.noise_std = cfg->noise_std;
        c.schedule_steps = cfg->schedule_steps;
        c.beta_min = cfg->beta_min;
        c.beta_max = cfg->beta_max;
        c.pretrain_steps = cfg->pretrain_steps;
        c.finetune_steps = cfg->finetune_steps;
        c.batch = cfg->batch;
        c.pretrain_lr = cfg->pretrain_lr;
        c.finetune_lr = cfg->finetune_lr;
        c.lora_fraction = cfg->lora_fraction;
        c.eval_nfe = cfg->eval_nfe;
        c.eval_n = cfg->eval_n;
        c.n_proj = cfg->n_proj;
        c.rectify_steps = cfg->rectify_steps;
        c.n_pairs = cfg->n_pairs;
        c.pair_nfe = cfg->pair_nfe;
        c.shift = cfg->shift;
        c.ddim_nfe = cfg->ddim_nfe;
        c.threads = cfg->threads;
        if (cfg->prior_checkpoint) c.prior_checkpoint = cfg->prior_checkpoint;
        if (cfg->prior_dir) c.prior_dir = cfg->prior_dir;
        d2f::ExperimentResult r = d2f::run_experiment(*parsed, c, out_dir);
        *passed = r.pass ? 1 : 0;
        std::cout << r.summary_text;
        return D2F_OK;
    });
}

}  // extern "C"
