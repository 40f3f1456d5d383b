// Copyright (C) 2026 d2f authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "d2f/convert.hpp"
#include "d2f/data.hpp"
#include "d2f/types.hpp"

namespace d2f {

enum class ExperimentName {
    convergence_full,
    convergence_lora,
    reflow_fewstep,
    shifted_ddim,
    terminal_snr,
};

const char* to_string(ExperimentName name);
std::optional<ExperimentName> parse_experiment_name(std::string_view s);

/// Budgets and knobs of the paired-experiment harness. Defaults reproduce
/// the full desk-scale runs; the acceptance suite dials budgets down within
/// its stated runtimes.
struct ExperimentConfig {
    std::uint64_t base_seed = 0;
    int n_seeds = 3;

    std::optional<DatasetKind> dataset;  // unset: per-experiment default
    double noise_std = 0.05;
    int train_n = 16384;

    int schedule_steps = 1000;
    double beta_min = 1e-4;
    double beta_max = 0.02;

    std::vector<int> hidden = {128, 128, 128, 128};
    int embed_dim = 64;
    Parameterization prior_param = Parameterization::v;

    std::int64_t pretrain_steps = 20000;
    std::int64_t finetune_steps = 2000;
    int batch = 256;
    double pretrain_lr = 1e-3;
    double finetune_lr = 1e-4;
    double lora_fraction = 0.2;

    int eval_nfe = 32;
    int eval_n = 4096;
    int n_proj = 128;
    int log_every = 50;
    int eval_every = 200;

    int n_pairs = 4096;
    int pair_nfe = 64;
    std::int64_t rectify_steps = 2000;

    double shift = 0.5;
    int ddim_nfe = 32;

    /// Report the high-N mode-consistency ratio in convergence_full
    /// (costs an extra high-resolution sampling pass per seed).
    bool mode_consistency = true;

    /// Load this checkpoint as the prior for every seed instead of
    /// pretraining. Empty: pretrain on demand, cached in prior_dir.
    std::string prior_checkpoint;
    /// Where on-demand priors are cached; empty: the experiment out_dir.
    std::string prior_dir;

    /// Worker cap for per-seed parallelism; 0 reads D2F_THREADS, falling
    /// back to the hardware count.
    int threads = 0;
};

struct ExperimentResult {
    bool pass = false;
    std::string summary_text;
};

/// Run the named paired experiment across seeds, writing per-seed traces and
/// reports under out_dir plus summary.txt / summary.jsonl. The result's pass
/// flag reflects the experiment's acceptance threshold.
ExperimentResult run_experiment(ExperimentName name, const ExperimentConfig& cfg,
                                const std::string& out_dir);

/// Effective worker count (threads field, D2F_THREADS, hardware).
int resolve_threads(int requested);

}  // namespace d2f
