// Copyright (C) 2026 d2f authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end. Talks to the shared library exclusively through
// the C API in d2f.h.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "d2f.h"

namespace {

[[noreturn]] void die(const char* what, d2f_status status) {
    std::cerr << "error: " << what << ": " << d2f_status_name(status) << " ("
              << d2f_last_error() << ")\n";
    std::exit(2);
}

void check(d2f_status status, const char* what) {
    if (status != D2F_OK) die(what, status);
}

struct ScheduleArgs {
    int32_t steps = 1000;
    double beta_min = 1e-4;
    double beta_max = 0.02;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--schedule-steps", steps, "Diffusion steps T");
        cmd->add_option("--beta-min", beta_min, "Smallest beta");
        cmd->add_option("--beta-max", beta_max, "Largest beta");
    }
    d2f_schedule* create() const {
        d2f_schedule* s = nullptr;
        check(d2f_schedule_create(steps, beta_min, beta_max, &s), "schedule");
        return s;
    }
};

struct DatasetArgs {
    std::string dataset = "two_moons";
    int64_t n = 16384;
    double noise_std = 0.05;
    uint64_t seed = 0;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--dataset", dataset, "two_moons|eight_gaussians|checkerboard");
        cmd->add_option("--data-n", n, "Dataset size");
        cmd->add_option("--noise-std", noise_std, "Dataset jitter");
    }
    d2f_dataset_kind kind() const {
        static const std::map<std::string, d2f_dataset_kind> kinds = {
            {"two_moons", D2F_DATASET_TWO_MOONS},
            {"eight_gaussians", D2F_DATASET_EIGHT_GAUSSIANS},
            {"checkerboard", D2F_DATASET_CHECKERBOARD}};
        auto it = kinds.find(dataset);
        if (it == kinds.end()) {
            std::cerr << "error: unknown dataset '" << dataset << "'\n";
            std::exit(2);
        }
        return it->second;
    }
    std::vector<double> generate(uint64_t data_seed) const {
        std::vector<double> out(static_cast<size_t>(n) * 2);
        check(d2f_dataset_generate(kind(), n, noise_std, data_seed, out.data()),
              "dataset");
        return out;
    }
};

d2f_param_kind parse_param(const std::string& s) {
    static const std::map<std::string, d2f_param_kind> kinds = {
        {"epsilon", D2F_PARAM_EPSILON},
        {"v", D2F_PARAM_V},
        {"x0", D2F_PARAM_X0},
        {"velocity", D2F_PARAM_VELOCITY}};
    auto it = kinds.find(s);
    if (it == kinds.end()) {
        std::cerr << "error: unknown parameterization '" << s << "'\n";
        std::exit(2);
    }
    return it->second;
}

void write_samples_csv(const std::string& path, const std::vector<double>& xs,
                       int64_t n, int dim) {
    std::ofstream os(path);
    if (!os) {
        std::cerr << "error: cannot write " << path << "\n";
        std::exit(2);
    }
    os.precision(17);
    for (int64_t i = 0; i < n; ++i) {
        for (int c = 0; c < dim; ++c) {
            if (c) os << ',';
            os << xs[static_cast<size_t>(i) * dim + c];
        }
        os << '\n';
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"d2f: convert a toy diffusion prior into a flow-matching "
                 "model by trajectory alignment"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Key=value config file; flags override");

    // ---- pretrain ----------------------------------------------------------
    auto* pre = app.add_subcommand("pretrain", "Train a diffusion prior");
    ScheduleArgs pre_sched;
    DatasetArgs pre_data;
    pre_sched.add_to(pre);
    pre_data.add_to(pre);
    std::string pre_param = "v", pre_out, pre_trace;
    d2f_train_config pre_cfg;
    d2f_train_config_default(&pre_cfg);
    int32_t pre_width = 128, pre_depth = 4, pre_embed = 64;
    pre->add_option("--param", pre_param, "Head: epsilon|v|x0");
    pre->add_option("--steps", pre_cfg.steps, "Training steps");
    pre->add_option("--batch", pre_cfg.batch, "Batch size");
    pre->add_option("--lr", pre_cfg.lr, "Learning rate");
    pre->add_flag("--cosine-decay", pre_cfg.cosine_decay, "Cosine lr decay");
    pre->add_option("--seed", pre_cfg.seed, "Seed");
    pre->add_option("--width", pre_width, "Hidden width");
    pre->add_option("--depth", pre_depth, "Hidden layers (max 8)");
    pre->add_option("--embed-dim", pre_embed, "Time embedding size");
    pre->add_option("--trace", pre_trace, "Loss trace output (JSON lines)");
    pre->add_option("--out", pre_out, "Checkpoint output path")->required();

    // ---- finetune ----------------------------------------------------------
    auto* fine = app.add_subcommand("finetune", "Finetune a pretrained prior");
    ScheduleArgs fine_sched;
    DatasetArgs fine_data;
    fine_sched.add_to(fine);
    fine_data.add_to(fine);
    std::string fine_regime = "diff2flow", fine_init, fine_out, fine_trace;
    d2f_train_config fine_cfg;
    d2f_train_config_default(&fine_cfg);
    fine_cfg.steps = 2000;
    fine_cfg.lr = 1e-4;
    bool fine_merge = false;
    fine->add_option("--regime", fine_regime,
                     "diffusion_finetune|naive_fm|diff2flow");
    fine->add_option("--init", fine_init, "Pretrained checkpoint")->required();
    fine->add_option("--steps", fine_cfg.steps, "Training steps");
    fine->add_option("--batch", fine_cfg.batch, "Batch size");
    fine->add_option("--lr", fine_cfg.lr, "Learning rate");
    fine->add_flag("--cosine-decay", fine_cfg.cosine_decay, "Cosine lr decay");
    fine->add_option("--seed", fine_cfg.seed, "Seed");
    fine->add_option("--lora-rank", fine_cfg.lora_rank, "LoRA rank (0: full)");
    fine->add_option("--lora-fraction", fine_cfg.lora_fraction,
                     "LoRA rank fraction of min(out, in)");
    fine->add_flag("--merge-lora", fine_merge, "Merge adapters after training");
    fine->add_flag("--naive-time-unit", fine_cfg.naive_time_unit,
                   "naive_fm: feed raw t instead of t*T");
    fine->add_option("--trace", fine_trace, "Loss trace output (JSON lines)");
    fine->add_option("--out", fine_out, "Checkpoint output path")->required();

    // ---- sample -------------------------------------------------------------
    auto* smp = app.add_subcommand("sample", "Generate samples");
    ScheduleArgs smp_sched;
    smp_sched.add_to(smp);
    std::string smp_model, smp_mode = "diff2flow_euler", smp_out, smp_traj;
    d2f_sample_run smp_run;
    d2f_sample_run_default(&smp_run);
    smp_run.n_samples = 4096;
    smp->add_option("--model", smp_model, "Model checkpoint")->required();
    smp->add_option("--mode", smp_mode, "diff2flow_euler|ddim|ddim_shifted");
    smp->add_option("--nfe", smp_run.n_steps, "Function evaluations");
    smp->add_option("--n", smp_run.n_samples, "Number of samples");
    smp->add_option("--seed", smp_run.seed, "Seed");
    smp->add_option("--shift", smp_run.shift, "Timestep shift (ddim_shifted)");
    smp->add_flag("--naive-time-unit", smp_run.naive_time_unit,
                  "velocity heads: query at raw t instead of t*T");
    smp->add_option("--trajectory", smp_traj, "Directory for per-sample paths");
    smp->add_option("--out", smp_out, "Samples CSV path")->required();

    // ---- reflow ---------------------------------------------------------------
    auto* reflow = app.add_subcommand("reflow", "Trajectory rectification");
    reflow->require_subcommand(1);

    auto* gen = reflow->add_subcommand("gen-pairs", "Generate noise/sample pairs");
    ScheduleArgs gen_sched;
    gen_sched.add_to(gen);
    std::string gen_model, gen_out;
    int64_t gen_pairs = 4096;
    int32_t gen_nfe = 64;
    uint64_t gen_seed = 0;
    gen->add_option("--model", gen_model, "Model checkpoint")->required();
    gen->add_option("--n-pairs", gen_pairs, "Number of couplings");
    gen->add_option("--nfe", gen_nfe, "Sampler steps per pair");
    gen->add_option("--seed", gen_seed, "Seed");
    gen->add_option("--out", gen_out, "Pair file path")->required();

    auto* rtrain = reflow->add_subcommand("train", "Rectify on stored pairs");
    ScheduleArgs rt_sched;
    rt_sched.add_to(rtrain);
    std::string rt_model, rt_pairs, rt_out, rt_trace;
    d2f_train_config rt_cfg;
    d2f_train_config_default(&rt_cfg);
    rt_cfg.regime = D2F_REGIME_DIFF2FLOW;
    rt_cfg.steps = 2000;
    rt_cfg.lr = 1e-4;
    rtrain->add_option("--model", rt_model, "Model checkpoint")->required();
    rtrain->add_option("--pairs", rt_pairs, "Pair file")->required();
    rtrain->add_option("--steps", rt_cfg.steps, "Training steps");
    rtrain->add_option("--batch", rt_cfg.batch, "Batch size");
    rtrain->add_option("--lr", rt_cfg.lr, "Learning rate");
    rtrain->add_option("--seed", rt_cfg.seed, "Seed");
    rtrain->add_option("--lora-rank", rt_cfg.lora_rank,
                       "LoRA rank (0: full; 16 is the toy-scale default)");
    rtrain->add_option("--trace", rt_trace, "Loss trace output (JSON lines)");
    rtrain->add_option("--out", rt_out, "Checkpoint output path")->required();

    // ---- eval ------------------------------------------------------------------
    auto* ev = app.add_subcommand("eval", "Run a paired experiment");
    std::string ev_name, ev_out = "eval_out", ev_dataset, ev_prior, ev_prior_dir;
    d2f_experiment_config ev_cfg;
    d2f_experiment_config_default(&ev_cfg);
    ev->add_option("--experiment", ev_name,
                   "convergence_full|convergence_lora|reflow_fewstep|"
                   "shifted_ddim|terminal_snr")
        ->required();
    ev->add_option("--seed", ev_cfg.base_seed, "Base seed");
    ev->add_option("--n-seeds", ev_cfg.n_seeds, "Seeds in the median");
    ev->add_option("--dataset", ev_dataset, "Dataset override");
    ev->add_option("--noise-std", ev_cfg.noise_std, "Dataset jitter");
    ev->add_option("--schedule-steps", ev_cfg.schedule_steps, "Diffusion steps T");
    ev->add_option("--beta-min", ev_cfg.beta_min, "Smallest beta");
    ev->add_option("--beta-max", ev_cfg.beta_max, "Largest beta");
    ev->add_option("--pretrain-steps", ev_cfg.pretrain_steps, "Prior budget");
    ev->add_option("--steps", ev_cfg.finetune_steps, "Finetune budget");
    ev->add_option("--batch", ev_cfg.batch, "Batch size");
    ev->add_option("--lora-fraction", ev_cfg.lora_fraction, "LoRA fraction");
    ev->add_option("--nfe", ev_cfg.eval_nfe, "Evaluation NFE");
    ev->add_option("--eval-n", ev_cfg.eval_n, "Evaluation sample count");
    ev->add_option("--n-proj", ev_cfg.n_proj, "Sliced-W2 projections");
    ev->add_option("--rectify-steps", ev_cfg.rectify_steps, "Rectification budget");
    ev->add_option("--n-pairs", ev_cfg.n_pairs, "Reflow couplings");
    ev->add_option("--pair-nfe", ev_cfg.pair_nfe, "Pair generation NFE");
    ev->add_option("--shift", ev_cfg.shift, "DDIM probe shift");
    ev->add_option("--ddim-nfe", ev_cfg.ddim_nfe, "DDIM probe NFE");
    ev->add_option("--threads", ev_cfg.threads, "Worker cap (0: D2F_THREADS)");
    ev->add_option("--prior", ev_prior, "Shared prior checkpoint");
    ev->add_option("--prior-dir", ev_prior_dir, "Prior cache directory");
    ev->add_option("--out", ev_out, "Output directory");

    // ---- bridge-table -------------------------------------------------------------
    auto* table = app.add_subcommand("bridge-table",
                                     "Dump (t_dm, t_fm, scale) rows");
    ScheduleArgs tbl_sched;
    tbl_sched.add_to(table);
    double tbl_step = 1.0;
    std::string tbl_out = "-";
    table->add_option("--step", tbl_step, "Time stride");
    table->add_option("--out", tbl_out, "Output path ('-' for stdout)");

    CLI11_PARSE(app, argc, argv);

    if (*pre) {
        d2f_schedule* s = pre_sched.create();
        d2f_model_desc desc;
        d2f_model_desc_default(&desc);
        desc.param = parse_param(pre_param);
        desc.embed_dim = pre_embed;
        desc.n_hidden = pre_depth;
        for (int i = 0; i < pre_depth && i < 8; ++i) desc.hidden[i] = pre_width;
        desc.init_seed = pre_cfg.seed;
        d2f_model* m = nullptr;
        check(d2f_model_create(&desc, &m), "model");
        std::vector<double> data = pre_data.generate(pre_cfg.seed);
        pre_cfg.regime = D2F_REGIME_DIFFUSION_PRETRAIN;
        check(d2f_train(m, s, &pre_cfg, data.data(), pre_data.n,
                        pre_trace.empty() ? nullptr : pre_trace.c_str()),
              "train");
        check(d2f_model_save(m, pre_out.c_str()), "save");
        d2f_model_free(m);
        d2f_schedule_free(s);
        std::cout << "wrote " << pre_out << "\n";
    } else if (*fine) {
        static const std::map<std::string, d2f_regime> regimes = {
            {"diffusion_finetune", D2F_REGIME_DIFFUSION_FINETUNE},
            {"naive_fm", D2F_REGIME_NAIVE_FM},
            {"diff2flow", D2F_REGIME_DIFF2FLOW}};
        auto it = regimes.find(fine_regime);
        if (it == regimes.end()) {
            std::cerr << "error: unknown regime '" << fine_regime << "'\n";
            return 2;
        }
        fine_cfg.regime = it->second;
        d2f_schedule* s = fine_sched.create();
        d2f_model* m = nullptr;
        check(d2f_model_load(fine_init.c_str(), &m), "load");
        std::vector<double> data = fine_data.generate(fine_cfg.seed);
        check(d2f_train(m, s, &fine_cfg, data.data(), fine_data.n,
                        fine_trace.empty() ? nullptr : fine_trace.c_str()),
              "train");
        if (fine_merge) check(d2f_model_merge_lora(m), "merge-lora");
        check(d2f_model_save(m, fine_out.c_str()), "save");
        d2f_model_free(m);
        d2f_schedule_free(s);
        std::cout << "wrote " << fine_out << "\n";
    } else if (*smp) {
        static const std::map<std::string, d2f_sample_mode> modes = {
            {"diff2flow_euler", D2F_SAMPLE_DIFF2FLOW_EULER},
            {"ddim", D2F_SAMPLE_DDIM},
            {"ddim_shifted", D2F_SAMPLE_DDIM_SHIFTED}};
        auto it = modes.find(smp_mode);
        if (it == modes.end()) {
            std::cerr << "error: unknown mode '" << smp_mode << "'\n";
            return 2;
        }
        smp_run.mode = it->second;
        d2f_schedule* s = smp_sched.create();
        d2f_model* m = nullptr;
        check(d2f_model_load(smp_model.c_str(), &m), "load");
        int32_t dim = 0;
        check(d2f_model_data_dim(m, &dim), "model");
        std::vector<double> out(static_cast<size_t>(smp_run.n_samples) * dim);
        check(d2f_sample(m, s, &smp_run, out.data(),
                         smp_traj.empty() ? nullptr : smp_traj.c_str()),
              "sample");
        write_samples_csv(smp_out, out, smp_run.n_samples, dim);
        d2f_model_free(m);
        d2f_schedule_free(s);
        std::cout << "wrote " << smp_out << "\n";
    } else if (*gen) {
        d2f_schedule* s = gen_sched.create();
        d2f_model* m = nullptr;
        check(d2f_model_load(gen_model.c_str(), &m), "load");
        d2f_pairs* p = nullptr;
        check(d2f_reflow_generate_pairs(m, s, gen_pairs, gen_nfe, gen_seed, &p),
              "gen-pairs");
        check(d2f_pairs_save(p, gen_out.c_str()), "save-pairs");
        d2f_pairs_free(p);
        d2f_model_free(m);
        d2f_schedule_free(s);
        std::cout << "wrote " << gen_out << "\n";
    } else if (*rtrain) {
        rt_cfg.regime = D2F_REGIME_DIFF2FLOW;
        d2f_schedule* s = rt_sched.create();
        d2f_model* m = nullptr;
        check(d2f_model_load(rt_model.c_str(), &m), "load");
        d2f_pairs* p = nullptr;
        check(d2f_pairs_load(rt_pairs.c_str(), &p), "load-pairs");
        check(d2f_reflow_rectify(m, s, p, &rt_cfg,
                                 rt_trace.empty() ? nullptr : rt_trace.c_str()),
              "rectify");
        check(d2f_model_save(m, rt_out.c_str()), "save");
        d2f_pairs_free(p);
        d2f_model_free(m);
        d2f_schedule_free(s);
        std::cout << "wrote " << rt_out << "\n";
    } else if (*ev) {
        if (!ev_dataset.empty()) {
            DatasetArgs d;
            d.dataset = ev_dataset;
            ev_cfg.dataset = d.kind();
        }
        if (!ev_prior.empty()) ev_cfg.prior_checkpoint = ev_prior.c_str();
        if (!ev_prior_dir.empty()) ev_cfg.prior_dir = ev_prior_dir.c_str();
        int32_t passed = 0;
        check(d2f_experiment_run(ev_name.c_str(), &ev_cfg, ev_out.c_str(),
                                 &passed),
              "experiment");
        return passed ? 0 : 1;
    } else if (*table) {
        d2f_schedule* s = tbl_sched.create();
        check(d2f_bridge_table(s, tbl_step, tbl_out.c_str()), "bridge-table");
        d2f_schedule_free(s);
    }
    return 0;
}
