// Copyright (C) 2026 d2f authors
// SPDX-License-Identifier: Apache-2.0
//

#include "d2f/reflow.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <stdexcept>

namespace d2f {

PairSet generate_pairs(const ToyModel& m, const TrajectoryBridge& bridge,
                       int n_pairs, int n_steps, std::uint64_t seed) {
    if (n_pairs < 0) throw std::invalid_argument("reflow: n_pairs must be >= 0");
    PairSet pairs;
    pairs.gen_steps = n_steps;
    pairs.seed = seed;
    if (n_pairs == 0) {
        pairs.x0.resize(0, m.data_dim());
        pairs.x1.resize(0, m.data_dim());
        return pairs;
    }
    SampleRun run;
    run.mode = SampleMode::diff2flow_euler;
    run.n_steps = n_steps;
    run.n_samples = n_pairs;
    run.seed = seed;
    run.record_trajectory = true;
    SampleResult res = sample_diff2flow(m, bridge, run);
    pairs.x1 = std::move(res.samples);
    pairs.x0.resize(n_pairs, m.data_dim());
    for (int i = 0; i < n_pairs; ++i)
        pairs.x0.row(i) = res.trajectories[static_cast<size_t>(i)].states.row(0);
    return pairs;
}

namespace {

void put_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v),
                          static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    return static_cast<std::uint32_t>(b[0]) |
           (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) |
           (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_f64(std::ostream& os, double v) {
    std::uint64_t u;
    std::memcpy(&u, &v, 8);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(u >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 8);
}

double get_f64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t u = 0;
    for (int i = 0; i < 8; ++i) u |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    double v;
    std::memcpy(&v, &u, 8);
    return v;
}

constexpr char kMagic[4] = {'D', '2', 'F', 'P'};

}  // namespace

void save_pairs(const PairSet& pairs, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("reflow: cannot write pair file: " + path);
    os.write(kMagic, 4);
    put_u32(os, static_cast<std::uint32_t>(pairs.count()));
    put_u32(os, static_cast<std::uint32_t>(pairs.dim()));
    put_u32(os, static_cast<std::uint32_t>(pairs.seed));
    put_u32(os, static_cast<std::uint32_t>(pairs.seed >> 32));
    put_u32(os, static_cast<std::uint32_t>(pairs.gen_steps));
    for (Eigen::Index i = 0; i < pairs.count(); ++i) {
        for (int c = 0; c < pairs.dim(); ++c) put_f64(os, pairs.x0(i, c));
        for (int c = 0; c < pairs.dim(); ++c) put_f64(os, pairs.x1(i, c));
    }
    if (!os) throw std::runtime_error("reflow: pair file write failed: " + path);
}

PairSet load_pairs(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("reflow: cannot open pair file: " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("reflow: not a d2f pair file: " + path);
    std::uint32_t count = get_u32(is);
    std::uint32_t dim = get_u32(is);
    std::uint64_t seed_lo = get_u32(is);
    std::uint64_t seed_hi = get_u32(is);
    std::uint32_t gen_steps = get_u32(is);
    PairSet pairs;
    pairs.seed = seed_lo | (seed_hi << 32);
    pairs.gen_steps = static_cast<int>(gen_steps);
    pairs.x0.resize(count, dim);
    pairs.x1.resize(count, dim);
    for (std::uint32_t i = 0; i < count; ++i) {
        for (std::uint32_t c = 0; c < dim; ++c) pairs.x0(i, c) = get_f64(is);
        for (std::uint32_t c = 0; c < dim; ++c) pairs.x1(i, c) = get_f64(is);
    }
    if (!is) throw std::runtime_error("reflow: truncated pair file: " + path);
    return pairs;
}

std::pair<ToyModel, MetricTrace> rectify(const ToyModel& m, const PairSet& pairs,
                                         const TrainConfig& cfg,
                                         const TrajectoryBridge& bridge,
                                         const EvalFn& eval) {
    if (pairs.count() == 0)
        throw std::invalid_argument("reflow: rectify needs a non-empty pair set");
    if (cfg.steps < 0 || cfg.batch < 1)
        throw std::invalid_argument("reflow: steps/batch must be positive");
    ToyModel model = m;
    MetricTrace trace;
    if (cfg.steps == 0) return {std::move(model), std::move(trace)};
    if (cfg.lora) {
        Rng lora_rng(cfg.seed, /*stream=*/0x6c6f7261u);
        if (cfg.lora->rank > 0)
            model.attach_lora(cfg.lora->rank, lora_rng);
        else
            model.attach_lora_fraction(cfg.lora->fraction, lora_rng);
    }

    AdamState adam(model, cfg.lr);
    auto start = std::chrono::steady_clock::now();
    for (std::int64_t step = 0; step < cfg.steps; ++step) {
        Rng rng(cfg.seed, /*stream=*/0x72656374u + static_cast<std::uint64_t>(step));
        Mat x1(cfg.batch, pairs.dim()), x0(cfg.batch, pairs.dim());
        for (int i = 0; i < cfg.batch; ++i) {
            auto idx = static_cast<Eigen::Index>(
                rng.below(static_cast<std::uint64_t>(pairs.count())));
            x1.row(i) = pairs.x1.row(idx);
            x0.row(i) = pairs.x0.row(idx);
        }
        Vec t(cfg.batch);
        for (int i = 0; i < cfg.batch; ++i) t[i] = rng.uniform();

        auto [loss, grads] = diff2flow_loss_on(model, x1, x0, t, bridge);
        double lr_scale = 1.0;
        if (cfg.lr_schedule == LrSchedule::cosine_decay)
            lr_scale = 0.5 * (1.0 + std::cos(std::numbers::pi *
                                             static_cast<double>(step) /
                                             static_cast<double>(cfg.steps)));
        adam.apply(model, grads, lr_scale);

        std::int64_t iter = step + 1;
        if ((cfg.log_every > 0 && iter % cfg.log_every == 0) || iter == cfg.steps) {
            TracePoint p;
            p.iter = iter;
            p.loss = loss;
            if (eval && cfg.eval_every > 0 &&
                (iter % cfg.eval_every == 0 || iter == cfg.steps))
                p.eval = eval(model);
            p.wall_ms = std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - start)
                            .count();
            trace.points.push_back(std::move(p));
        }
    }
    return {std::move(model), std::move(trace)};
}

}  // namespace d2f
