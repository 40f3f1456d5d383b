// Copyright (C) 2026 d2f authors
// SPDX-License-Identifier: Apache-2.0
//

#include "d2f/sample.hpp"

#include <cmath>
#include <stdexcept>

namespace d2f {

namespace {

Mat draw_noise(int n, int dim, std::uint64_t seed) {
    Rng rng(seed, /*stream=*/0x73616d70u);  // "samp"
    Mat x(n, dim);
    for (int i = 0; i < n; ++i)
        for (int c = 0; c < dim; ++c) x(i, c) = rng.normal();
    return x;
}

/// Velocity field queried at one shared FM time for a whole batch.
Mat velocity_at(const ToyModel& m, const TrajectoryBridge& bridge,
                const Mat& x_fm, double t_fm, NaiveTimeMode naive_mode) {
    const auto n = x_fm.rows();
    if (m.param() == Parameterization::velocity) {
        double t_scale = naive_mode == NaiveTimeMode::scaled
                             ? static_cast<double>(bridge.schedule().steps())
                             : 1.0;
        Vec times = Vec::Constant(n, t_fm * t_scale);
        return m.forward(x_fm, times);
    }
    DmTime t_dm = bridge.t_fm_to_dm(FmTime{t_fm});
    double scale = bridge.scale_at(t_dm);
    auto [alpha, sigma] = bridge.schedule().coeffs_at(t_dm);
    Mat x_dm = scale * x_fm;
    Vec times = Vec::Constant(n, t_dm.value);
    Mat pred = m.forward(x_dm, times);
    ConversionCoeffs c = conversion_coeffs(alpha, sigma, m.param());
    return c.c_pred * pred + c.c_state * x_dm;
}

}  // namespace

SampleResult sample_diff2flow(const ToyModel& m, const TrajectoryBridge& bridge,
                              const SampleRun& run) {
    if (run.n_steps < 1 || run.n_samples < 1)
        throw std::invalid_argument("sample: n_steps and n_samples must be >= 1");
    const int d = m.data_dim();
    const int N = run.n_steps;
    Mat x = draw_noise(run.n_samples, d, run.seed);

    std::vector<Mat> recorded;
    if (run.record_trajectory) recorded.push_back(x);

    for (int i = 0; i < N; ++i) {
        double t = static_cast<double>(i) / N;
        Mat v = velocity_at(m, bridge, x, t, run.naive_time_mode);
        x += v / static_cast<double>(N);
        if (run.record_trajectory) recorded.push_back(x);
    }

    SampleResult result;
    result.samples = std::move(x);
    if (run.record_trajectory) {
        std::vector<double> times(static_cast<size_t>(N) + 1);
        for (int i = 0; i <= N; ++i) times[static_cast<size_t>(i)] =
            static_cast<double>(i) / N;
        for (int s = 0; s < run.n_samples; ++s) {
            Trajectory traj;
            traj.times = times;
            traj.states.resize(N + 1, d);
            for (int i = 0; i <= N; ++i)
                traj.states.row(i) = recorded[static_cast<size_t>(i)].row(s);
            result.trajectories.push_back(std::move(traj));
        }
    }
    return result;
}

SampleResult sample_ddim(const ToyModel& m, const TrajectoryBridge& bridge,
                         const SampleRun& run) {
    if (m.param() == Parameterization::velocity)
        throw std::invalid_argument(
            "sample: ddim needs a diffusion-parameterized head");
    const int T = bridge.schedule().steps();
    const int N = run.n_steps;
    if (N < 1 || N > T)
        throw std::invalid_argument("sample: ddim needs 1 <= n_steps <= T");
    if (run.n_samples < 1)
        throw std::invalid_argument("sample: n_samples must be >= 1");
    const bool shifted = run.mode == SampleMode::ddim_shifted;
    if (shifted && !(run.shift >= 0.0 && run.shift < 1.0))
        throw std::invalid_argument("sample: shift must be in [0, 1)");

    // Largest-first uniform integer stride over {T..1}. Shifted queries sit
    // one node lower plus the shift so they stay inside [0, T].
    const int stride = std::max(1, T / N);
    std::vector<double> query(static_cast<size_t>(N));
    for (int i = 0; i < N; ++i) {
        double t = static_cast<double>(T - i * stride);
        query[static_cast<size_t>(i)] = shifted ? t - 1.0 + run.shift : t;
        if (query[static_cast<size_t>(i)] < 0.0 ||
            query[static_cast<size_t>(i)] > static_cast<double>(T))
            throw std::invalid_argument("sample: shifted timestep outside [0, T]");
    }

    const int d = m.data_dim();
    Mat x = draw_noise(run.n_samples, d, run.seed);
    std::vector<Mat> recorded;
    if (run.record_trajectory) recorded.push_back(x);

    Mat x0_hat, xT_hat;
    for (int i = 0; i < N; ++i) {
        double t = query[static_cast<size_t>(i)];
        auto [alpha, sigma] = bridge.schedule().coeffs_at(DmTime{t});
        Vec times = Vec::Constant(run.n_samples, t);
        Mat pred = m.forward(x, times);
        estimate_endpoints_batch(pred, x, alpha, sigma, m.param(), x0_hat, xT_hat);
        if (i + 1 < N) {
            auto [an, sn] =
                bridge.schedule().coeffs_at(DmTime{query[static_cast<size_t>(i + 1)]});
            x = an * x0_hat + sn * xT_hat;
        } else {
            x = x0_hat;
        }
        if (run.record_trajectory) recorded.push_back(x);
    }

    SampleResult result;
    result.samples = std::move(x);
    if (run.record_trajectory) {
        std::vector<double> times = query;
        times.push_back(0.0);
        for (int s = 0; s < run.n_samples; ++s) {
            Trajectory traj;
            traj.times = times;
            traj.states.resize(N + 1, d);
            for (int i = 0; i <= N; ++i)
                traj.states.row(i) = recorded[static_cast<size_t>(i)].row(s);
            result.trajectories.push_back(std::move(traj));
        }
    }
    return result;
}

double straightness(const ToyModel& m, const TrajectoryBridge& bridge,
                    int n_probe, int n_t, Rng& rng) {
    if (n_probe < 1 || n_t < 1)
        throw std::invalid_argument("sample: straightness needs n_probe, n_t >= 1");
    const int kRefSteps = 256;
    const int d = m.data_dim();

    Mat x0(n_probe, d);
    for (int i = 0; i < n_probe; ++i)
        for (int c = 0; c < d; ++c) x0(i, c) = rng.normal();

    // Reference path for every probe at high resolution.
    std::vector<Mat> path;
    path.reserve(kRefSteps + 1);
    Mat x = x0;
    path.push_back(x);
    for (int i = 0; i < kRefSteps; ++i) {
        double t = static_cast<double>(i) / kRefSteps;
        x += velocity_at(m, bridge, x, t, NaiveTimeMode::scaled) / kRefSteps;
        path.push_back(x);
    }
    Mat displacement = x - x0;  // x1 - x0 per probe

    double total = 0.0;
    for (int j = 0; j < n_t; ++j) {
        double t = static_cast<double>(j) / n_t;
        int idx = static_cast<int>(std::lround(t * kRefSteps));
        Mat v = velocity_at(m, bridge, path[static_cast<size_t>(idx)], t,
                            NaiveTimeMode::scaled);
        total += (displacement - v).rowwise().squaredNorm().sum();
    }
    return total / (static_cast<double>(n_probe) * n_t);
}

}  // namespace d2f
