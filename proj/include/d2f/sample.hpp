// Copyright (C) 2026 d2f authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <vector>

#include "d2f/bridge.hpp"
#include "d2f/net.hpp"
#include "d2f/rng.hpp"
#include "d2f/train.hpp"
#include "d2f/types.hpp"

namespace d2f {

enum class SampleMode { diff2flow_euler, ddim, ddim_shifted };

struct SampleRun {
    int n_steps = 32;  // NFE
    int n_samples = 1;
    std::uint64_t seed = 0;
    SampleMode mode = SampleMode::diff2flow_euler;
    double shift = 0.0;  // ddim_shifted only, in [0, 1)
    bool record_trajectory = false;
    NaiveTimeMode naive_time_mode = NaiveTimeMode::scaled;
};

/// One integration path. FM-convention times increase 0 -> 1; DM-convention
/// times decrease T -> final query.
struct Trajectory {
    Mat states;                 // (N+1) x d
    std::vector<double> times;  // N+1
};

struct SampleResult {
    Mat samples;  // n_samples x d
    std::vector<Trajectory> trajectories;  // empty unless recorded
};

/// Euler integration of the FM ODE from t = 0 to 1. Diffusion-parameterized
/// models are queried through the bridge with the objective change at every
/// step; a `velocity` head is queried at its native convention (unscaled
/// state, time per naive_time_mode) and its output used directly.
/// Exactly run.n_steps network evaluations.
SampleResult sample_diff2flow(const ToyModel& m, const TrajectoryBridge& bridge,
                              const SampleRun& run);

/// Deterministic DDIM: at each grid timestep estimate the endpoints and
/// re-noise to the next one; the last step emits x0_hat. The grid is a
/// largest-first uniform integer stride over {T..1}; shifted mode queries at
/// (grid - 1 + shift), the half-integer probe for shift = 0.5.
SampleResult sample_ddim(const ToyModel& m, const TrajectoryBridge& bridge,
                         const SampleRun& run);

/// Mean over probes and a time grid of |(x1 - x0) - v(x_t, t)|^2 along the
/// model's own high-resolution (N = 256) Euler path. Zero for a perfectly
/// straight learned field.
double straightness(const ToyModel& m, const TrajectoryBridge& bridge,
                    int n_probe, int n_t, Rng& rng);

}  // namespace d2f
