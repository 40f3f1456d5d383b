// Copyright (C) 2026 d2f authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <utility>
#include <vector>

#include "d2f/schedule.hpp"
#include "d2f/types.hpp"

namespace d2f {

/// A state on both trajectories at once: the flow-matching point (x/scale,
/// t_fm) and its diffusion counterpart (x, t_dm), with scale = alpha + sigma
/// at t_dm.
struct BridgedPoint {
    Vec x_dm;
    FmTime t_fm;
    DmTime t_dm;
    double scale;
};

/// Invertible traversal between the diffusion trajectory (times [0, T],
/// states alpha*x1 + sigma*x0) and the flow-matching trajectory (times
/// [0, 1], states t*x1 + (1-t)*x0).
///
/// Time map: t_fm = alpha/(alpha + sigma) with linearly interpolated
/// coefficients; strictly decreasing from 1 at t_dm = 0 down to the terminal
/// value at t_dm = T. The inverse solves that interpolated ratio exactly
/// within the bracketing node cell, so forward/backward compose to the
/// identity at machine precision. FM times below the terminal value have no
/// preimage and clamp to t_dm = T, which is what lets the FM side be queried
/// at pure noise (t_fm = 0).
///
/// State map: x_fm = x_dm/(alpha + sigma) and back.
///
/// Pure functions over an immutable schedule copy; thread-safe.
class TrajectoryBridge {
public:
    explicit TrajectoryBridge(NoiseSchedule schedule);

    const NoiseSchedule& schedule() const { return schedule_; }

    /// f_t: alpha/(alpha + sigma) at t. Returns 1 at t = 0.
    FmTime t_dm_to_fm(DmTime t) const;

    /// f_t^-1. Exact on [terminal, 1]; clamps to T below the terminal value.
    DmTime t_fm_to_dm(FmTime t) const;

    /// f_x: divide the state by (alpha + sigma) at t.
    Vec x_dm_to_fm(const Vec& x, DmTime t) const;

    /// f_x^-1 combined with f_t^-1: returns the rescaled state and the
    /// diffusion time it lives at.
    std::pair<Vec, DmTime> x_fm_to_dm(const Vec& x, FmTime t) const;

    /// alpha + sigma at t.
    double scale_at(DmTime t) const;

    /// f_t(T), the smallest reachable FM time (~6.3e-3 for the default
    /// 1000-step schedule).
    double terminal_t_fm() const { return node_t_fm_.back(); }

    /// Full bridged view of an FM query point.
    BridgedPoint map_fm_point(const Vec& x_fm, FmTime t) const;

private:
    void check_dm(DmTime t) const;

    NoiseSchedule schedule_;
    std::vector<double> node_t_fm_;  // f_t at integer nodes, strictly decreasing
};

}  // namespace d2f
