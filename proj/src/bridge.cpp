// Copyright (C) 2026 d2f authors
// SPDX-License-Identifier: Apache-2.0
//

#include "d2f/bridge.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace d2f {

TrajectoryBridge::TrajectoryBridge(NoiseSchedule schedule)
    : schedule_(std::move(schedule)) {
    const int T = schedule_.steps();
    node_t_fm_.resize(static_cast<size_t>(T) + 1);
    for (int t = 0; t <= T; ++t) {
        double a = schedule_.alpha_node(t);
        double s = schedule_.sigma_node(t);
        node_t_fm_[static_cast<size_t>(t)] = a / (a + s);
    }
}

void TrajectoryBridge::check_dm(DmTime t) const {
    if (!(t.value >= 0.0 && t.value <= static_cast<double>(schedule_.steps())))
        throw std::out_of_range("bridge: diffusion time outside [0, T]");
}

FmTime TrajectoryBridge::t_dm_to_fm(DmTime t) const {
    auto [alpha, sigma] = schedule_.coeffs_at(t);
    return FmTime{alpha / (alpha + sigma)};
}

DmTime TrajectoryBridge::t_fm_to_dm(FmTime t) const {
    if (!(t.value >= 0.0 && t.value <= 1.0))
        throw std::out_of_range("bridge: flow time outside [0, 1]");
    if (t.value <= node_t_fm_.back())
        return DmTime{static_cast<double>(schedule_.steps())};  // clamp
    if (t.value == 1.0) return DmTime{0.0};

    // node_t_fm_ decreases strictly; bracket so that
    // node_t_fm_[k+1] <= t <= node_t_fm_[k].
    size_t lo = 0, hi = node_t_fm_.size() - 1;
    while (hi - lo > 1) {
        size_t mid = (lo + hi) / 2;
        if (node_t_fm_[mid] >= t.value)
            lo = mid;
        else
            hi = mid;
    }

    // Within the cell, alpha(u) and sigma(u) are linear, so
    // alpha(u)/(alpha(u)+sigma(u)) = t is linear in u; solving it makes the
    // backward map the exact inverse of the forward map.
    double a0 = schedule_.alpha_node(static_cast<int>(lo));
    double s0 = schedule_.sigma_node(static_cast<int>(lo));
    double da = schedule_.alpha_node(static_cast<int>(hi)) - a0;
    double dd = da + schedule_.sigma_node(static_cast<int>(hi)) - s0;
    double u = (t.value * (a0 + s0) - a0) / (da - t.value * dd);
    return DmTime{static_cast<double>(lo) + u};
}

double TrajectoryBridge::scale_at(DmTime t) const {
    auto [alpha, sigma] = schedule_.coeffs_at(t);
    return alpha + sigma;
}

Vec TrajectoryBridge::x_dm_to_fm(const Vec& x, DmTime t) const {
    check_dm(t);
    return x / scale_at(t);
}

std::pair<Vec, DmTime> TrajectoryBridge::x_fm_to_dm(const Vec& x, FmTime t) const {
    DmTime t_dm = t_fm_to_dm(t);
    return {x * scale_at(t_dm), t_dm};
}

BridgedPoint TrajectoryBridge::map_fm_point(const Vec& x_fm, FmTime t) const {
    DmTime t_dm = t_fm_to_dm(t);
    double scale = scale_at(t_dm);
    return BridgedPoint{x_fm * scale, t, t_dm, scale};
}

}  // namespace d2f
