// Copyright (C) 2026 d2f authors
// SPDX-License-Identifier: Apache-2.0
//

#include "d2f/schedule.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace d2f {

NoiseSchedule NoiseSchedule::linear_vp(int steps, double beta_min,
                                       double beta_max) {
    if (steps < 2) throw std::invalid_argument("schedule: steps must be >= 2");
    if (!(beta_min > 0.0) || !(beta_max < 1.0) || beta_min > beta_max)
        throw std::invalid_argument(
            "schedule: betas must satisfy 0 < beta_min <= beta_max < 1");

    NoiseSchedule s;
    s.alpha_.resize(static_cast<size_t>(steps) + 1);
    s.sigma_.resize(static_cast<size_t>(steps) + 1);
    s.alpha_[0] = 1.0;
    s.sigma_[0] = 0.0;
    double alpha_bar = 1.0;
    for (int t = 1; t <= steps; ++t) {
        double beta = beta_min + (beta_max - beta_min) *
                                     static_cast<double>(t - 1) /
                                     static_cast<double>(steps - 1);
        alpha_bar *= 1.0 - beta;
        s.alpha_[static_cast<size_t>(t)] = std::sqrt(alpha_bar);
        s.sigma_[static_cast<size_t>(t)] = std::sqrt(1.0 - alpha_bar);
    }
    s.validate();
    return s;
}

NoiseSchedule NoiseSchedule::from_nodes(std::vector<double> alpha,
                                        std::vector<double> sigma) {
    if (alpha.size() != sigma.size() || alpha.size() < 2)
        throw std::invalid_argument("schedule: need matching node arrays, T >= 1");
    NoiseSchedule s;
    s.alpha_ = std::move(alpha);
    s.sigma_ = std::move(sigma);
    s.validate();
    return s;
}

void NoiseSchedule::validate() const {
    if (alpha_[0] != 1.0 || sigma_[0] != 0.0)
        throw std::invalid_argument("schedule: node 0 must be exactly (1, 0)");
    const size_t n = alpha_.size();
    for (size_t t = 0; t < n; ++t) {
        if (t > 0 && !(alpha_[t] < alpha_[t - 1] && sigma_[t] > sigma_[t - 1]))
            throw std::invalid_argument(
                "schedule: alpha must decrease and sigma increase strictly");
        double vp = alpha_[t] * alpha_[t] + sigma_[t] * sigma_[t];
        if (std::abs(vp - 1.0) > 1e-12)
            throw std::invalid_argument("schedule: nodes must lie on the VP circle");
    }
    if (!(alpha_.back() > 0.0))
        throw std::invalid_argument("schedule: terminal alpha must stay positive");
}

std::pair<double, double> NoiseSchedule::coeffs_at(DmTime t) const {
    const double T = static_cast<double>(steps());
    if (!(t.value >= 0.0 && t.value <= T))
        throw std::out_of_range("schedule: time outside [0, T]");
    double lo = std::floor(t.value);
    double frac = t.value - lo;
    auto k = static_cast<size_t>(lo);
    if (frac == 0.0) return {alpha_[k], sigma_[k]};
    return {alpha_[k] + frac * (alpha_[k + 1] - alpha_[k]),
            sigma_[k] + frac * (sigma_[k + 1] - sigma_[k])};
}

double NoiseSchedule::snr_at(DmTime t) const {
    auto [alpha, sigma] = coeffs_at(t);
    if (sigma == 0.0) return std::numeric_limits<double>::infinity();
    return (alpha * alpha) / (sigma * sigma);
}

}  // namespace d2f
