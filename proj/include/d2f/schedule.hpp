// Copyright (C) 2026 d2f authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <utility>
#include <vector>

namespace d2f {

/// Continuous diffusion time, valid range [0, T].
struct DmTime {
    double value;
};

/// Flow-matching time, valid range [0, 1]. t=0 is pure noise, t=1 is data.
struct FmTime {
    double value;
};

/// Discrete variance-preserving noise schedule with nodes t = 0..T.
/// Node 0 is pinned to (alpha, sigma) = (1, 0) so the clean-data boundary is
/// exact; between integer nodes alpha and sigma are interpolated linearly and
/// independently (no re-projection onto the VP circle).
///
/// Immutable after construction; safe to share across threads.
class NoiseSchedule {
public:
    /// Linear-beta VP schedule: beta_s ramps linearly from beta_min to
    /// beta_max over s = 1..T, alpha_t = sqrt(prod_{s<=t}(1 - beta_s)).
    static NoiseSchedule linear_vp(int steps, double beta_min, double beta_max);

    /// Schedule from explicit node values. Validates the node invariants:
    /// (alpha[0], sigma[0]) = (1, 0), strict monotonicity, unit circle at
    /// every node within 1e-12, alpha[T] > 0.
    static NoiseSchedule from_nodes(std::vector<double> alpha,
                                    std::vector<double> sigma);

    int steps() const { return static_cast<int>(alpha_.size()) - 1; }

    double alpha_node(int t) const { return alpha_[static_cast<size_t>(t)]; }
    double sigma_node(int t) const { return sigma_[static_cast<size_t>(t)]; }

    /// (alpha, sigma) at continuous time. Integer times return the node
    /// values bitwise; fractional times interpolate linearly. Out-of-range
    /// times are rejected, never extrapolated.
    std::pair<double, double> coeffs_at(DmTime t) const;

    /// Signal-to-noise ratio alpha^2/sigma^2; +infinity at t = 0.
    double snr_at(DmTime t) const;

private:
    NoiseSchedule() = default;
    void validate() const;

    std::vector<double> alpha_;
    std::vector<double> sigma_;
};

}  // namespace d2f
