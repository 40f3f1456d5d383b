// Copyright (C) 2026 d2f authors
// SPDX-License-Identifier: Apache-2.0
//

#include "d2f/data.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "d2f/rng.hpp"

namespace d2f {

namespace {

using std::numbers::pi;

// Standardization uses the exact moments of each generator, derived from
// the uniform-angle / uniform-cell construction below:
//   two moons:      mean (0.5, 0.25), var (3/4 + s^2, 9/16 - 1/pi + s^2)
//   eight gaussians: mean 0, per-axis var R^2/2 + s^2 (R = 2)
//   checkerboard:   mean 0, per-axis var 4/3 + s^2 (uniform marginal on [-2,2])
struct Moments {
    double mx, my, sx, sy;
};

Moments moments_for(DatasetKind kind, double noise_std) {
    double n2 = noise_std * noise_std;
    switch (kind) {
        case DatasetKind::two_moons:
            return {0.5, 0.25, std::sqrt(0.75 + n2),
                    std::sqrt(0.5625 - 1.0 / pi + n2)};
        case DatasetKind::eight_gaussians:
            return {0.0, 0.0, std::sqrt(2.0 + n2), std::sqrt(2.0 + n2)};
        case DatasetKind::checkerboard:
            return {0.0, 0.0, std::sqrt(4.0 / 3.0 + n2),
                    std::sqrt(4.0 / 3.0 + n2)};
    }
    throw std::invalid_argument("data: unknown dataset kind");
}

}  // namespace

Mat make_dataset(const ToyDatasetSpec& spec) {
    if (spec.n < 1) throw std::invalid_argument("data: n must be >= 1");
    if (spec.noise_std < 0.0)
        throw std::invalid_argument("data: noise_std must be >= 0");

    Rng rng(spec.seed, /*stream=*/0x64617461u);  // "data"
    Mat x(spec.n, 2);
    switch (spec.kind) {
        case DatasetKind::two_moons:
            for (int i = 0; i < spec.n; ++i) {
                double theta = pi * rng.uniform();
                bool upper = rng.uniform() < 0.5;
                double px = upper ? std::cos(theta) : 1.0 - std::cos(theta);
                double py = upper ? std::sin(theta) : 0.5 - std::sin(theta);
                x(i, 0) = px + spec.noise_std * rng.normal();
                x(i, 1) = py + spec.noise_std * rng.normal();
            }
            break;
        case DatasetKind::eight_gaussians:
            for (int i = 0; i < spec.n; ++i) {
                auto k = rng.below(8);
                double angle = 2.0 * pi * static_cast<double>(k) / 8.0;
                x(i, 0) = 2.0 * std::cos(angle) + spec.noise_std * rng.normal();
                x(i, 1) = 2.0 * std::sin(angle) + spec.noise_std * rng.normal();
            }
            break;
        case DatasetKind::checkerboard:
            for (int i = 0; i < spec.n; ++i) {
                // 4x4 cells on [-2,2]^2, active where (ix + iy) is even
                auto ix = static_cast<int>(rng.below(4));
                auto pick = static_cast<int>(rng.below(2));
                int iy = (ix % 2 == 0) ? 2 * pick : 2 * pick + 1;
                x(i, 0) = -2.0 + ix + rng.uniform() + spec.noise_std * rng.normal();
                x(i, 1) = -2.0 + iy + rng.uniform() + spec.noise_std * rng.normal();
            }
            break;
        default:
            throw std::invalid_argument("data: unknown dataset kind");
    }

    Moments m = moments_for(spec.kind, spec.noise_std);
    for (int i = 0; i < spec.n; ++i) {
        x(i, 0) = (x(i, 0) - m.mx) / m.sx;
        x(i, 1) = (x(i, 1) - m.my) / m.sy;
    }
    return x;
}

}  // namespace d2f
