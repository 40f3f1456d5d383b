// Copyright (C) 2026 d2f authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>

#include "d2f/types.hpp"

namespace d2f {

enum class DatasetKind { two_moons, eight_gaussians, checkerboard };

struct ToyDatasetSpec {
    DatasetKind kind = DatasetKind::two_moons;
    int n = 0;
    double noise_std = 0.05;
    std::uint64_t seed = 0;
};

/// Deterministic 2-D samples, standardized with the analytic moments of the
/// generating distribution (so batches keep their sampling noise: empirical
/// means shrink like 1/sqrt(n)).
Mat make_dataset(const ToyDatasetSpec& spec);

}  // namespace d2f
