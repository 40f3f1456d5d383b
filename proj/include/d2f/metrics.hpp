// Copyright (C) 2026 d2f authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>

#include "d2f/types.hpp"

namespace d2f {

/// Mean over n_proj fixed random unit directions of the squared 1-D
/// Wasserstein-2 distance between the projected empirical distributions.
/// Symmetric; exactly zero for identical sample sets.
double sliced_w2(const Mat& a, const Mat& b, int n_proj, std::uint64_t seed);

/// Biased RBF-kernel MMD^2 with a fixed bandwidth (zero for a == b).
double mmd_rbf(const Mat& a, const Mat& b, double bandwidth);

/// Median pairwise distance of a sample set, the frozen bandwidth heuristic.
double median_bandwidth(const Mat& data, int max_points = 2000);

struct DistanceReport {
    double sliced_w2 = 0.0;
    double mmd_rbf = 0.0;
    int n_used = 0;
    int projections = 0;
    double bandwidth = 0.0;
};

DistanceReport distance_report(const Mat& a, const Mat& b, int n_proj,
                               std::uint64_t seed, double bandwidth);

}  // namespace d2f
