// Copyright (C) 2026 d2f authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "d2f/sample.hpp"
#include "d2f/train.hpp"
#include "d2f/types.hpp"

namespace d2f {

/// Fixed (noise, generated-sample) couplings for rectification. Regenerating
/// with the same model, seed and gen_steps reproduces x1 bit-exactly.
struct PairSet {
    Mat x0;  // the exact noise draws
    Mat x1;  // model-generated endpoints
    int gen_steps = 0;
    std::uint64_t seed = 0;

    Eigen::Index count() const { return x0.rows(); }
    int dim() const { return static_cast<int>(x0.cols()); }
};

/// Integrate n_pairs noise draws through the model at N Euler steps.
PairSet generate_pairs(const ToyModel& m, const TrajectoryBridge& bridge,
                       int n_pairs, int n_steps, std::uint64_t seed);

/// Binary pair file: magic "D2FP", count, dim, seed, gen_steps, then
/// interleaved x0/x1 rows as little-endian 64-bit floats.
void save_pairs(const PairSet& pairs, const std::string& path);
PairSet load_pairs(const std::string& path);

/// 1-rectification: the diff2flow training loop with (x0, x1) drawn from the
/// stored couplings instead of independent noise/data draws. cfg.lora with
/// rank 16 is the toy-scale adapter default.
std::pair<ToyModel, MetricTrace> rectify(const ToyModel& m, const PairSet& pairs,
                                         const TrainConfig& cfg,
                                         const TrajectoryBridge& bridge,
                                         const EvalFn& eval = nullptr);

}  // namespace d2f
