// Copyright (C) 2026 d2f authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "d2f/bridge.hpp"
#include "d2f/net.hpp"
#include "d2f/rng.hpp"
#include "d2f/types.hpp"

namespace d2f {

enum class Regime {
    diffusion_pretrain,
    diffusion_finetune,
    naive_fm,
    diff2flow,
};

enum class LrSchedule { constant, cosine_decay };

/// Time fed to the network by the naive FM baseline: t*T (scaled into the
/// embedding range the prior was trained on) or the raw unit t.
enum class NaiveTimeMode { scaled, unit };

struct LoraSpec {
    int rank = 0;           // used when > 0
    double fraction = 0.0;  // used when rank == 0 and fraction > 0
};

struct TrainConfig {
    Regime regime = Regime::diffusion_pretrain;
    std::int64_t steps = 0;
    int batch = 256;
    double lr = 1e-3;
    LrSchedule lr_schedule = LrSchedule::constant;
    std::uint64_t seed = 0;
    std::optional<LoraSpec> lora;
    int log_every = 50;
    NaiveTimeMode naive_time_mode = NaiveTimeMode::scaled;
    int eval_every = 0;  // 0 disables the eval hook
};

struct TracePoint {
    std::int64_t iter;
    double loss;
    std::optional<double> eval;
    double wall_ms;
};

/// Loss/eval time series of one run. Iterations are strictly increasing.
struct MetricTrace {
    std::vector<TracePoint> points;

    /// One JSON object per line: {"iter":..,"loss":..,"eval":..,"wall_ms":..}
    void save_jsonl(const std::string& path) const;
};

/// One step's worth of draws. All finetune regimes consume the identical
/// (x1, noise, u) stream for a given (seed, step), so convergence
/// comparisons isolate the method: the diffusion regime maps u onto integer
/// timesteps, the FM regimes use it as t directly.
struct StepDraw {
    Mat x1;     // data batch
    Mat noise;  // standard normal; FM x0 and diffusion epsilon
    Vec u;      // uniform [0,1)
};

StepDraw draw_step(std::uint64_t seed, std::int64_t step, const Mat& data,
                   int batch);

// --- losses -----------------------------------------------------------------
// The deterministic *_on variants take pre-drawn randomness; the rng-taking
// forms exist for one-off use and draw exactly the shared stream layout.

/// Denoising loss, mean over the batch of the squared residual norm.
/// Heads: epsilon target = noise; v target = alpha*noise - sigma*x1.
std::pair<double, Gradients> diffusion_loss_on(const ToyModel& m, const Mat& x1,
                                               const Mat& noise, const Vec& u,
                                               const NoiseSchedule& s);
std::pair<double, Gradients> diffusion_loss(const ToyModel& m, const Mat& x1,
                                            const NoiseSchedule& s, Rng& rng);

/// Mean squared error (over batch and components) between the velocity
/// estimate and the straight-path target x1 - x0.
double fm_loss(const Mat& velocity_estimate, const Mat& x0, const Mat& x1);

/// Algorithm: FM interpolant -> bridge to diffusion coordinates -> network
/// -> objective change -> FM loss. Gradients flow through the conversion's
/// affine map.
std::pair<double, Gradients> diff2flow_loss_on(const ToyModel& m, const Mat& x1,
                                               const Mat& x0, const Vec& t_fm,
                                               const TrajectoryBridge& bridge);
std::pair<double, Gradients> diff2flow_step(const ToyModel& m, const Mat& x1,
                                            const TrajectoryBridge& bridge,
                                            Rng& rng);

/// Baseline: FM loss applied directly, network queried at t*T (or raw t)
/// on the unscaled FM interpolant, raw output treated as velocity.
std::pair<double, Gradients> naive_fm_loss_on(const ToyModel& m, const Mat& x1,
                                              const Mat& x0, const Vec& t_fm,
                                              const NoiseSchedule& s,
                                              NaiveTimeMode mode);
std::pair<double, Gradients> naive_fm_step(const ToyModel& m, const Mat& x1,
                                           const NoiseSchedule& s, Rng& rng,
                                           NaiveTimeMode mode = NaiveTimeMode::scaled);

// --- optimizer ----------------------------------------------------------------

/// Adam moments for every trainable tensor of a model.
class AdamState {
public:
    AdamState(const ToyModel& m, double lr, double beta1 = 0.9,
              double beta2 = 0.999, double eps = 1e-8);
    void apply(ToyModel& m, const Gradients& g, double lr_scale = 1.0);

private:
    struct Slot {
        Mat mW, vW;
        Vec mb, vb;
        Mat mB, vB, mA, vA;
    };
    std::vector<Slot> slots_;
    double lr_, beta1_, beta2_, eps_;
    std::int64_t t_ = 0;
};

// --- training loop -------------------------------------------------------------

using EvalFn = std::function<double(const ToyModel&)>;

/// Run the configured regime. Finetune regimes require `init`; pretraining
/// accepts a fresh model as init too. naive_fm permanently reinterprets the
/// head as `velocity`. Deterministic for a fixed config and seed.
std::pair<ToyModel, MetricTrace> run_training(
    const TrainConfig& cfg, const Mat& data, const TrajectoryBridge& bridge,
    ToyModel init, const EvalFn& eval = nullptr);

/// Draw-level view used by both run_training and the rectification loop.
std::pair<double, Gradients> regime_loss_on(const ToyModel& m, Regime regime,
                                            const Mat& x1, const Mat& noise,
                                            const Vec& u,
                                            const TrajectoryBridge& bridge,
                                            NaiveTimeMode naive_mode);

}  // namespace d2f
