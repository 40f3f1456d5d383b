// Copyright (C) 2026 d2f authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <atomic>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "d2f/convert.hpp"
#include "d2f/rng.hpp"
#include "d2f/types.hpp"

namespace d2f {

/// Sinusoidal features at geometrically spaced frequencies. Defined for any
/// real t, which is what makes fractional diffusion timesteps queryable.
struct TimeEmbedding {
    int dim;                     // even
    double max_period = 1e4;

    Vec operator()(double t) const;
};

/// Low-rank update W + B*A on a dense layer. B starts at zero so attaching
/// an adapter leaves the forward pass unchanged.
struct LoraAdapter {
    Mat B;  // out x r
    Mat A;  // r x in
    int rank() const { return static_cast<int>(B.cols()); }
};

struct DenseLayer {
    Mat W;  // out x in
    Vec b;
    std::optional<LoraAdapter> lora;

    Mat effective_weight() const {
        return lora ? Mat(W + lora->B * lora->A) : W;
    }
};

/// Per-layer gradients. dW/db stay empty while the base is frozen under
/// LoRA; dB/dA stay empty when no adapter is attached.
struct LayerGrads {
    Mat dW;
    Vec db;
    Mat dB;
    Mat dA;
};

struct Gradients {
    std::vector<LayerGrads> layers;
};

/// Intermediate activations kept for the backward pass.
struct ForwardCache {
    std::vector<Mat> inputs;  // activation entering each layer
    std::vector<Mat> z;       // pre-activation of each layer
    bool valid = false;
};

/// Fully-connected predictor over (x, time-embedding) with SiLU hidden
/// activations and a linear head; gradients are exact and hand-derived.
/// Single-writer for training; concurrent read-only inference is safe.
class ToyModel {
public:
    ToyModel(int data_dim, const std::vector<int>& hidden, int embed_dim,
             Parameterization p, std::uint64_t init_seed,
             double max_period = 1e4);

    int data_dim() const { return data_dim_; }
    const TimeEmbedding& embedding() const { return embed_; }
    const std::vector<DenseLayer>& layers() const { return layers_; }
    std::vector<DenseLayer>& layers() { return layers_; }

    Parameterization param() const { return param_; }
    /// Reinterpret the head (used when a finetune changes the objective).
    void set_param(Parameterization p) { param_ = p; }

    Vec forward(const Vec& x, double t) const;
    /// One row per sample; counts as a single function evaluation.
    Mat forward(const Mat& x, const Vec& t) const;
    Mat forward(const Mat& x, const Vec& t, ForwardCache& cache) const;

    /// Exact gradients from the loss gradient w.r.t. the network output.
    Gradients backward(const Mat& dloss_dout, const ForwardCache& cache) const;

    /// Attach adapters to every dense layer and freeze the base weights.
    /// A ~ N(0, (1/rank)^2), B = 0.
    void attach_lora(int rank, Rng& rng);
    /// Per-layer rank = ceil(fraction * min(out, in)).
    void attach_lora_fraction(double fraction, Rng& rng);
    void merge_lora();  // W <- W + B*A, adapters removed
    bool lora_attached() const { return lora_attached_; }

    std::size_t param_count() const;
    std::size_t trainable_count() const;

    /// Network evaluation counter (NFE accounting).
    std::uint64_t forward_calls() const { return counter_.n.load(); }
    void reset_forward_calls() const { counter_.n.store(0); }

    void save(const std::string& path) const;
    static ToyModel load(const std::string& path);

private:
    ToyModel() = default;

    struct EvalCounter {
        std::atomic<std::uint64_t> n{0};
        EvalCounter() = default;
        EvalCounter(const EvalCounter& o) : n(o.n.load()) {}
        EvalCounter& operator=(const EvalCounter& o) {
            n.store(o.n.load());
            return *this;
        }
    };

    Mat assemble_input(const Mat& x, const Vec& t) const;

    int data_dim_ = 0;
    TimeEmbedding embed_{0};
    Parameterization param_ = Parameterization::epsilon;
    std::vector<DenseLayer> layers_;
    bool lora_attached_ = false;
    mutable EvalCounter counter_;
};

}  // namespace d2f
