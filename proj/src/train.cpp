// Copyright (C) 2026 d2f authors
// SPDX-License-Identifier: Apache-2.0
//

#include "d2f/train.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include <json.hpp>

namespace d2f {

void MetricTrace::save_jsonl(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("train: cannot write trace: " + path);
    for (const TracePoint& p : points) {
        nlohmann::json j;
        j["iter"] = p.iter;
        j["loss"] = p.loss;
        j["eval"] = p.eval ? nlohmann::json(*p.eval) : nlohmann::json(nullptr);
        j["wall_ms"] = p.wall_ms;
        os << j.dump() << "\n";
    }
}

StepDraw draw_step(std::uint64_t seed, std::int64_t step, const Mat& data,
                   int batch) {
    if (data.rows() == 0) throw std::invalid_argument("train: empty dataset");
    const int dim = static_cast<int>(data.cols());
    Rng rng(seed, /*stream=*/0x73746570u + static_cast<std::uint64_t>(step));
    StepDraw d;
    d.x1.resize(batch, dim);
    for (int i = 0; i < batch; ++i)
        d.x1.row(i) = data.row(static_cast<Eigen::Index>(
            rng.below(static_cast<std::uint64_t>(data.rows()))));
    d.noise.resize(batch, dim);
    for (int i = 0; i < batch; ++i)
        for (int c = 0; c < dim; ++c) d.noise(i, c) = rng.normal();
    d.u.resize(batch);
    for (int i = 0; i < batch; ++i) d.u[i] = rng.uniform();
    return d;
}

// --- diffusion ----------------------------------------------------------------

std::pair<double, Gradients> diffusion_loss_on(const ToyModel& m, const Mat& x1,
                                               const Mat& noise, const Vec& u,
                                               const NoiseSchedule& s) {
    if (m.param() != Parameterization::epsilon && m.param() != Parameterization::v)
        throw std::invalid_argument("train: diffusion loss needs an epsilon or v head");
    const auto n = x1.rows();
    const int T = s.steps();
    Mat x_t(n, x1.cols()), target(n, x1.cols());
    Vec times(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        int t = std::min(T, 1 + static_cast<int>(u[i] * T));
        double alpha = s.alpha_node(t), sigma = s.sigma_node(t);
        times[i] = static_cast<double>(t);
        x_t.row(i) = alpha * x1.row(i) + sigma * noise.row(i);
        if (m.param() == Parameterization::epsilon)
            target.row(i) = noise.row(i);
        else
            target.row(i) = alpha * noise.row(i) - sigma * x1.row(i);
    }
    ForwardCache cache;
    Mat pred = m.forward(x_t, times, cache);
    Mat resid = pred - target;
    // mean over the batch of the squared residual norm
    double loss = resid.squaredNorm() / static_cast<double>(n);
    Mat dloss = (2.0 / static_cast<double>(n)) * resid;
    return {loss, m.backward(dloss, cache)};
}

std::pair<double, Gradients> diffusion_loss(const ToyModel& m, const Mat& x1,
                                            const NoiseSchedule& s, Rng& rng) {
    const auto n = x1.rows();
    Mat noise(n, x1.cols());
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index c = 0; c < x1.cols(); ++c) noise(i, c) = rng.normal();
    Vec u(n);
    for (Eigen::Index i = 0; i < n; ++i) u[i] = rng.uniform();
    return diffusion_loss_on(m, x1, noise, u, s);
}

// --- flow matching --------------------------------------------------------------

double fm_loss(const Mat& velocity_estimate, const Mat& x0, const Mat& x1) {
    if (velocity_estimate.rows() != x0.rows() || x0.rows() != x1.rows() ||
        velocity_estimate.cols() != x0.cols() || x0.cols() != x1.cols())
        throw std::invalid_argument("train: fm_loss shape mismatch");
    Mat resid = (x1 - x0) - velocity_estimate;
    return resid.squaredNorm() / static_cast<double>(resid.size());
}

std::pair<double, Gradients> diff2flow_loss_on(const ToyModel& m, const Mat& x1,
                                               const Mat& x0, const Vec& t_fm,
                                               const TrajectoryBridge& bridge) {
    if (m.param() == Parameterization::velocity)
        throw std::invalid_argument(
            "train: diff2flow finetunes a diffusion-parameterized head");
    const auto n = x1.rows();
    const auto dim = x1.cols();
    Mat x_dm(n, dim);
    Vec times(n), c_pred(n), c_state(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        Vec x_fm = (t_fm[i] * x1.row(i) + (1.0 - t_fm[i]) * x0.row(i)).transpose();
        DmTime t_dm = bridge.t_fm_to_dm(FmTime{t_fm[i]});
        double scale = bridge.scale_at(t_dm);
        x_dm.row(i) = (scale * x_fm).transpose();
        times[i] = t_dm.value;
        auto [alpha, sigma] = bridge.schedule().coeffs_at(t_dm);
        ConversionCoeffs c = conversion_coeffs(alpha, sigma, m.param());
        c_pred[i] = c.c_pred;
        c_state[i] = c.c_state;
    }
    ForwardCache cache;
    Mat pred = m.forward(x_dm, times, cache);
    Mat vel(n, dim);
    for (Eigen::Index i = 0; i < n; ++i)
        vel.row(i) = c_pred[i] * pred.row(i) + c_state[i] * x_dm.row(i);
    Mat resid = vel - (x1 - x0);
    double loss = resid.squaredNorm() / static_cast<double>(resid.size());
    // d loss / d pred: the bridge scaling and (alpha, sigma) are constants
    // w.r.t. the parameters, so only c_pred carries gradient.
    Mat dloss(n, dim);
    double scale = 2.0 / static_cast<double>(resid.size());
    for (Eigen::Index i = 0; i < n; ++i)
        dloss.row(i) = scale * c_pred[i] * resid.row(i);
    return {loss, m.backward(dloss, cache)};
}

std::pair<double, Gradients> diff2flow_step(const ToyModel& m, const Mat& x1,
                                            const TrajectoryBridge& bridge,
                                            Rng& rng) {
    const auto n = x1.rows();
    Mat x0(n, x1.cols());
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index c = 0; c < x1.cols(); ++c) x0(i, c) = rng.normal();
    Vec t(n);
    for (Eigen::Index i = 0; i < n; ++i) t[i] = rng.uniform();
    return diff2flow_loss_on(m, x1, x0, t, bridge);
}

std::pair<double, Gradients> naive_fm_loss_on(const ToyModel& m, const Mat& x1,
                                              const Mat& x0, const Vec& t_fm,
                                              const NoiseSchedule& s,
                                              NaiveTimeMode mode) {
    const auto n = x1.rows();
    const auto dim = x1.cols();
    Mat x_fm(n, dim);
    Vec times(n);
    double t_scale = mode == NaiveTimeMode::scaled ? static_cast<double>(s.steps()) : 1.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        x_fm.row(i) = t_fm[i] * x1.row(i) + (1.0 - t_fm[i]) * x0.row(i);
        times[i] = t_fm[i] * t_scale;
    }
    ForwardCache cache;
    Mat pred = m.forward(x_fm, times, cache);
    Mat resid = pred - (x1 - x0);
    double loss = resid.squaredNorm() / static_cast<double>(resid.size());
    Mat dloss = (2.0 / static_cast<double>(resid.size())) * resid;
    return {loss, m.backward(dloss, cache)};
}

std::pair<double, Gradients> naive_fm_step(const ToyModel& m, const Mat& x1,
                                           const NoiseSchedule& s, Rng& rng,
                                           NaiveTimeMode mode) {
    const auto n = x1.rows();
    Mat x0(n, x1.cols());
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index c = 0; c < x1.cols(); ++c) x0(i, c) = rng.normal();
    Vec t(n);
    for (Eigen::Index i = 0; i < n; ++i) t[i] = rng.uniform();
    return naive_fm_loss_on(m, x1, x0, t, s, mode);
}

std::pair<double, Gradients> regime_loss_on(const ToyModel& m, Regime regime,
                                            const Mat& x1, const Mat& noise,
                                            const Vec& u,
                                            const TrajectoryBridge& bridge,
                                            NaiveTimeMode naive_mode) {
    switch (regime) {
        case Regime::diffusion_pretrain:
        case Regime::diffusion_finetune:
            return diffusion_loss_on(m, x1, noise, u, bridge.schedule());
        case Regime::naive_fm:
            return naive_fm_loss_on(m, x1, noise, u, bridge.schedule(), naive_mode);
        case Regime::diff2flow:
            return diff2flow_loss_on(m, x1, noise, u, bridge);
    }
    throw std::invalid_argument("train: unknown regime");
}

// --- Adam -----------------------------------------------------------------------

AdamState::AdamState(const ToyModel& m, double lr, double beta1, double beta2,
                     double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
    for (const DenseLayer& layer : m.layers()) {
        Slot s;
        if (!m.lora_attached()) {
            s.mW = Mat::Zero(layer.W.rows(), layer.W.cols());
            s.vW = s.mW;
            s.mb = Vec::Zero(layer.b.size());
            s.vb = s.mb;
        }
        if (layer.lora) {
            s.mB = Mat::Zero(layer.lora->B.rows(), layer.lora->B.cols());
            s.vB = s.mB;
            s.mA = Mat::Zero(layer.lora->A.rows(), layer.lora->A.cols());
            s.vA = s.mA;
        }
        slots_.push_back(std::move(s));
    }
}

namespace {

void adam_update(Mat& w, const Mat& g, Mat& mom, Mat& vel, double lr,
                 double beta1, double beta2, double eps, double bc1, double bc2) {
    mom = beta1 * mom + (1.0 - beta1) * g;
    vel = beta2 * vel + (1.0 - beta2) * g.cwiseProduct(g);
    w -= lr * (mom / bc1)
             .cwiseQuotient(((vel / bc2).cwiseSqrt().array() + eps).matrix());
}

void adam_update(Vec& w, const Vec& g, Vec& mom, Vec& vel, double lr,
                 double beta1, double beta2, double eps, double bc1, double bc2) {
    mom = beta1 * mom + (1.0 - beta1) * g;
    vel = beta2 * vel + (1.0 - beta2) * g.cwiseProduct(g);
    w -= lr * (mom / bc1)
             .cwiseQuotient(((vel / bc2).cwiseSqrt().array() + eps).matrix());
}

}  // namespace

void AdamState::apply(ToyModel& m, const Gradients& g, double lr_scale) {
    if (g.layers.size() != slots_.size())
        throw std::invalid_argument("train: gradient/optimizer layer mismatch");
    ++t_;
    double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    double lr = lr_ * lr_scale;
    auto& layers = m.layers();
    for (size_t l = 0; l < layers.size(); ++l) {
        Slot& s = slots_[l];
        const LayerGrads& lg = g.layers[l];
        if (lg.dW.size() > 0) {
            adam_update(layers[l].W, lg.dW, s.mW, s.vW, lr, beta1_, beta2_, eps_, bc1, bc2);
            adam_update(layers[l].b, lg.db, s.mb, s.vb, lr, beta1_, beta2_, eps_, bc1, bc2);
        }
        if (lg.dB.size() > 0) {
            adam_update(layers[l].lora->B, lg.dB, s.mB, s.vB, lr, beta1_, beta2_, eps_, bc1, bc2);
            adam_update(layers[l].lora->A, lg.dA, s.mA, s.vA, lr, beta1_, beta2_, eps_, bc1, bc2);
        }
    }
}

// --- loop -----------------------------------------------------------------------

std::pair<ToyModel, MetricTrace> run_training(const TrainConfig& cfg,
                                              const Mat& data,
                                              const TrajectoryBridge& bridge,
                                              ToyModel init, const EvalFn& eval) {
    if (cfg.steps < 0 || cfg.batch < 1)
        throw std::invalid_argument("train: steps/batch must be positive");
    ToyModel model = std::move(init);

    MetricTrace trace;
    if (cfg.steps == 0) return {std::move(model), std::move(trace)};  // unchanged

    if (cfg.regime == Regime::naive_fm)
        model.set_param(Parameterization::velocity);

    if (cfg.lora) {
        Rng lora_rng(cfg.seed, /*stream=*/0x6c6f7261u);  // "lora"
        if (cfg.lora->rank > 0)
            model.attach_lora(cfg.lora->rank, lora_rng);
        else
            model.attach_lora_fraction(cfg.lora->fraction, lora_rng);
    }

    AdamState adam(model, cfg.lr);
    auto start = std::chrono::steady_clock::now();
    for (std::int64_t step = 0; step < cfg.steps; ++step) {
        StepDraw d = draw_step(cfg.seed, step, data, cfg.batch);
        auto [loss, grads] =
            regime_loss_on(model, cfg.regime, d.x1, d.noise, d.u, bridge,
                           cfg.naive_time_mode);
        double lr_scale = 1.0;
        if (cfg.lr_schedule == LrSchedule::cosine_decay)
            lr_scale = 0.5 * (1.0 + std::cos(std::numbers::pi *
                                             static_cast<double>(step) /
                                             static_cast<double>(cfg.steps)));
        adam.apply(model, grads, lr_scale);

        std::int64_t iter = step + 1;
        bool log_now = (cfg.log_every > 0 && iter % cfg.log_every == 0) ||
                       iter == cfg.steps;
        if (log_now) {
            TracePoint p;
            p.iter = iter;
            p.loss = loss;
            if (eval && cfg.eval_every > 0 &&
                (iter % cfg.eval_every == 0 || iter == cfg.steps))
                p.eval = eval(model);
            p.wall_ms = std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - start)
                            .count();
            trace.points.push_back(std::move(p));
        }
    }
    return {std::move(model), std::move(trace)};
}

}  // namespace d2f
