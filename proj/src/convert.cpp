// Copyright (C) 2026 d2f authors
// SPDX-License-Identifier: Apache-2.0
//

#include "d2f/convert.hpp"

#include <cmath>
#include <stdexcept>

namespace d2f {

namespace {

// Tolerance for the near-node VP check; matches the interpolation deviation
// bound asserted for the default schedule.
constexpr double kVpTolerance = 1e-4;

void check_on_circle(double alpha, double sigma) {
    if (std::abs(alpha * alpha + sigma * sigma - 1.0) > kVpTolerance)
        throw std::invalid_argument(
            "convert: (alpha, sigma) too far off the VP circle");
}

}  // namespace

ConversionCoeffs conversion_coeffs(double alpha, double sigma,
                                   Parameterization p) {
    switch (p) {
        case Parameterization::epsilon:
            if (alpha == 0.0)
                throw std::invalid_argument("convert: epsilon head at alpha = 0");
            return {-(alpha + sigma) / alpha, 1.0 / alpha};
        case Parameterization::v:
            return {-(alpha + sigma), alpha - sigma};
        case Parameterization::x0:
            if (sigma == 0.0)
                throw std::invalid_argument("convert: x0 head at sigma = 0");
            return {(alpha + sigma) / sigma, -1.0 / sigma};
        case Parameterization::velocity:
            return {1.0, 0.0};
    }
    throw std::invalid_argument("convert: unknown parameterization");
}

void estimate_endpoints_batch(const Mat& pred, const Mat& x_dm, double alpha,
                              double sigma, Parameterization p, Mat& x0_hat,
                              Mat& xT_hat) {
    check_on_circle(alpha, sigma);
    switch (p) {
        case Parameterization::epsilon:
            if (alpha == 0.0)
                throw std::invalid_argument("convert: epsilon head at alpha = 0");
            x0_hat = (x_dm - sigma * pred) / alpha;
            xT_hat = pred;
            return;
        case Parameterization::v:
            x0_hat = alpha * x_dm - sigma * pred;
            xT_hat = alpha * pred + sigma * x_dm;
            return;
        case Parameterization::x0:
            if (sigma == 0.0)
                throw std::invalid_argument("convert: x0 head at sigma = 0");
            x0_hat = pred;
            xT_hat = (x_dm - alpha * pred) / sigma;
            return;
        case Parameterization::velocity:
            throw std::invalid_argument(
                "convert: velocity head has no diffusion endpoints");
    }
    throw std::invalid_argument("convert: unknown parameterization");
}

EndpointEstimate estimate_endpoints(const Vec& pred, const Vec& x_dm,
                                    double alpha, double sigma,
                                    Parameterization p) {
    Mat x0_hat, xT_hat;
    estimate_endpoints_batch(pred.transpose(), x_dm.transpose(), alpha, sigma,
                             p, x0_hat, xT_hat);
    return {x0_hat.row(0).transpose(), xT_hat.row(0).transpose()};
}

VelocityEstimate velocity_from_diffusion(const Vec& pred, const Vec& x_fm,
                                         FmTime t_fm,
                                         const TrajectoryBridge& bridge,
                                         Parameterization p) {
    if (p == Parameterization::velocity) return {pred};
    auto [x_dm, t_dm] = bridge.x_fm_to_dm(x_fm, t_fm);
    auto [alpha, sigma] = bridge.schedule().coeffs_at(t_dm);
    EndpointEstimate e = estimate_endpoints(pred, x_dm, alpha, sigma, p);
    return {e.x0_hat - e.xT_hat};
}

Mat velocity_from_diffusion_batch(const Mat& pred, const Mat& x_fm,
                                  const Vec& t_fm,
                                  const TrajectoryBridge& bridge,
                                  Parameterization p) {
    if (p == Parameterization::velocity) return pred;
    Mat out(pred.rows(), pred.cols());
    for (Eigen::Index i = 0; i < pred.rows(); ++i) {
        DmTime t_dm = bridge.t_fm_to_dm(FmTime{t_fm[i]});
        auto [alpha, sigma] = bridge.schedule().coeffs_at(t_dm);
        ConversionCoeffs c = conversion_coeffs(alpha, sigma, p);
        check_on_circle(alpha, sigma);
        out.row(i) = c.c_pred * pred.row(i) +
                     (c.c_state * (alpha + sigma)) * x_fm.row(i);
    }
    return out;
}

}  // namespace d2f
