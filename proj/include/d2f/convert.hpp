// Copyright (C) 2026 d2f authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include "d2f/bridge.hpp"
#include "d2f/types.hpp"

namespace d2f {

/// What the network head was trained to predict.
enum class Parameterization {
    epsilon,   // the noise
    v,         // alpha*eps - sigma*x0
    x0,        // the clean data
    velocity,  // already an FM velocity; conversion is the identity
};

/// Clean-data / noise estimates recovered from a diffusion prediction.
/// Recomposing alpha*x0_hat + sigma*xT_hat reproduces the input state.
struct EndpointEstimate {
    Vec x0_hat;  // estimated clean data
    Vec xT_hat;  // estimated noise
};

struct VelocityEstimate {
    Vec v;  // data units per unit FM time
};

/// Coefficients of the affine conversion v = c_pred * pred + c_state * x_dm.
/// Exposed separately because training only needs c_pred to push gradients
/// through the conversion.
struct ConversionCoeffs {
    double c_pred;
    double c_state;
};

ConversionCoeffs conversion_coeffs(double alpha, double sigma, Parameterization p);

/// Invert the diffusion interpolant x = alpha*x0 + sigma*xT around the
/// prediction. (alpha, sigma) must sit on (or near) the VP circle.
/// Singularities: epsilon at alpha = 0, x0 at sigma = 0.
EndpointEstimate estimate_endpoints(const Vec& pred, const Vec& x_dm,
                                    double alpha, double sigma,
                                    Parameterization p);

/// Same inversion, one sample per row, shared (alpha, sigma).
void estimate_endpoints_batch(const Mat& pred, const Mat& x_dm, double alpha,
                              double sigma, Parameterization p, Mat& x0_hat,
                              Mat& xT_hat);

/// The objective change: map an FM query point to the diffusion trajectory,
/// invert the prediction into endpoint estimates there, and return the FM
/// velocity x0_hat - xT_hat. For p = velocity the prediction passes through
/// unchanged.
VelocityEstimate velocity_from_diffusion(const Vec& pred, const Vec& x_fm,
                                         FmTime t_fm,
                                         const TrajectoryBridge& bridge,
                                         Parameterization p);

/// Row-wise batch form: one sample and one FM time per row.
Mat velocity_from_diffusion_batch(const Mat& pred, const Mat& x_fm,
                                  const Vec& t_fm,
                                  const TrajectoryBridge& bridge,
                                  Parameterization p);

}  // namespace d2f
