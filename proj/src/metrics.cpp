// Copyright (C) 2026 d2f authors
// SPDX-License-Identifier: Apache-2.0
//

#include "d2f/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "d2f/rng.hpp"

namespace d2f {

namespace {

/// Exact squared W2 between two 1-D empirical distributions: integrate the
/// squared quantile gap over the merged breakpoints. Reduces to the mean of
/// squared sorted differences when the sizes match.
double w2_squared_1d(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const auto na = a.size(), nb = b.size();
    double total = 0.0, q = 0.0;
    size_t i = 0, j = 0;
    while (i < na && j < nb) {
        double qa = static_cast<double>(i + 1) / na;
        double qb = static_cast<double>(j + 1) / nb;
        double next = std::min(qa, qb);
        double diff = a[i] - b[j];
        total += (next - q) * diff * diff;
        q = next;
        if (qa <= next) ++i;
        if (qb <= next) ++j;
    }
    return total;
}

}  // namespace

double sliced_w2(const Mat& a, const Mat& b, int n_proj, std::uint64_t seed) {
    if (a.rows() == 0 || b.rows() == 0)
        throw std::invalid_argument("metrics: empty batch");
    if (a.cols() != b.cols())
        throw std::invalid_argument("metrics: dimension mismatch");
    if (n_proj < 1) throw std::invalid_argument("metrics: n_proj must be >= 1");

    Rng rng(seed, /*stream=*/0x73773232u);  // "sw2"
    const auto dim = a.cols();
    double total = 0.0;
    std::vector<double> pa(static_cast<size_t>(a.rows()));
    std::vector<double> pb(static_cast<size_t>(b.rows()));
    for (int p = 0; p < n_proj; ++p) {
        Vec dir(dim);
        double norm = 0.0;
        do {
            for (Eigen::Index c = 0; c < dim; ++c) dir[c] = rng.normal();
            norm = dir.norm();
        } while (norm == 0.0);
        dir /= norm;
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            pa[static_cast<size_t>(i)] = a.row(i).dot(dir);
        for (Eigen::Index i = 0; i < b.rows(); ++i)
            pb[static_cast<size_t>(i)] = b.row(i).dot(dir);
        total += w2_squared_1d(pa, pb);
    }
    return total / n_proj;
}

double mmd_rbf(const Mat& a, const Mat& b, double bandwidth) {
    if (a.rows() == 0 || b.rows() == 0)
        throw std::invalid_argument("metrics: empty batch");
    if (a.cols() != b.cols())
        throw std::invalid_argument("metrics: dimension mismatch");
    if (!(bandwidth > 0.0))
        throw std::invalid_argument("metrics: bandwidth must be positive");
    const double gamma = 1.0 / (2.0 * bandwidth * bandwidth);
    auto kernel_mean = [gamma](const Mat& x, const Mat& y) {
        double s = 0.0;
        for (Eigen::Index i = 0; i < x.rows(); ++i)
            for (Eigen::Index j = 0; j < y.rows(); ++j)
                s += std::exp(-gamma * (x.row(i) - y.row(j)).squaredNorm());
        return s / (static_cast<double>(x.rows()) * static_cast<double>(y.rows()));
    };
    // biased estimator: includes the diagonals, so self-distance is exactly 0
    return kernel_mean(a, a) + kernel_mean(b, b) - 2.0 * kernel_mean(a, b);
}

double median_bandwidth(const Mat& data, int max_points) {
    if (data.rows() < 2)
        throw std::invalid_argument("metrics: bandwidth needs >= 2 points");
    const auto n = std::min<Eigen::Index>(data.rows(), max_points);
    std::vector<double> dists;
    dists.reserve(static_cast<size_t>(n) * (n - 1) / 2);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j)
            dists.push_back((data.row(i) - data.row(j)).norm());
    auto mid = dists.begin() + static_cast<std::ptrdiff_t>(dists.size() / 2);
    std::nth_element(dists.begin(), mid, dists.end());
    return *mid;
}

DistanceReport distance_report(const Mat& a, const Mat& b, int n_proj,
                               std::uint64_t seed, double bandwidth) {
    DistanceReport r;
    r.sliced_w2 = sliced_w2(a, b, n_proj, seed);
    r.mmd_rbf = mmd_rbf(a, b, bandwidth);
    r.n_used = static_cast<int>(std::min(a.rows(), b.rows()));
    r.projections = n_proj;
    r.bandwidth = bandwidth;
    return r;
}

}  // namespace d2f
