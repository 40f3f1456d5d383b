// Copyright (C) 2026 d2f authors
// SPDX-License-Identifier: Apache-2.0
//

#include "d2f/io.hpp"

#include <fstream>
#include <iomanip>
#include <stdexcept>

namespace d2f {

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("io: cannot write " + path);
    os << std::setprecision(17);
    return os;
}

}  // namespace

void write_samples_csv(const std::string& path, const Mat& samples) {
    std::ofstream os = open_out(path);
    for (Eigen::Index i = 0; i < samples.rows(); ++i) {
        for (Eigen::Index c = 0; c < samples.cols(); ++c) {
            if (c) os << ',';
            os << samples(i, c);
        }
        os << '\n';
    }
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
    std::ofstream os = open_out(path);
    for (Eigen::Index i = 0; i < traj.states.rows(); ++i) {
        os << traj.times[static_cast<size_t>(i)];
        for (Eigen::Index c = 0; c < traj.states.cols(); ++c)
            os << ',' << traj.states(i, c);
        os << '\n';
    }
}

void write_bridge_table(std::ostream& os, const TrajectoryBridge& bridge,
                        double step) {
    if (!(step > 0.0)) throw std::invalid_argument("io: table step must be > 0");
    os << std::setprecision(17);
    os << "t_dm,t_fm,scale\n";
    const double T = static_cast<double>(bridge.schedule().steps());
    for (long i = 0;; ++i) {
        double t = static_cast<double>(i) * step;
        if (t > T) break;
        DmTime dm{t};
        os << t << ',' << bridge.t_dm_to_fm(dm).value << ','
           << bridge.scale_at(dm) << '\n';
    }
}

void write_bridge_table(const std::string& path, const TrajectoryBridge& bridge,
                        double step) {
    std::ofstream os = open_out(path);
    write_bridge_table(os, bridge, step);
}

}  // namespace d2f
