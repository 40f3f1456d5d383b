// Copyright (C) 2026 d2f authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <ostream>
#include <string>

#include "d2f/bridge.hpp"
#include "d2f/sample.hpp"
#include "d2f/types.hpp"

namespace d2f {

/// Comma-separated rows, one sample per line, full double precision.
void write_samples_csv(const std::string& path, const Mat& samples);

/// Rows of (t, x...) along one path.
void write_trajectory_csv(const std::string& path, const Trajectory& traj);

/// (t_dm, t_fm, scale) triples at the given stride over [0, T].
void write_bridge_table(std::ostream& os, const TrajectoryBridge& bridge,
                        double step);
void write_bridge_table(const std::string& path, const TrajectoryBridge& bridge,
                        double step);

}  // namespace d2f
