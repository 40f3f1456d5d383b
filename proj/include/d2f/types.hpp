// Copyright (C) 2026 d2f authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <Eigen/Dense>

namespace d2f {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;  // batches are row-major logically: one sample per row

}  // namespace d2f
