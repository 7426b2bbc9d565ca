#pragma once

#include <Eigen/Dense>

namespace mrflow {

// Spatial objects live in R^n with n in {2, 3}; fixed upper bounds keep them off the heap.
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 3, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3>;

// Phase-space quantities in R^{2n}.
using StateVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 6, 1>;

// Sensitivity blocks, n x 2n.
using SensMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 6>;

}  // namespace mrflow
