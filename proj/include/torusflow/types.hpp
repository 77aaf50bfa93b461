#pragma once

#include <Eigen/Dense>

namespace torusflow {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using IntVec = Eigen::Matrix<long long, Eigen::Dynamic, 1>;
using IntMat = Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>;

/// Threshold under which a field value is treated as a zero.
inline constexpr double kEpsZero = 1e-12;

}  // namespace torusflow
