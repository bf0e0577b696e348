#pragma once

#include <Eigen/Dense>

namespace kam {

/// Matrix exponential: Padé of order 3 to 13 chosen by the 1-norm, with scaling and squaring.
Eigen::MatrixXcd expm(const Eigen::MatrixXcd& A);

/// Largest singular value.
double op_norm(const Eigen::Ref<const Eigen::MatrixXcd>& A);

/// ‖U*U − I‖ in the operator norm.
double unitarity_defect(const Eigen::MatrixXcd& U);

}  // namespace kam
