#pragma once

#include <Eigen/Dense>

namespace couette {

/// exp(A) by Padé-13 scaling and squaring (Higham 2005 parameters).
Eigen::MatrixXcd expm_pade13(const Eigen::MatrixXcd& A);

}  // namespace couette
