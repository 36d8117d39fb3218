#pragma once

#include <Eigen/Dense>

namespace dcinv {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

}  // namespace dcinv
