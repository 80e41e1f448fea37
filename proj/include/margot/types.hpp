#pragma once

#include <Eigen/Dense>

namespace margot {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

enum class PathMode { regular, hitting };

} // namespace margot
