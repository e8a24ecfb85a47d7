#pragma once

#include <Eigen/Core>

namespace polyrisk {

using Real = double;
using Index = Eigen::Index;

using VecX = Eigen::Matrix<Real, Eigen::Dynamic, 1>;
using MatX = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;

}  // namespace polyrisk
