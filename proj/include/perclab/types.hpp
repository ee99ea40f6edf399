#pragma once

#include <Eigen/Dense>

namespace perclab {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
// Unscaled lattice coordinates; the physical point is site / n.
using Site = Eigen::VectorXi;

}  // namespace perclab
