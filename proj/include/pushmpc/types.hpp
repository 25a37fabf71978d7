#pragma once

#include <Eigen/Dense>

namespace pushmpc {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Vec5 = Eigen::Matrix<double, 5, 1>;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using VecX = Eigen::VectorXd;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Mat5 = Eigen::Matrix<double, 5, 5>;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using MatX = Eigen::MatrixXd;
using Mat34 = Eigen::Matrix<double, 3, 4>;
using Mat52 = Eigen::Matrix<double, 5, 2>;
using Mat54 = Eigen::Matrix<double, 5, 4>;

/// Wraps an angle to (-pi, pi].
double wrap_angle(double a);

/// 2x2 rotation matrix for angle a.
Mat2 rotation2(double a);

}  // namespace pushmpc
