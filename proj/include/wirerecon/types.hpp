#pragma once

#include <Eigen/Core>
#include <vector>

namespace wirerecon {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;
using Mat34 = Eigen::Matrix<double, 3, 4>;

template <int Dim>
using Point = Eigen::Matrix<double, Dim, 1>;

template <int Dim>
using Polyline = std::vector<Point<Dim>>;

}  // namespace wirerecon
