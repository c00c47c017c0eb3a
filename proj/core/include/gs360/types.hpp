// Copyright Contributors to the geosplat360 Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace gs360 {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

/// I/O failure (missing file, unwritable path, malformed header).
/// The CLI maps this to exit code 3.
class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Raised when an optimization run trips the divergence guard.
/// The CLI maps this to exit code 4.
class DivergenceError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

constexpr double kPi = 3.14159265358979323846;

} // namespace gs360
