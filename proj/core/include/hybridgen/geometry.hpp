// Copyright 2026 The hybridgen Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <span>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace hybridgen {

using Vec3 = Eigen::Vector3d;
using Quat = Eigen::Quaterniond;
using Mat4 = Eigen::Matrix4d;

/// Rigid transform in SE(3): unit quaternion rotation plus translation in meters.
///
/// The stored quaternion is always unit length and canonicalized to w >= 0, so
/// two equal rotations serialize identically. Poses are immutable values.
class Pose {
 public:
  Pose() : q_(Quat::Identity()), t_(Vec3::Zero()) {}
  Pose(const Quat& q, const Vec3& t);

  static Pose identity() { return {}; }
  static Pose from_translation(const Vec3& t) { return {Quat::Identity(), t}; }
  static Pose from_rotation(const Quat& q) { return {q, Vec3::Zero()}; }
  static Pose from_matrix(const Mat4& m);

  /// [qw, qx, qy, qz, tx, ty, tz], quaternion first.
  static Pose from_array(std::span<const double, 7> v);
  std::array<double, 7> to_array() const;

  const Quat& rotation() const { return q_; }
  const Vec3& translation() const { return t_; }
  Mat4 matrix() const;

  Vec3 transform_point(const Vec3& p) const { return q_ * p + t_; }
  Vec3 rotate(const Vec3& v) const { return q_ * v; }

  // Bitwise equality of the stored components.
  bool operator==(const Pose& other) const {
    return q_.coeffs() == other.q_.coeffs() && t_ == other.t_;
  }

 private:
  Quat q_;
  Vec3 t_;
};

/// a * b: apply b first, then a (homogeneous matrix product a·b).
Pose compose(const Pose& a, const Pose& b);
Pose inverse(const Pose& p);
inline Pose operator*(const Pose& a, const Pose& b) { return compose(a, b); }

/// Rotation angle between two unit quaternions in [0, pi]; insensitive to sign.
double geodesic_angle(const Quat& a, const Quat& b);

struct DistanceWeights {
  double translation = 1.0;  // 1/m
  double rotation = 0.1;     // 1/rad
};

/// w_t * |t_a - t_b| + w_r * geodesic_angle(r_a, r_b). Throws std::invalid_argument
/// on negative or all-zero weights.
double pose_distance(const Pose& a, const Pose& b, const DistanceWeights& w = {});

/// Linear translation blend and shortest-arc slerp; t in [0, 1] else std::domain_error.
Pose interpolate(const Pose& a, const Pose& b, double t);

/// Rotation by the axis-angle vector `omega` (|omega| radians about omega/|omega|).
Quat rotation_from_vector(const Vec3& omega);

/// Local increment: translation shifted by `dt`, rotation post-multiplied by exp(dtheta).
Pose apply_increment(const Pose& p, const Vec3& dt, const Vec3& dtheta);

/// Yaw-only rotation about world z.
inline Quat yaw_rotation(double yaw) { return Quat(Eigen::AngleAxisd(yaw, Vec3::UnitZ())); }

bool is_finite(const Pose& p);

}  // namespace hybridgen
