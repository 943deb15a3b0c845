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

#include "hybridgen/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace hybridgen {
namespace {

// Renormalizing an already-unit quaternion can flip low bits; skipping it keeps
// serialization round-trips exact.
constexpr double kNormSlack = 1e-14;

Quat canonical(Quat q) {
  const double n2 = q.squaredNorm();
  if (!(n2 > 0.0) || !std::isfinite(n2)) throw std::invalid_argument("Pose: quaternion must be finite and nonzero");
  if (std::abs(n2 - 1.0) > kNormSlack) q.coeffs() /= std::sqrt(n2);
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  return q;
}

}  // namespace

Pose::Pose(const Quat& q, const Vec3& t) : q_(canonical(q)), t_(t) {}

Pose Pose::from_matrix(const Mat4& m) {
  const Eigen::Matrix3d r = m.topLeftCorner<3, 3>();
  return {Quat(r), m.topRightCorner<3, 1>()};
}

Pose Pose::from_array(std::span<const double, 7> v) {
  return {Quat(v[0], v[1], v[2], v[3]), Vec3(v[4], v[5], v[6])};
}

std::array<double, 7> Pose::to_array() const {
  return {q_.w(), q_.x(), q_.y(), q_.z(), t_.x(), t_.y(), t_.z()};
}

Mat4 Pose::matrix() const {
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = q_.toRotationMatrix();
  m.topRightCorner<3, 1>() = t_;
  return m;
}

Pose compose(const Pose& a, const Pose& b) {
  return {a.rotation() * b.rotation(), a.rotation() * b.translation() + a.translation()};
}

Pose inverse(const Pose& p) {
  const Quat qi = p.rotation().conjugate();
  return {qi, -(qi * p.translation())};
}

double geodesic_angle(const Quat& a, const Quat& b) {
  const Quat d = a.conjugate() * b;
  const double s = d.vec().norm();
  return 2.0 * std::atan2(s, std::abs(d.w()));
}

double pose_distance(const Pose& a, const Pose& b, const DistanceWeights& w) {
  if (w.translation < 0.0 || w.rotation < 0.0 || (w.translation == 0.0 && w.rotation == 0.0)) {
    throw std::invalid_argument("pose_distance: weights must be >= 0 and not both zero");
  }
  return w.translation * (a.translation() - b.translation()).norm() +
         w.rotation * geodesic_angle(a.rotation(), b.rotation());
}

Pose interpolate(const Pose& a, const Pose& b, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw std::domain_error("interpolate: t must lie in [0, 1]");
  if (t == 0.0) return a;
  if (t == 1.0) return b;
  return {a.rotation().slerp(t, b.rotation()), (1.0 - t) * a.translation() + t * b.translation()};
}

Quat rotation_from_vector(const Vec3& omega) {
  const double angle = omega.norm();
  if (angle < 1e-300) return Quat::Identity();
  return Quat(Eigen::AngleAxisd(angle, omega / angle));
}

Pose apply_increment(const Pose& p, const Vec3& dt, const Vec3& dtheta) {
  return {p.rotation() * rotation_from_vector(dtheta), p.translation() + dt};
}

bool is_finite(const Pose& p) {
  return p.rotation().coeffs().allFinite() && p.translation().allFinite();
}

}  // namespace hybridgen
