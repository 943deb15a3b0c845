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

#include "hybridgen/kinematics.hpp"

#include <algorithm>
#include <cmath>

#include "hybridgen/errors.hpp"

namespace hybridgen {

JointVector KinematicChain::clamp(const JointVector& q) const {
  JointVector out = q;
  for (int i = 0; i < dof(); ++i) out[i] = std::clamp(q[i], joints[i].lower, joints[i].upper);
  return out;
}

void validate(const KinematicChain& chain) {
  if (chain.joints.empty()) throw ValidationError("kinematic chain needs at least one joint");
  if (chain.dof() > kMaxJoints) throw ValidationError("kinematic chain exceeds the joint limit");
  for (const auto& j : chain.joints) {
    if (!(j.lower < j.upper)) throw ValidationError("joint limits require lower < upper");
    if (std::abs(j.axis.norm() - 1.0) > 1e-9) throw ValidationError("joint axis must be unit length");
  }
}

Pose forward_kinematics(const KinematicChain& chain, const JointVector& q) {
  Pose t = chain.base;
  for (int i = 0; i < chain.dof(); ++i) {
    const auto& j = chain.joints[i];
    t = t * j.origin * Pose::from_rotation(Quat(Eigen::AngleAxisd(q[i], j.axis)));
  }
  return t * chain.tool;
}

Jacobian jacobian(const KinematicChain& chain, const JointVector& q) {
  const int n = chain.dof();
  Jacobian jac(6, n);
  std::vector<Vec3> axes(n), origins(n);
  Pose t = chain.base;
  for (int i = 0; i < n; ++i) {
    const auto& j = chain.joints[i];
    t = t * j.origin;
    axes[i] = t.rotate(j.axis);
    origins[i] = t.translation();
    t = t * Pose::from_rotation(Quat(Eigen::AngleAxisd(q[i], j.axis)));
  }
  const Vec3 ee = (t * chain.tool).translation();
  for (int i = 0; i < n; ++i) {
    jac.block<3, 1>(0, i) = axes[i].cross(ee - origins[i]);
    jac.block<3, 1>(3, i) = axes[i];
  }
  return jac;
}

Eigen::Matrix<double, 6, 1> pose_error(const Pose& current, const Pose& target) {
  Eigen::Matrix<double, 6, 1> e;
  e.head<3>() = target.translation() - current.translation();
  Quat d = target.rotation() * current.rotation().conjugate();
  if (d.w() < 0.0) d.coeffs() = -d.coeffs();
  const double s = d.vec().norm();
  if (s < 1e-300) {
    e.tail<3>().setZero();
  } else {
    e.tail<3>() = d.vec() / s * (2.0 * std::atan2(s, d.w()));
  }
  return e;
}

IkResult ik_solve(const KinematicChain& chain, const Pose& target, const JointVector& seed,
                  const IkOptions& options) {
  IkResult result;
  result.config = chain.clamp(seed);
  Eigen::Matrix<double, 6, 1> err = pose_error(forward_kinematics(chain, result.config), target);
  double err_norm = err.norm();

  for (int it = 0; it < options.max_iterations && err_norm > options.tolerance; ++it) {
    result.iterations = it + 1;
    const Jacobian jac = jacobian(chain, result.config);
    Eigen::Matrix<double, 6, 6> jjt = jac * jac.transpose();
    jjt.diagonal().array() += options.damping;
    const JointVector step = jac.transpose() * jjt.ldlt().solve(err);

    // Halve the step until the residual drops; keeps the iteration monotone near
    // singular configurations.
    bool improved = false;
    double scale = 1.0;
    for (int ls = 0; ls < 12; ++ls, scale *= 0.5) {
      const JointVector trial = chain.clamp(result.config + scale * step);
      const auto trial_err = pose_error(forward_kinematics(chain, trial), target);
      const double trial_norm = trial_err.norm();
      if (trial_norm < err_norm) {
        result.config = trial;
        err = trial_err;
        err_norm = trial_norm;
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  result.residual = err_norm;
  return result;
}

double ik_cost(const std::vector<Pose>& poses, const KinematicChain& chain, const JointVector& seed,
               const IkOptions& options) {
  double total = 0.0;
  JointVector q = seed;
  for (const auto& p : poses) {
    const IkResult r = ik_solve(chain, p, q, options);
    total += r.residual * r.residual;
    q = r.config;
  }
  return total;
}

}  // namespace hybridgen
