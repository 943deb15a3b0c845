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

#include <vector>

#include "hybridgen/geometry.hpp"

namespace hybridgen {

inline constexpr int kMaxJoints = 12;
using JointVector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxJoints, 1>;
using Jacobian = Eigen::Matrix<double, 6, Eigen::Dynamic, 0, 6, kMaxJoints>;

struct RevoluteJoint {
  Vec3 axis = Vec3::UnitZ();  // unit, in the joint frame
  Pose origin;                // parent frame -> joint frame at q = 0
  double lower = -3.14159;
  double upper = 3.14159;
};

/// Serial chain of revolute joints: base * (origin_i * Rot(axis_i, q_i))... * tool.
struct KinematicChain {
  std::vector<RevoluteJoint> joints;
  Pose base;
  Pose tool;

  int dof() const { return static_cast<int>(joints.size()); }
  JointVector clamp(const JointVector& q) const;
};

/// Throws ValidationError on empty chains, lo >= hi limits, or non-unit axes.
void validate(const KinematicChain& chain);

Pose forward_kinematics(const KinematicChain& chain, const JointVector& q);

/// Geometric Jacobian (rows: linear velocity, angular velocity) in the world frame.
Jacobian jacobian(const KinematicChain& chain, const JointVector& q);

/// 6-vector [dp; dtheta] taking `current` to `target`, rotation error as world axis-angle.
Eigen::Matrix<double, 6, 1> pose_error(const Pose& current, const Pose& target);

struct IkOptions {
  double damping = 1e-3;  // added to the diagonal of J J^T
  int max_iterations = 100;
  double tolerance = 1e-12;
};

struct IkResult {
  JointVector config;
  double residual = 0.0;  // sqrt(|dp|^2 + |dtheta|^2) at `config`
  int iterations = 0;
};

/// Damped least squares. Never throws on non-convergence; check `residual`.
IkResult ik_solve(const KinematicChain& chain, const Pose& target, const JointVector& seed,
                  const IkOptions& options = {});

/// Sum of squared IK residuals, each solve warm-started from the previous pose's config.
double ik_cost(const std::vector<Pose>& poses, const KinematicChain& chain, const JointVector& seed,
               const IkOptions& options = {});

}  // namespace hybridgen
