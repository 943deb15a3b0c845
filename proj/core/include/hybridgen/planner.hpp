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

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "hybridgen/constraints.hpp"
#include "hybridgen/demos.hpp"
#include "hybridgen/kinematics.hpp"
#include "hybridgen/sdf.hpp"

namespace hybridgen {

struct PlanWeights {
  double semantic = 100.0;   // lambda_p
  double collision = 1.0;    // lambda_c
  double smoothness = 0.1;   // lambda_l
  double ik = 20.0;          // lambda_ik

  bool operator==(const PlanWeights&) const = default;
};

struct PlanOptions {
  int max_iters = 500;
  double tol = 1e-6;               // relative change of the total cost
  int restarts = 3;                // extra runs from perturbed starts while infeasible
  double collision_margin = 0.02;  // m
  double feasibility_eps = 1e-3;   // hard-atom slack
  double beta = 0.1;               // m^2 / rad^2, rotation weight in J_l
  double fd_step = 1e-6;
  double restart_noise = 0.04;     // m, uniform translation jitter for restarts
  std::uint64_t seed = 0;
  IkOptions ik;

  bool operator==(const PlanOptions&) const = default;
};

/// Replanning instance. R-labeled poses are free, D-labeled poses are fixed.
struct PlanProblem {
  std::vector<LabeledPose> trajectory;
  ConstraintPlan plan;
  int stage = 0;
  SdfEnvironment env;
  KinematicChain chain;
  JointVector ik_seed;            // warm start for the first free pose
  PlanWeights weights;
  std::vector<Keypoint> keypoints;  // ids 1..n, world frame at the start of the stage
  int grasped_keypoint = -1;        // follows the end-effector when >= 1
  Pose attach_pose;                 // end-effector pose at which it was grasped
  PlanOptions options;
};

struct CostBreakdown {
  double semantic = 0.0;    // J_p
  double collision = 0.0;   // J_c
  double smoothness = 0.0;  // J_l
  double ik = 0.0;          // J_ik
  double total = 0.0;
};

struct PlanResult {
  std::vector<LabeledPose> trajectory;
  CostBreakdown cost;
  int iterations = 0;
  bool converged = false;
  bool feasible = false;              // hard atoms within eps and clearance >= 0 at free poses
  std::vector<double> cost_history;   // accepted totals of the returned run
  double max_violation = 0.0;         // worst hard-atom cost at free poses
  double min_clearance = 0.0;         // over all poses
  int runs = 0;
};

/// Sum over poses of hinge(margin - sdf)^2.
double collision_cost(std::span<const LabeledPose> traj, const SdfEnvironment& env, double margin);

/// Sum over consecutive pairs of |dt|^2 + beta * angle^2; 0 for fewer than two poses.
double smoothness_cost(std::span<const LabeledPose> traj, double beta = 0.1);

/// Smallest sdf over the trajectory's translations.
double min_clearance(std::span<const LabeledPose> traj, const SdfEnvironment& env);

/// Throws ValidationError (no free poses, negative weights, bad chain, bad plan stage).
void validate(const PlanProblem& problem);

/// The optimizer's objective over local increments x (6 per free pose:
/// translation, then rotation vector relative to the initial pose). J_c, J_p and
/// J_ik are taken over free poses; J_l over every consecutive pair. IK solves
/// start from a per-pose seed cache refreshed by commit().
class PlanObjective {
 public:
  explicit PlanObjective(const PlanProblem& problem);

  int dimension() const { return 6 * static_cast<int>(free_.size()); }
  std::vector<LabeledPose> trajectory(const Eigen::VectorXd& x) const;
  CostBreakdown breakdown(const Eigen::VectorXd& x) const;
  double value(const Eigen::VectorXd& x) const { return breakdown(x).total; }
  /// Central differences, evaluated per free pose on the terms that pose touches.
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;
  /// Refreshes the IK seed cache from solves at x; never increases value(x).
  void commit(const Eigen::VectorXd& x);

  const std::vector<std::size_t>& free_indices() const { return free_; }

 private:
  double local_cost(std::size_t f, const Pose& pose, const Pose* prev, const Pose* next, double* ik_res) const;
  Pose pose_at(std::size_t f, const Eigen::VectorXd& x) const;

  const PlanProblem& problem_;
  std::vector<std::size_t> free_;
  std::vector<Pose> init_;
  std::vector<JointVector> seeds_;
  KeypointTracker tracker_;
  std::vector<ConstraintAtom> path_atoms_;
  std::vector<ConstraintAtom> subgoal_atoms_;
};

/// Optimizes the free poses (L-BFGS on finite-difference gradients, Armijo
/// backtracking, restarts from jittered starts while infeasible). D poses are
/// returned bit-identical.
PlanResult replan(const PlanProblem& problem);

struct Subsegment {
  std::vector<LabeledPose> trajectory;
  std::size_t begin = 0;  // [begin, end) in the input
  std::size_t end = 0;
  bool ok = false;        // false: no qualifying run, full input returned
};

/// Longest contiguous run with sdf >= 0 at every pose whose first and last poses
/// lie within `delta` meters of `start` and `goal`. Ties go to the earliest run.
Subsegment select_subsegment(std::span<const LabeledPose> traj, const SdfEnvironment& env, const Pose& start,
                             const Pose& goal, double delta = 0.05);

std::string to_json_string(const PlanProblem& problem);
PlanProblem plan_problem_from_json(std::string_view text);
std::string to_json_string(const PlanResult& result);

}  // namespace hybridgen
