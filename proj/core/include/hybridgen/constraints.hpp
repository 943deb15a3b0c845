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

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hybridgen/demos.hpp"
#include "hybridgen/geometry.hpp"

namespace hybridgen {

/// Task-relevant point; id 0 is always the end-effector.
struct Keypoint {
  int id = 0;
  Vec3 position = Vec3::Zero();  // world frame
};

enum class AtomKind { PointOffset, AxisAngle, HeightAbove, GraspMaintained, WithinRadius };
enum class AtomRole { Subgoal, Path };

std::string_view to_string(AtomKind k);
std::string_view to_string(AtomRole r);

/// One declarative constraint. Satisfied when its cost is <= 0.
///
///   point_offset    |k_i - (k_j + vec)| - value          (value: tolerance, m)
///   axis_angle      angle(k_i - k_j, vec) - value        (value: max angle, rad)
///   height_above    (k_j.z + value) - k_i.z              (value: min height, m)
///   grasp_maintained max(|ee - k_i| - eps_grasp, 0.5 - gripper)
///   within_radius   |k_i - vec| - value                  (vec: fixed world point)
struct ConstraintAtom {
  AtomKind kind = AtomKind::PointOffset;
  int stage = 0;
  AtomRole role = AtomRole::Subgoal;
  int i = 0;
  int j = 0;
  Vec3 vec = Vec3::Zero();
  double value = 0.0;

  static ConstraintAtom point_offset(int stage, AtomRole role, int i, int j, const Vec3& offset, double tolerance);
  static ConstraintAtom axis_angle(int stage, AtomRole role, int i, int j, const Vec3& axis, double max_angle);
  static ConstraintAtom height_above(int stage, AtomRole role, int i, int j, double min_height);
  static ConstraintAtom grasp_maintained(int stage, AtomRole role, int keypoint);
  static ConstraintAtom within_radius(int stage, AtomRole role, int i, const Vec3& point, double radius);

  bool operator==(const ConstraintAtom&) const = default;
};

struct ConstraintPlan {
  int num_stages = 0;
  std::vector<ConstraintAtom> atoms;
  std::vector<int> grasp_keypoints;    // per stage, -1 when the stage grasps nothing
  std::vector<int> release_keypoints;  // per stage, -1 when nothing is released

  bool operator==(const ConstraintPlan&) const = default;
};

inline constexpr double kGraspEpsilon = 0.01;  // m

/// Cost of one atom. `keypoints[id]` is keypoint `id`; entry 0 is replaced by the
/// end-effector translation. Throws ValidationError on a dangling id.
double eval_atom(const ConstraintAtom& atom, const Pose& ee_pose, std::span<const Vec3> keypoints,
                 double gripper, double eps_grasp = kGraspEpsilon);

/// Keypoints after the end-effector moved: the grasped keypoint (if >= 1) follows
/// ee_pose rigidly relative to `attach_ee`; all others stay put. Entry 0 becomes
/// the end-effector translation.
std::vector<Vec3> moved_keypoints(std::span<const Vec3> base_keypoints, const Pose& ee_pose,
                                  int grasped_keypoint, const Pose& attach_ee);

/// Keypoint positions along a trajectory for one stage.
class KeypointTracker {
 public:
  KeypointTracker() = default;
  /// `base` is id-indexed (entry 0 is ignored).
  explicit KeypointTracker(std::vector<Vec3> base, int grasped_keypoint = -1, Pose attach_ee = {})
      : base_(std::move(base)), grasped_(grasped_keypoint), attach_(attach_ee) {}

  std::vector<Vec3> at(const Pose& ee) const { return moved_keypoints(base_, ee, grasped_, attach_); }
  void at(const Pose& ee, std::vector<Vec3>& out) const;

  const std::vector<Vec3>& base() const { return base_; }
  int grasped_keypoint() const { return grasped_; }
  const Pose& attach_pose() const { return attach_; }

 private:
  std::vector<Vec3> base_{Vec3::Zero()};
  int grasped_ = -1;
  Pose attach_;
};

/// hinge(c)^2 = max(c, 0)^2.
inline double hinge_sq(double c) { return c > 0.0 ? c * c : 0.0; }

/// J_p for one stage: hinge^2 of every path atom at every R-labeled pose plus
/// hinge^2 of every sub-goal atom at the last R-labeled pose (0 without R poses).
double semantic_cost(std::span<const LabeledPose> traj, const ConstraintPlan& plan, int stage,
                     const KeypointTracker& tracker, double eps_grasp = kGraspEpsilon);

/// Worst atom cost at R poses (same domain as semantic_cost); -inf if none apply.
double max_violation(std::span<const LabeledPose> traj, const ConstraintPlan& plan, int stage,
                     const KeypointTracker& tracker, double eps_grasp = kGraspEpsilon);

struct PlanViolation {
  std::string rule;
  int stage = -1;  // -1 when not stage-specific
  std::string message;
};

/// Structural checks. `num_keypoints` (excluding the end-effector) enables the
/// dangling-id rule. Empty result iff the plan is well formed.
std::vector<PlanViolation> validate_plan(const ConstraintPlan& plan,
                                         std::optional<int> num_keypoints = std::nullopt);

std::string to_json_string(const ConstraintPlan& plan);
/// ParseError on malformed JSON or unknown atom kinds. Does not run validate_plan.
ConstraintPlan constraint_plan_from_json(std::string_view text);

}  // namespace hybridgen
