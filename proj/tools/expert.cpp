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


#include "expert.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

#include "hybridgen/errors.hpp"
#include "hybridgen/kinematics.hpp"

namespace hybridgen::fixtures {
namespace {

constexpr double kHighZ = 0.22;
constexpr double kPregrasp = 0.06;
constexpr double kLift = 0.15;
constexpr double kOffsetYaw = 0.3;
constexpr double kOffsetNoise = 0.002;

// Piecewise interpolation through waypoints with equal parameter per leg.
Pose along(const std::vector<Pose>& wp, double s) {
  const double legs = static_cast<double>(wp.size() - 1);
  const double u = std::min(s * legs, legs);
  const std::size_t i = std::min(static_cast<std::size_t>(u), wp.size() - 2);
  return interpolate(wp[i], wp[i + 1], u - static_cast<double>(i));
}

Pose raised(const Pose& p, double dz) { return {p.rotation(), p.translation() + Vec3(0, 0, dz)}; }

double yaw_of(const Pose& p) {
  const Vec3 x = p.rotate(Vec3::UnitX());
  return std::atan2(x.y(), x.x());
}

struct Placement {
  Pose rel;       // object relative to target when done
  Vec3 approach;  // target-local offset of the pre-insert object pose
  bool release;
};

Placement placement(const TaskSpec& task, const SceneDescription& scene) {
  const auto& s = task.success;
  if (s.kind == "insertion") {
    const double yaw = yaw_of(scene.object(s.object).pose) - yaw_of(scene.object(s.target).pose);
    return {Pose(yaw_rotation(yaw), Vec3(0, 0, 0.03)), Vec3(0, 0, 0.10), true};
  }
  if (s.kind == "threading") {
    // Object axis along the hole axis, tip on the hole center.
    const Quat q = Quat::FromTwoVectors(s.object_axis, s.hole_axis);
    return {Pose(q, s.hole - q * s.tip), -0.06 * s.hole_axis, false};
  }
  throw ValidationError("no scripted expert for success kind '" + s.kind + "'");
}

}  // namespace

std::vector<TimeInterval> expert_intervals() {
  return {{static_cast<double>(kApproachEnd) / kFps, static_cast<double>(kGraspEnd) / kFps},
          {static_cast<double>(kTransitEnd) / kFps, static_cast<double>(kLength) / kFps}};
}

Quat down(double psi) {
  return yaw_rotation(psi) * Quat(Eigen::AngleAxisd(std::numbers::pi, Vec3::UnitY()));
}

Demonstration scripted_demo(const TaskSpec& task, const RobotSpec& robot, const SceneDescription& scene,
                            Rng& rng, const std::string& source_id) {
  if (task.subtasks.size() != 2 || !task.subtasks[1].grasp_object)
    throw ValidationError("scripted expert expects a grasp subtask followed by a place subtask");
  const SceneObject& obj = scene.object(task.subtasks[0].target_object);
  const SceneObject& target = scene.object(task.subtasks[1].target_object);

  const Vec3 noise(rng.uniform(-kOffsetNoise, kOffsetNoise), rng.uniform(-kOffsetNoise, kOffsetNoise), 0.0);
  const Pose offset(down(rng.uniform(-kOffsetYaw, kOffsetYaw)), obj.grasp_point + noise);
  const Placement pl = placement(task, scene);

  const Pose home = robot.home_pose();
  const Pose grasp = obj.pose * offset;
  const Pose pregrasp = raised(grasp, kPregrasp);
  const Pose high(grasp.rotation(), Vec3(grasp.translation().x(), grasp.translation().y(), kHighZ));
  const Pose place = target.pose * pl.rel * offset;
  const Pose pre = target.pose * Pose(pl.rel.rotation(), pl.rel.translation() + pl.approach) * offset;

  Demonstration d;
  d.source_id = source_id;
  d.scene = scene;
  auto push = [&](const Pose& p, double g) { d.poses.push_back({p, g, PoseLabel::R}); };

  for (std::size_t k = 0; k < kApproachEnd; ++k) push(along({home, high, pregrasp}, k / 20.0), 0.0);
  for (int k = 0; k < 7; ++k) push(interpolate(pregrasp, grasp, k / 6.0), 0.0);
  for (double g : {1.0 / 3.0, 2.0 / 3.0, 1.0}) push(grasp, g);

  const std::vector<Pose> carry{grasp, raised(grasp, kLift), raised(pre, 0.10), pre};
  for (std::size_t k = 0; k < kTransitEnd - kGraspEnd; ++k) push(along(carry, (k + 1) / 21.0), 1.0);
  for (int k = 0; k < 15; ++k) push(interpolate(pre, place, k / 14.0), 1.0);
  if (pl.release) {
    for (double g : {2.0 / 3.0, 1.0 / 3.0, 0.0}) push(place, g);
    push(raised(place, 0.05), 0.0);
    push(raised(place, 0.10), 0.0);
  } else {
    for (int k = 0; k < 5; ++k) push(place, 1.0);
  }

  const std::vector<SegmentBoundary> bounds{{kGraspEnd, task.subtasks[0].target_object, std::nullopt},
                                            {kLength, task.subtasks[1].target_object, task.subtasks[1].grasp_object}};
  d = attach_segments(std::move(d), bounds);
  const ExecutionTrace trace = run(d.poses, scene, task);
  d.grasp_offsets = trace.grasp_offsets;
  if (!trace.success) throw std::runtime_error("scripted demo failed");
  return d;
}

Dataset source_dataset(const TaskSpec& task, const RobotSpec& robot, Variant variant, std::size_t count,
                       std::uint64_t seed) {
  Dataset ds;
  ds.metadata = {task.name, variant, Stage::Source, seed, kFps};
  for (std::size_t i = 0; ds.demonstrations.size() < count && i < 10 * count; ++i) {
    Rng rng(derive_seed(seed, 0x66697874, i));
    const SceneDescription scene = sample_scene(task, variant, rng);
    char id[64];
    std::snprintf(id, sizeof id, "%s_demo_%03zu", task.name.c_str(), ds.demonstrations.size());
    try {
      Demonstration d = scripted_demo(task, robot, scene, rng, id);
      std::vector<Pose> poses;
      for (const auto& p : d.poses) poses.push_back(p.pose);
      if (ik_cost(poses, robot.chain, robot.home) > 1e-10) continue;
      ds.demonstrations.push_back(std::move(d));
    } catch (const std::runtime_error&) {
      continue;
    }
  }
  return ds;
}

ConstraintPlan expert_plan(const TaskSpec& task) {
  ConstraintPlan plan;
  plan.num_stages = 2;
  plan.grasp_keypoints = {1, -1};
  plan.release_keypoints = {-1, task.success.kind == "insertion" ? 1 : -1};
  plan.atoms.push_back(ConstraintAtom::point_offset(0, AtomRole::Subgoal, 0, 1, Vec3(0, 0, kPregrasp), 0.03));
  if (task.success.kind == "insertion") {
    plan.atoms.push_back(ConstraintAtom::point_offset(1, AtomRole::Subgoal, 1, 2, Vec3(0, 0, 0.05), 0.02));
  } else {
    plan.atoms.push_back(ConstraintAtom::point_offset(1, AtomRole::Subgoal, 1, 2, Vec3::Zero(), 0.11));
  }
  plan.atoms.push_back(ConstraintAtom::grasp_maintained(1, AtomRole::Path, 1));
  return plan;
}

std::string video_response(const std::vector<TimeInterval>& intervals) {
  return "The robot moves near the objects in two intervals.\n\n" + format_intervals(intervals);
}

std::string plan_response(const ConstraintPlan& plan) {
  return "Keypoint 1 is the grasped object and keypoint 2 sits on the target.\n\n```json\n" +
         to_json_string(plan) + "```\n";
}

}  // namespace hybridgen::fixtures
