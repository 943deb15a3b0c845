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

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hybridgen/demos.hpp"
#include "hybridgen/kinematics.hpp"
#include "hybridgen/rng.hpp"
#include "hybridgen/scene.hpp"

namespace hybridgen {

/// Initial-placement distribution of one object. Fixed objects sit at `center`
/// with the mid-range yaw.
struct ObjectPlacement {
  Vec3 center = Vec3::Zero();
  Vec3 half_extent = Vec3::Zero();  // sampling box half-size around center
  double yaw_lo = 0.0;
  double yaw_hi = 0.0;
  bool fixed = false;
};

struct VariantSpec {
  std::map<std::string, ObjectPlacement> placements;  // by object id
};

struct SubtaskSpec {
  std::string target_object;
  std::optional<std::string> grasp_object;
};

/// Geometric success test evaluated on the final step of a trace.
///   insertion: `object` center within radius of the target's vertical axis, at
///              most max_height above the target origin, released.
///   threading: object tip within radius of the target hole, with the object
///              axis within max_angle of the hole axis.
struct SuccessSpec {
  std::string kind;
  std::string object;
  std::string target;
  double radius = 0.01;
  double max_height = 0.05;
  Vec3 tip = Vec3::Zero();          // object-local
  Vec3 object_axis = Vec3::UnitX(); // object-local
  Vec3 hole = Vec3::Zero();         // target-local
  Vec3 hole_axis = Vec3::UnitX();   // target-local
  double max_angle = 0.2;
};

struct TaskSpec {
  std::string name;
  std::string description;            // natural-language instruction used in prompts
  Aabb workspace;
  std::vector<SceneObject> objects;   // prototypes; poses are replaced when sampling
  std::vector<SubtaskSpec> subtasks;
  SuccessSpec success;
  std::map<Variant, VariantSpec> variants;

  const VariantSpec& variant(Variant v) const;
};

/// Arm used for IK feasibility, with its rest configuration.
struct RobotSpec {
  KinematicChain chain;
  JointVector home;

  Pose home_pose() const { return forward_kinematics(chain, home); }
};

struct TaskConfig {
  RobotSpec robot;
  std::vector<TaskSpec> tasks;

  const TaskSpec& task(std::string_view name) const;  // ValidationError when unknown
};

TaskConfig task_config_from_json(std::string_view text);
TaskConfig load_task_config(const std::filesystem::path& path);
/// Checks object references, placement regions and the robot chain.
void validate(const TaskConfig& config);

/// Draws one scene. Rejection-resamples on overlap (an object's footprint
/// reaching into another's shape) up to 100 times, then throws SamplingError.
SceneDescription sample_scene(const TaskSpec& task, Variant variant, Rng& rng);
SceneDescription sample_scene(const TaskSpec& task, const VariantSpec& spec, Variant variant, Rng& rng);

struct ExecutionStep {
  Pose ee;
  double gripper = 0.0;
  std::optional<std::string> attached;
  std::vector<Pose> object_poses;  // scene object order
};

enum class EventType { Attach, Detach, Collision };

struct ExecutionEvent {
  EventType type = EventType::Attach;
  std::size_t step = 0;
  std::string object;  // attached/detached object, or the obstacle hit
};

struct ExecutionTrace {
  std::vector<std::string> object_ids;  // order of ExecutionStep::object_poses
  std::vector<ExecutionStep> steps;
  std::vector<ExecutionEvent> events;
  std::map<std::string, Pose> grasp_offsets;  // T_G^E frozen at the first attach of each object
  std::vector<std::string> grasped;           // objects attached at some point, in order
  bool collision = false;
  bool success = false;                       // filled by check_success via run()

  /// Scene with object poses of the final step.
  SceneDescription final_scene(const SceneDescription& initial) const;
};

struct ExecuteOptions {
  double grasp_epsilon = 0.01;  // m
};

/// Kinematic playback of end-effector poses with grasp attach/detach and
/// obstacle penetration events. Pure in (traj, scene).
ExecutionTrace execute(std::span<const LabeledPose> traj, const SceneDescription& scene,
                       const ExecuteOptions& options = {});

/// Task predicate on the final step. Throws ValidationError for unknown kinds.
bool check_success(const ExecutionTrace& trace, const TaskSpec& task);

/// execute + check_success; sets trace.success (false on any collision).
ExecutionTrace run(std::span<const LabeledPose> traj, const SceneDescription& scene, const TaskSpec& task);

std::string to_json_string(const ExecutionTrace& trace);

}  // namespace hybridgen
