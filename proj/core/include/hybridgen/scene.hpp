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
#include <string>
#include <string_view>
#include <vector>

#include "hybridgen/geometry.hpp"
#include "hybridgen/sdf.hpp"

namespace hybridgen {

enum class Variant { D0, D1, D2 };

std::string_view to_string(Variant v);
Variant variant_from_string(std::string_view s);  // throws ValidationError

/// One rigid object placed in a scene. Geometry fields are object-local.
struct SceneObject {
  std::string id;
  Pose pose;                    // T_W^O
  SdfPrimitive shape;           // local collision / overlap shape
  Vec3 grasp_point = Vec3::Zero();
  std::vector<Vec3> keypoints;  // task-relevant points, local frame
  double footprint = 0.0;       // radius used for overlap rejection and carried-object clearance
  bool obstacle = false;        // participates in collision checks
  bool graspable = false;

  Vec3 world_grasp_point() const { return pose.transform_point(grasp_point); }
};

struct SceneDescription {
  std::vector<SceneObject> objects;
  Aabb workspace;
  Variant variant = Variant::D0;

  /// Throws ValidationError for unknown ids.
  const SceneObject& object(std::string_view id) const;
  SceneObject& object(std::string_view id);
  std::optional<std::size_t> find(std::string_view id) const;

  /// World keypoints in object order; the i-th entry has keypoint id i + 1
  /// (id 0 is the end-effector).
  std::vector<Vec3> world_keypoints() const;

  /// Keypoint id of the first keypoint of `object_id`, if it has any.
  std::optional<int> first_keypoint_id(std::string_view object_id) const;

  /// Obstacle primitives in world coordinates, excluding `skip` if given.
  SdfEnvironment obstacles(std::string_view skip = {}) const;
};

/// Unique ids, positive shapes, object origins inside the workspace.
void validate(const SceneDescription& scene);

bool operator==(const SceneObject& a, const SceneObject& b);
bool operator==(const SceneDescription& a, const SceneDescription& b);

}  // namespace hybridgen
