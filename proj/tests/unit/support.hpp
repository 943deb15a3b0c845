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


// Small builders shared by the unit tests.

#pragma once

#include <filesystem>
#include <string>

#include "hybridgen/demos.hpp"
#include "hybridgen/scene.hpp"

namespace testing {

inline std::filesystem::path source_dir() { return HYBRIDGEN_SOURCE_DIR; }

inline hybridgen::SceneObject sphere_object(const std::string& id, const hybridgen::Pose& pose, double r,
                                            bool obstacle, bool graspable) {
  hybridgen::SceneObject o;
  o.id = id;
  o.pose = pose;
  o.shape = hybridgen::Sphere{hybridgen::Vec3::Zero(), r};
  o.keypoints = {hybridgen::Vec3::Zero()};
  o.footprint = r;
  o.obstacle = obstacle;
  o.graspable = graspable;
  return o;
}

// A ring lying at (0.4, -0.2, 0.01) and a peg-like obstacle at (0.5, 0.2, 0).
inline hybridgen::SceneDescription two_object_scene() {
  using namespace hybridgen;
  SceneDescription s;
  s.workspace = {Vec3(0, -1, 0), Vec3(1, 1, 1)};
  s.objects.push_back(sphere_object("ring", Pose(yaw_rotation(0.2), Vec3(0.4, -0.2, 0.01)), 0.03, false, true));
  s.objects.push_back(sphere_object("peg", Pose(yaw_rotation(-0.4), Vec3(0.5, 0.2, 0.0)), 0.02, true, false));
  return s;
}

// n poses along a line, gripper open, all R, one segment targeting "ring".
inline hybridgen::Demonstration line_demo(std::size_t n, const std::string& id = "demo") {
  using namespace hybridgen;
  Demonstration d;
  d.source_id = id;
  d.scene = two_object_scene();
  for (std::size_t i = 0; i < n; ++i)
    d.poses.push_back({Pose::from_translation(Vec3(0.3 + 0.01 * static_cast<double>(i), 0, 0.2)), 0.0, PoseLabel::R});
  d.segments = {{0, n, "ring", std::nullopt}};
  return d;
}

}  // namespace testing
