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


// Scripted expert used to synthesize the committed source demonstrations.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hybridgen/constraints.hpp"
#include "hybridgen/demos.hpp"
#include "hybridgen/gateway.hpp"
#include "hybridgen/simenv.hpp"

namespace hybridgen::fixtures {

// Pose index layout shared by every scripted demo (fps 10).
inline constexpr double kFps = 10.0;
inline constexpr std::size_t kApproachEnd = 20;  // R: home -> above the object
inline constexpr std::size_t kGraspEnd = 30;     // D: descend and close
inline constexpr std::size_t kTransitEnd = 50;   // R: lift and carry
inline constexpr std::size_t kLength = 70;       // D: insert (and release)

/// D intervals in seconds matching the layout above.
std::vector<TimeInterval> expert_intervals();

/// End-effector pointing down with yaw psi about world z.
Quat down(double psi);

/// One successful demonstration in `scene`, all poses labeled R. Segments are
/// attached; grasp_offsets come from executing the trajectory.
Demonstration scripted_demo(const TaskSpec& task, const RobotSpec& robot, const SceneDescription& scene,
                            Rng& rng, const std::string& source_id);

/// Up to `count` source demos on `variant`, skipping draws the expert fails.
Dataset source_dataset(const TaskSpec& task, const RobotSpec& robot, Variant variant, std::size_t count,
                       std::uint64_t seed);

/// Constraint plan the recorded proposal response carries for each task.
ConstraintPlan expert_plan(const TaskSpec& task);

/// Canned response texts.
std::string video_response(const std::vector<TimeInterval>& intervals);
std::string plan_response(const ConstraintPlan& plan);

}  // namespace hybridgen::fixtures
