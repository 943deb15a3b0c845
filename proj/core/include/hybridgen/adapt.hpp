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

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hybridgen/demos.hpp"
#include "hybridgen/geometry.hpp"
#include "hybridgen/selection.hpp"

namespace hybridgen {

/// Source and new placements for one adapted pose. For segments without a
/// grasped object the "grasp" frame is the end-effector and grasp_offset is
/// the identity.
struct AdaptationContext {
  Pose src_target_world;  // T_{W'}^{O'}
  Pose src_grasp_world;   // T_{W'}^{G'}
  Pose new_target_world;  // T_W^O
  Pose grasp_offset;      // T_G^E used in the new scene
};

/// T_W^G = T_W^O * inverse(T_{W'}^{O'}) * T_{W'}^{G'}.
Pose transform_grasp(const AdaptationContext& ctx);

/// T_W^E = transform_grasp(ctx) * T_G^E. `src_ee` is only checked for finiteness;
/// the source grasp frame in `ctx` carries its information.
Pose transform_endeffector(const AdaptationContext& ctx, const Pose& src_ee);

/// Adapts every pose of a source segment. The source grasp frame of pose i is
/// src_ee_i * inverse(src_offset); the new end-effector uses `new_offset`
/// (defaults to `src_offset`). Gripper values and labels are preserved.
std::vector<LabeledPose> adapt_segment(std::span<const LabeledPose> segment, const Pose& src_target_world,
                                       const Pose& new_target_world, const Pose& src_offset,
                                       const std::optional<Pose>& new_offset = std::nullopt);

/// Segment `segment_index` of `demo` adapted into `new_scene`. `new_offsets`
/// overrides the grasp offset per grasped object.
std::vector<LabeledPose> adapt_demo_segment(const Demonstration& demo, std::size_t segment_index,
                                            const SceneDescription& new_scene,
                                            const std::map<std::string, Pose>& new_offsets = {});

/// Whole-trajectory adaptation: every segment of `demo` adapted into `new_scene`
/// regardless of labels. `selected` must name `demo`; it is recorded as provenance.
/// Throws ValidationError when a grasp segment lacks its grasp offset.
Demonstration adapt_demo_stage2(const Demonstration& demo, const SceneDescription& new_scene,
                                const GraspCandidate& selected);

}  // namespace hybridgen
