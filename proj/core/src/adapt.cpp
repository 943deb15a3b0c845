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

#include "hybridgen/adapt.hpp"

#include "hybridgen/errors.hpp"

namespace hybridgen {

Pose transform_grasp(const AdaptationContext& ctx) {
  return ctx.new_target_world * inverse(ctx.src_target_world) * ctx.src_grasp_world;
}

Pose transform_endeffector(const AdaptationContext& ctx, const Pose& src_ee) {
  if (!is_finite(src_ee)) throw ValidationError("non-finite source end-effector pose");
  return transform_grasp(ctx) * ctx.grasp_offset;
}

std::vector<LabeledPose> adapt_segment(std::span<const LabeledPose> segment, const Pose& src_target_world,
                                       const Pose& new_target_world, const Pose& src_offset,
                                       const std::optional<Pose>& new_offset) {
  const Pose inv_src_offset = inverse(src_offset);
  AdaptationContext ctx{src_target_world, Pose{}, new_target_world, new_offset.value_or(src_offset)};
  std::vector<LabeledPose> out;
  out.reserve(segment.size());
  for (const auto& p : segment) {
    ctx.src_grasp_world = p.pose * inv_src_offset;
    out.push_back({transform_endeffector(ctx, p.pose), p.gripper, p.label});
  }
  return out;
}

std::vector<LabeledPose> adapt_demo_segment(const Demonstration& demo, std::size_t segment_index,
                                            const SceneDescription& new_scene,
                                            const std::map<std::string, Pose>& new_offsets) {
  const auto& seg = demo.segments.at(segment_index);
  Pose src_offset;
  std::optional<Pose> new_offset;
  if (seg.grasp_object) {
    const auto it = demo.grasp_offsets.find(*seg.grasp_object);
    if (it == demo.grasp_offsets.end())
      throw ValidationError("demonstration '" + demo.source_id + "' has no grasp offset for '" +
                            *seg.grasp_object + "'");
    src_offset = it->second;
    if (const auto n = new_offsets.find(*seg.grasp_object); n != new_offsets.end()) new_offset = n->second;
  }
  const std::span<const LabeledPose> poses(demo.poses.data() + seg.start, seg.size());
  return adapt_segment(poses, demo.scene.object(seg.target_object).pose,
                       new_scene.object(seg.target_object).pose, src_offset, new_offset);
}

Demonstration adapt_demo_stage2(const Demonstration& demo, const SceneDescription& new_scene,
                                const GraspCandidate& selected) {
  if (selected.source_demo_id != demo.source_id)
    throw ValidationError("selected candidate '" + selected.source_demo_id + "' does not belong to '" +
                          demo.source_id + "'");
  Demonstration out = demo;
  for (std::size_t s = 0; s < demo.segments.size(); ++s) {
    auto adapted = adapt_demo_segment(demo, s, new_scene);
    std::copy(adapted.begin(), adapted.end(), out.poses.begin() + static_cast<std::ptrdiff_t>(demo.segments[s].start));
  }
  out.scene = new_scene;
  out.source_id = demo.source_id;
  return out;
}

}  // namespace hybridgen
