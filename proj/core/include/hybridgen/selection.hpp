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

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "hybridgen/geometry.hpp"
#include "hybridgen/rng.hpp"

namespace hybridgen {

struct Demonstration;

/// One source segment as a selection candidate.
struct GraspCandidate {
  std::string source_demo_id;
  std::size_t segment_index = 0;
  Pose rel_grasp;  // T_{O'}^{G'}: grasped object (or end-effector) relative to the target
};

/// inverse(target) * grasp.
Pose relative_grasp(const Pose& grasp_pose_world, const Pose& target_pose_world);

/// Indices of the min(k, n) candidates closest to `current_rel`, ascending by
/// pose_distance; ties ordered by (source_demo_id, segment_index, input index).
/// Throws ValidationError on k < 1 or an empty candidate list.
std::vector<std::size_t> select_topk(const Pose& current_rel, std::span<const GraspCandidate> candidates,
                                     std::size_t k, const DistanceWeights& w = {});

/// Uniform draw from a nonempty index list.
std::size_t pick(std::span<const std::size_t> topk, Rng& rng);

/// Candidate for segment `segment_index` of `demo`, measured at the segment's
/// first pose. Grasp segments use the grasped object pose derived from the
/// end-effector and grasp offset; others use the end-effector itself.
GraspCandidate make_candidate(const Demonstration& demo, std::size_t segment_index);

}  // namespace hybridgen
