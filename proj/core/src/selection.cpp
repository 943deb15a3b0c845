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

#include "hybridgen/selection.hpp"

#include <algorithm>
#include <numeric>
#include <tuple>

#include "hybridgen/demos.hpp"
#include "hybridgen/errors.hpp"

namespace hybridgen {

Pose relative_grasp(const Pose& grasp_pose_world, const Pose& target_pose_world) {
  return inverse(target_pose_world) * grasp_pose_world;
}

std::vector<std::size_t> select_topk(const Pose& current_rel, std::span<const GraspCandidate> candidates,
                                     std::size_t k, const DistanceWeights& w) {
  if (k < 1) throw ValidationError("k must be >= 1");
  if (candidates.empty()) throw ValidationError("select_topk needs at least one candidate");
  std::vector<double> dist(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i)
    dist[i] = pose_distance(current_rel, candidates[i].rel_grasp, w);
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto less = [&](std::size_t a, std::size_t b) {
    return std::tie(dist[a], candidates[a].source_demo_id, candidates[a].segment_index, a) <
           std::tie(dist[b], candidates[b].source_demo_id, candidates[b].segment_index, b);
  };
  const std::size_t m = std::min(k, candidates.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m), order.end(), less);
  order.resize(m);
  return order;
}

std::size_t pick(std::span<const std::size_t> topk, Rng& rng) {
  if (topk.empty()) throw ValidationError("pick needs a nonempty list");
  return topk[rng.index(topk.size())];
}

GraspCandidate make_candidate(const Demonstration& demo, std::size_t segment_index) {
  const auto& seg = demo.segments.at(segment_index);
  const Pose& target = demo.scene.object(seg.target_object).pose;
  Pose grasp = demo.poses.at(seg.start).pose;
  if (seg.grasp_object) grasp = grasp * inverse(demo.grasp_offsets.at(*seg.grasp_object));
  return {demo.source_id, segment_index, relative_grasp(grasp, target)};
}

}  // namespace hybridgen
