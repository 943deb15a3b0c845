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

#include "hybridgen/scene.hpp"

#include <set>

#include "hybridgen/errors.hpp"

namespace hybridgen {
namespace {

bool same_shape(const SdfPrimitive& a, const SdfPrimitive& b) {
  if (a.index() != b.index()) return false;
  if (const auto* s = std::get_if<Sphere>(&a)) {
    const auto& o = std::get<Sphere>(b);
    return s->center == o.center && s->radius == o.radius;
  }
  if (const auto* x = std::get_if<Box>(&a)) {
    const auto& o = std::get<Box>(b);
    return x->center == o.center && x->half_extents == o.half_extents &&
           x->orientation.coeffs() == o.orientation.coeffs();
  }
  const auto& c = std::get<Capsule>(a);
  const auto& o = std::get<Capsule>(b);
  return c.a == o.a && c.b == o.b && c.radius == o.radius;
}

}  // namespace

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::D0: return "D0";
    case Variant::D1: return "D1";
    case Variant::D2: return "D2";
  }
  return "D0";
}

Variant variant_from_string(std::string_view s) {
  if (s == "D0") return Variant::D0;
  if (s == "D1") return Variant::D1;
  if (s == "D2") return Variant::D2;
  throw ValidationError("unknown variant '" + std::string(s) + "'");
}

std::optional<std::size_t> SceneDescription::find(std::string_view id) const {
  for (std::size_t i = 0; i < objects.size(); ++i) {
    if (objects[i].id == id) return i;
  }
  return std::nullopt;
}

const SceneObject& SceneDescription::object(std::string_view id) const {
  if (auto i = find(id)) return objects[*i];
  throw ValidationError("scene has no object '" + std::string(id) + "'");
}

SceneObject& SceneDescription::object(std::string_view id) {
  if (auto i = find(id)) return objects[*i];
  throw ValidationError("scene has no object '" + std::string(id) + "'");
}

std::vector<Vec3> SceneDescription::world_keypoints() const {
  std::vector<Vec3> out;
  for (const auto& o : objects) {
    for (const auto& k : o.keypoints) out.push_back(o.pose.transform_point(k));
  }
  return out;
}

std::optional<int> SceneDescription::first_keypoint_id(std::string_view object_id) const {
  int id = 1;
  for (const auto& o : objects) {
    if (o.id == object_id) {
      if (o.keypoints.empty()) return std::nullopt;
      return id;
    }
    id += static_cast<int>(o.keypoints.size());
  }
  return std::nullopt;
}

SdfEnvironment SceneDescription::obstacles(std::string_view skip) const {
  SdfEnvironment env;
  env.workspace = workspace;
  for (const auto& o : objects) {
    if (o.obstacle && o.id != skip) env.primitives.push_back(transformed(o.shape, o.pose));
  }
  return env;
}

void validate(const SceneDescription& scene) {
  std::set<std::string> ids;
  for (const auto& o : scene.objects) {
    if (!ids.insert(o.id).second) throw ValidationError("duplicate object id '" + o.id + "'");
    validate(o.shape);
    if (!is_finite(o.pose)) throw ValidationError("object '" + o.id + "' has a non-finite pose");
    if (!scene.workspace.contains(o.pose.translation()))
      throw ValidationError("object '" + o.id + "' lies outside the workspace");
  }
}

bool operator==(const SceneObject& a, const SceneObject& b) {
  return a.id == b.id && a.pose == b.pose && same_shape(a.shape, b.shape) &&
         a.grasp_point == b.grasp_point && a.keypoints == b.keypoints && a.footprint == b.footprint &&
         a.obstacle == b.obstacle && a.graspable == b.graspable;
}

bool operator==(const SceneDescription& a, const SceneDescription& b) {
  return a.objects == b.objects && a.workspace.min == b.workspace.min &&
         a.workspace.max == b.workspace.max && a.variant == b.variant;
}

}  // namespace hybridgen
