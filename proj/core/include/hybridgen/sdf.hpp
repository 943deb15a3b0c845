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

#include <variant>
#include <vector>

#include "hybridgen/geometry.hpp"

namespace hybridgen {

struct Aabb {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();

  bool contains(const Vec3& p) const {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }
  bool contains(const Aabb& other) const { return contains(other.min) && contains(other.max); }
  Vec3 extent() const { return max - min; }
};

struct Sphere {
  Vec3 center = Vec3::Zero();
  double radius = 0.0;
};

struct Box {
  Vec3 center = Vec3::Zero();
  Vec3 half_extents = Vec3::Zero();
  Quat orientation = Quat::Identity();
};

struct Capsule {
  Vec3 a = Vec3::Zero();
  Vec3 b = Vec3::Zero();
  double radius = 0.0;
};

using SdfPrimitive = std::variant<Sphere, Box, Capsule>;

/// Exact signed distance: negative inside, positive outside.
double sdf(const SdfPrimitive& shape, const Vec3& p);

/// The primitive expressed in the frame `pose` maps into.
SdfPrimitive transformed(const SdfPrimitive& shape, const Pose& pose);

/// Throws ValidationError on non-positive radii / extents.
void validate(const SdfPrimitive& shape);

struct SdfEnvironment {
  std::vector<SdfPrimitive> primitives;
  Aabb workspace;
};

/// Minimum over primitives; +infinity for an empty environment.
double sdf(const SdfEnvironment& env, const Vec3& p);

}  // namespace hybridgen
