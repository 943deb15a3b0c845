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

#include "hybridgen/sdf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hybridgen/errors.hpp"

namespace hybridgen {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double box_sdf(const Box& b, const Vec3& p) {
  const Vec3 local = b.orientation.conjugate() * (p - b.center);
  const Vec3 q = local.cwiseAbs() - b.half_extents;
  const double outside = q.cwiseMax(0.0).norm();
  const double inside = std::min(q.maxCoeff(), 0.0);
  return outside + inside;
}

double capsule_sdf(const Capsule& c, const Vec3& p) {
  const Vec3 ab = c.b - c.a;
  const double len2 = ab.squaredNorm();
  const double h = len2 > 0.0 ? std::clamp((p - c.a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (p - (c.a + h * ab)).norm() - c.radius;
}

}  // namespace

double sdf(const SdfPrimitive& shape, const Vec3& p) {
  return std::visit(Overloaded{
                        [&](const Sphere& s) { return (p - s.center).norm() - s.radius; },
                        [&](const Box& b) { return box_sdf(b, p); },
                        [&](const Capsule& c) { return capsule_sdf(c, p); },
                    },
                    shape);
}

SdfPrimitive transformed(const SdfPrimitive& shape, const Pose& pose) {
  return std::visit(Overloaded{
                        [&](const Sphere& s) -> SdfPrimitive {
                          return Sphere{pose.transform_point(s.center), s.radius};
                        },
                        [&](const Box& b) -> SdfPrimitive {
                          return Box{pose.transform_point(b.center), b.half_extents,
                                     (pose.rotation() * b.orientation).normalized()};
                        },
                        [&](const Capsule& c) -> SdfPrimitive {
                          return Capsule{pose.transform_point(c.a), pose.transform_point(c.b), c.radius};
                        },
                    },
                    shape);
}

void validate(const SdfPrimitive& shape) {
  std::visit(Overloaded{
                 [](const Sphere& s) {
                   if (!(s.radius > 0.0)) throw ValidationError("sphere radius must be > 0");
                 },
                 [](const Box& b) {
                   if (!(b.half_extents.array() > 0.0).all())
                     throw ValidationError("box half extents must be > 0");
                 },
                 [](const Capsule& c) {
                   if (!(c.radius > 0.0)) throw ValidationError("capsule radius must be > 0");
                 },
             },
             shape);
}

double sdf(const SdfEnvironment& env, const Vec3& p) {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& prim : env.primitives) d = std::min(d, sdf(prim, p));
  return d;
}

}  // namespace hybridgen
