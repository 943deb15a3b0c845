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

// JSON mapping shared by the file formats. Private to the library.
#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "hybridgen/constraints.hpp"
#include "hybridgen/demos.hpp"
#include "hybridgen/kinematics.hpp"
#include "hybridgen/errors.hpp"
#include "hybridgen/geometry.hpp"
#include "hybridgen/scene.hpp"
#include "hybridgen/sdf.hpp"

namespace hybridgen {

void to_json(nlohmann::json& j, const Pose& p);
void from_json(const nlohmann::json& j, Pose& p);
void to_json(nlohmann::json& j, const Aabb& b);
void from_json(const nlohmann::json& j, Aabb& b);
void to_json(nlohmann::json& j, const SdfPrimitive& s);
void from_json(const nlohmann::json& j, SdfPrimitive& s);
void to_json(nlohmann::json& j, const SceneObject& o);
void from_json(const nlohmann::json& j, SceneObject& o);
void to_json(nlohmann::json& j, const SceneDescription& s);
void from_json(const nlohmann::json& j, SceneDescription& s);
void to_json(nlohmann::json& j, const SubtaskSegment& s);
void from_json(const nlohmann::json& j, SubtaskSegment& s);
void to_json(nlohmann::json& j, const Demonstration& d);
void from_json(const nlohmann::json& j, Demonstration& d);
void to_json(nlohmann::json& j, const DatasetMetadata& m);
void from_json(const nlohmann::json& j, DatasetMetadata& m);
void to_json(nlohmann::json& j, const ConstraintPlan& p);
void from_json(const nlohmann::json& j, ConstraintPlan& p);
void to_json(nlohmann::json& j, const SdfEnvironment& e);
void from_json(const nlohmann::json& j, SdfEnvironment& e);
void to_json(nlohmann::json& j, const KinematicChain& c);
void from_json(const nlohmann::json& j, KinematicChain& c);
void to_json(nlohmann::json& j, const LabeledPose& p);
void from_json(const nlohmann::json& j, LabeledPose& p);

namespace codec {

nlohmann::json vec(const Vec3& v);
Vec3 vec(const nlohmann::json& j);
nlohmann::json joints(const JointVector& q);
JointVector joints(const nlohmann::json& j);

/// Parses text; syntax errors become ParseError with 1-based line and column.
nlohmann::json parse_document(std::string_view text);

/// Runs `fn`, turning nlohmann type / missing-key errors into ParseError.
template <typename F>
auto decode(std::string_view what, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("invalid " + std::string(what) + " document: " + e.what());
  } catch (const std::invalid_argument& e) {
    throw ParseError("invalid " + std::string(what) + " document: " + e.what());
  }
}

/// Canonical compact text: sorted keys, shortest round-trip numbers.
inline std::string canonical(const nlohmann::json& j) { return j.dump(); }

}  // namespace codec
}  // namespace hybridgen
