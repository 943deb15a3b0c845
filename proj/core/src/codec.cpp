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

#include "codec.hpp"

#include <array>

namespace hybridgen {

using nlohmann::json;

namespace codec {

json vec(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec(const json& j) {
  if (!j.is_array() || j.size() != 3) throw ParseError("expected a 3-vector, got " + j.dump());
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json joints(const JointVector& q) {
  json j = json::array();
  for (int i = 0; i < q.size(); ++i) j.push_back(q[i]);
  return j;
}

JointVector joints(const json& j) {
  if (!j.is_array() || j.size() > static_cast<std::size_t>(kMaxJoints))
    throw ParseError("expected a joint vector of at most " + std::to_string(kMaxJoints) + " entries");
  JointVector q(static_cast<int>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) q[static_cast<int>(i)] = j[i].get<double>();
  return q;
}

json parse_document(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // Byte offset -> line / column.
    const std::size_t offset = std::min<std::size_t>(e.byte, text.size());
    std::size_t line = 1, column = 1;
    for (std::size_t i = 0; i + 1 < offset; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ParseError("parse error at line " + std::to_string(line) + ", column " +
                         std::to_string(column) + ": " + e.what(),
                     line, column);
  }
}

}  // namespace codec

void to_json(json& j, const Pose& p) { j = p.to_array(); }

void from_json(const json& j, Pose& p) {
  if (!j.is_array() || j.size() != 7) throw ParseError("expected a 7-element pose, got " + j.dump());
  std::array<double, 7> a{};
  for (std::size_t i = 0; i < 7; ++i) a[i] = j[i].get<double>();
  if (!(a[0] * a[0] + a[1] * a[1] + a[2] * a[2] + a[3] * a[3] > 0.0)) throw ParseError("pose quaternion is zero");
  p = Pose::from_array(a);
}

void to_json(json& j, const Aabb& b) { j = {{"min", codec::vec(b.min)}, {"max", codec::vec(b.max)}}; }

void from_json(const json& j, Aabb& b) {
  b.min = codec::vec(j.at("min"));
  b.max = codec::vec(j.at("max"));
}

void to_json(json& j, const SdfPrimitive& s) {
  if (const auto* sp = std::get_if<Sphere>(&s)) {
    j = {{"type", "sphere"}, {"center", codec::vec(sp->center)}, {"radius", sp->radius}};
  } else if (const auto* bx = std::get_if<Box>(&s)) {
    const Quat& q = bx->orientation;
    j = {{"type", "box"},
         {"center", codec::vec(bx->center)},
         {"half_extents", codec::vec(bx->half_extents)},
         {"orientation", {q.w(), q.x(), q.y(), q.z()}}};
  } else {
    const auto& c = std::get<Capsule>(s);
    j = {{"type", "capsule"}, {"a", codec::vec(c.a)}, {"b", codec::vec(c.b)}, {"radius", c.radius}};
  }
}

void from_json(const json& j, SdfPrimitive& s) {
  const auto type = j.at("type").get<std::string>();
  if (type == "sphere") {
    s = Sphere{codec::vec(j.at("center")), j.at("radius").get<double>()};
  } else if (type == "box") {
    Box b{codec::vec(j.at("center")), codec::vec(j.at("half_extents")), Quat::Identity()};
    if (j.contains("orientation")) {
      const auto& q = j.at("orientation");
      b.orientation = Quat(q.at(0).get<double>(), q.at(1).get<double>(), q.at(2).get<double>(),
                           q.at(3).get<double>());
    }
    s = b;
  } else if (type == "capsule") {
    s = Capsule{codec::vec(j.at("a")), codec::vec(j.at("b")), j.at("radius").get<double>()};
  } else {
    throw ParseError("unknown shape type '" + type + "'");
  }
}

void to_json(json& j, const SceneObject& o) {
  json kps = json::array();
  for (const auto& k : o.keypoints) kps.push_back(codec::vec(k));
  j = {{"id", o.id},
       {"pose", o.pose},
       {"shape", o.shape},
       {"grasp_point", codec::vec(o.grasp_point)},
       {"keypoints", kps},
       {"footprint", o.footprint},
       {"obstacle", o.obstacle},
       {"graspable", o.graspable}};
}

void from_json(const json& j, SceneObject& o) {
  o.id = j.at("id").get<std::string>();
  o.pose = j.at("pose").get<Pose>();
  o.shape = j.at("shape").get<SdfPrimitive>();
  o.grasp_point = codec::vec(j.value("grasp_point", json::array({0.0, 0.0, 0.0})));
  o.keypoints.clear();
  for (const auto& k : j.value("keypoints", json::array())) o.keypoints.push_back(codec::vec(k));
  o.footprint = j.value("footprint", 0.0);
  o.obstacle = j.value("obstacle", false);
  o.graspable = j.value("graspable", false);
}

void to_json(json& j, const SceneDescription& s) {
  j = {{"variant", std::string(to_string(s.variant))}, {"workspace", s.workspace}, {"objects", s.objects}};
}

void from_json(const json& j, SceneDescription& s) {
  s.variant = variant_from_string(j.at("variant").get<std::string>());
  s.workspace = j.at("workspace").get<Aabb>();
  s.objects = j.at("objects").get<std::vector<SceneObject>>();
}

void to_json(json& j, const SubtaskSegment& s) {
  j = {{"start", s.start}, {"end", s.end}, {"target_object", s.target_object}};
  j["grasp_object"] = s.grasp_object ? json(*s.grasp_object) : json(nullptr);
}

void from_json(const json& j, SubtaskSegment& s) {
  s.start = j.at("start").get<std::size_t>();
  s.end = j.at("end").get<std::size_t>();
  s.target_object = j.at("target_object").get<std::string>();
  const auto g = j.find("grasp_object");
  s.grasp_object = (g == j.end() || g->is_null()) ? std::nullopt : std::optional(g->get<std::string>());
}

void to_json(json& j, const Demonstration& d) {
  json poses = json::array();
  json gripper = json::array();
  std::string labels;
  for (const auto& p : d.poses) {
    poses.push_back(p.pose);
    gripper.push_back(p.gripper);
    labels.push_back(p.label == PoseLabel::D ? 'D' : 'R');
  }
  json offsets = json::object();
  for (const auto& [k, v] : d.grasp_offsets) offsets[k] = v;
  j = {{"source_id", d.source_id}, {"poses", poses},       {"gripper", gripper},
       {"labels", labels},         {"segments", d.segments}, {"grasp_offsets", offsets},
       {"scene", d.scene}};
}

void from_json(const json& j, Demonstration& d) {
  d.source_id = j.at("source_id").get<std::string>();
  const auto& poses = j.at("poses");
  const auto& gripper = j.at("gripper");
  const auto labels = j.at("labels").get<std::string>();
  if (gripper.size() != poses.size() || labels.size() != poses.size())
    throw ParseError("demonstration '" + d.source_id + "': poses, gripper and labels differ in length");
  d.poses.clear();
  for (std::size_t i = 0; i < poses.size(); ++i) {
    if (labels[i] != 'D' && labels[i] != 'R')
      throw ParseError("demonstration '" + d.source_id + "': label must be D or R");
    d.poses.push_back({poses[i].get<Pose>(), gripper[i].get<double>(),
                       labels[i] == 'D' ? PoseLabel::D : PoseLabel::R});
  }
  d.segments = j.at("segments").get<std::vector<SubtaskSegment>>();
  d.grasp_offsets.clear();
  const json offsets = j.value("grasp_offsets", json::object());
  for (const auto& [k, v] : offsets.items()) d.grasp_offsets[k] = v.get<Pose>();
  d.scene = j.at("scene").get<SceneDescription>();
}

void to_json(json& j, const DatasetMetadata& m) {
  j = {{"task", m.task},
       {"variant", std::string(to_string(m.variant))},
       {"stage", std::string(to_string(m.stage))},
       {"seed", m.seed},
       {"fps", m.fps}};
}

void from_json(const json& j, DatasetMetadata& m) {
  m.task = j.at("task").get<std::string>();
  m.variant = variant_from_string(j.at("variant").get<std::string>());
  m.stage = stage_from_string(j.at("stage").get<std::string>());
  m.seed = j.at("seed").get<std::uint64_t>();
  m.fps = j.at("fps").get<double>();
}

void to_json(json& j, const SdfEnvironment& e) {
  j = {{"primitives", e.primitives}, {"workspace", e.workspace}};
}

void from_json(const json& j, SdfEnvironment& e) {
  e.primitives = j.at("primitives").get<std::vector<SdfPrimitive>>();
  e.workspace = j.at("workspace").get<Aabb>();
}

void to_json(json& j, const KinematicChain& c) {
  json joints = json::array();
  for (const auto& jt : c.joints) {
    joints.push_back({{"axis", codec::vec(jt.axis)}, {"origin", jt.origin}, {"limits", {jt.lower, jt.upper}}});
  }
  j = {{"base", c.base}, {"tool", c.tool}, {"joints", joints}};
}

void from_json(const json& j, KinematicChain& c) {
  c.base = j.value("base", Pose{});
  c.tool = j.value("tool", Pose{});
  c.joints.clear();
  for (const auto& jt : j.at("joints")) {
    RevoluteJoint r;
    r.axis = codec::vec(jt.at("axis"));
    r.origin = jt.value("origin", Pose{});
    const auto& lim = jt.at("limits");
    r.lower = lim.at(0).get<double>();
    r.upper = lim.at(1).get<double>();
    c.joints.push_back(r);
  }
}

void to_json(json& j, const LabeledPose& p) {
  j = {{"pose", p.pose}, {"gripper", p.gripper}, {"label", p.label == PoseLabel::D ? "D" : "R"}};
}

void from_json(const json& j, LabeledPose& p) {
  p.pose = j.at("pose").get<Pose>();
  p.gripper = j.value("gripper", 0.0);
  const auto label = j.at("label").get<std::string>();
  if (label != "D" && label != "R") throw ParseError("pose label must be \"D\" or \"R\"");
  p.label = label == "D" ? PoseLabel::D : PoseLabel::R;
}

}  // namespace hybridgen
