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

#include "hybridgen/constraints.hpp"

#include <cmath>
#include <limits>
#include <set>

#include "codec.hpp"
#include "hybridgen/errors.hpp"

namespace hybridgen {

using nlohmann::json;

std::string_view to_string(AtomKind k) {
  switch (k) {
    case AtomKind::PointOffset: return "point_offset";
    case AtomKind::AxisAngle: return "axis_angle";
    case AtomKind::HeightAbove: return "height_above";
    case AtomKind::GraspMaintained: return "grasp_maintained";
    case AtomKind::WithinRadius: return "within_radius";
  }
  return "point_offset";
}

std::string_view to_string(AtomRole r) { return r == AtomRole::Subgoal ? "subgoal" : "path"; }

ConstraintAtom ConstraintAtom::point_offset(int stage, AtomRole role, int i, int j, const Vec3& offset,
                                            double tolerance) {
  return {AtomKind::PointOffset, stage, role, i, j, offset, tolerance};
}
ConstraintAtom ConstraintAtom::axis_angle(int stage, AtomRole role, int i, int j, const Vec3& axis,
                                          double max_angle) {
  return {AtomKind::AxisAngle, stage, role, i, j, axis, max_angle};
}
ConstraintAtom ConstraintAtom::height_above(int stage, AtomRole role, int i, int j, double min_height) {
  return {AtomKind::HeightAbove, stage, role, i, j, Vec3::Zero(), min_height};
}
ConstraintAtom ConstraintAtom::grasp_maintained(int stage, AtomRole role, int keypoint) {
  return {AtomKind::GraspMaintained, stage, role, keypoint, 0, Vec3::Zero(), 0.0};
}
ConstraintAtom ConstraintAtom::within_radius(int stage, AtomRole role, int i, const Vec3& point, double radius) {
  return {AtomKind::WithinRadius, stage, role, i, 0, point, radius};
}

namespace {

bool uses_j(AtomKind k) {
  return k == AtomKind::PointOffset || k == AtomKind::AxisAngle || k == AtomKind::HeightAbove;
}

const Vec3& keypoint(std::span<const Vec3> kps, int id, const Vec3& ee) {
  if (id == 0) return ee;
  if (id < 0 || static_cast<std::size_t>(id) >= kps.size())
    throw ValidationError("constraint references keypoint " + std::to_string(id) + " but only " +
                          std::to_string(kps.empty() ? 0 : kps.size() - 1) + " exist");
  return kps[static_cast<std::size_t>(id)];
}

double vector_angle(const Vec3& a, const Vec3& b) { return std::atan2(a.cross(b).norm(), a.dot(b)); }

void move_keypoints(std::span<const Vec3> base, const Pose& ee, int grasped, const Pose& attach_ee,
                    std::vector<Vec3>& out) {
  out.assign(base.begin(), base.end());
  if (out.empty()) out.emplace_back(Vec3::Zero());
  out[0] = ee.translation();
  if (grasped >= 1 && static_cast<std::size_t>(grasped) < out.size()) {
    auto& k = out[static_cast<std::size_t>(grasped)];
    k = (ee * inverse(attach_ee)).transform_point(k);
  }
}

}  // namespace

double eval_atom(const ConstraintAtom& atom, const Pose& ee_pose, std::span<const Vec3> keypoints,
                 double gripper, double eps_grasp) {
  const Vec3& ee = ee_pose.translation();
  const Vec3& ki = keypoint(keypoints, atom.i, ee);
  switch (atom.kind) {
    case AtomKind::PointOffset:
      return (ki - (keypoint(keypoints, atom.j, ee) + atom.vec)).norm() - atom.value;
    case AtomKind::AxisAngle:
      return vector_angle(ki - keypoint(keypoints, atom.j, ee), atom.vec) - atom.value;
    case AtomKind::HeightAbove:
      return keypoint(keypoints, atom.j, ee).z() + atom.value - ki.z();
    case AtomKind::GraspMaintained:
      return std::max((ee - ki).norm() - eps_grasp, kGripperClosed - gripper);
    case AtomKind::WithinRadius:
      return (ki - atom.vec).norm() - atom.value;
  }
  return 0.0;
}

std::vector<Vec3> moved_keypoints(std::span<const Vec3> base_keypoints, const Pose& ee_pose,
                                  int grasped_keypoint, const Pose& attach_ee) {
  std::vector<Vec3> out;
  move_keypoints(base_keypoints, ee_pose, grasped_keypoint, attach_ee, out);
  return out;
}

void KeypointTracker::at(const Pose& ee, std::vector<Vec3>& out) const {
  move_keypoints(base_, ee, grasped_, attach_, out);
}

namespace {

// Visits (atom, pose index) pairs that contribute to a stage's cost.
template <typename F>
void for_each_term(std::span<const LabeledPose> traj, const ConstraintPlan& plan, int stage, F&& f) {
  std::optional<std::size_t> last_free;
  for (std::size_t t = 0; t < traj.size(); ++t) {
    if (traj[t].label == PoseLabel::R) last_free = t;
  }
  if (!last_free) return;
  for (const auto& atom : plan.atoms) {
    if (atom.stage != stage) continue;
    if (atom.role == AtomRole::Subgoal) {
      f(atom, *last_free);
    } else {
      for (std::size_t t = 0; t < traj.size(); ++t) {
        if (traj[t].label == PoseLabel::R) f(atom, t);
      }
    }
  }
}

}  // namespace

double semantic_cost(std::span<const LabeledPose> traj, const ConstraintPlan& plan, int stage,
                     const KeypointTracker& tracker, double eps_grasp) {
  double total = 0.0;
  std::vector<Vec3> kps;
  for_each_term(traj, plan, stage, [&](const ConstraintAtom& atom, std::size_t t) {
    tracker.at(traj[t].pose, kps);
    total += hinge_sq(eval_atom(atom, traj[t].pose, kps, traj[t].gripper, eps_grasp));
  });
  return total;
}

double max_violation(std::span<const LabeledPose> traj, const ConstraintPlan& plan, int stage,
                     const KeypointTracker& tracker, double eps_grasp) {
  double worst = -std::numeric_limits<double>::infinity();
  std::vector<Vec3> kps;
  for_each_term(traj, plan, stage, [&](const ConstraintAtom& atom, std::size_t t) {
    tracker.at(traj[t].pose, kps);
    worst = std::max(worst, eval_atom(atom, traj[t].pose, kps, traj[t].gripper, eps_grasp));
  });
  return worst;
}

std::vector<PlanViolation> validate_plan(const ConstraintPlan& plan, std::optional<int> num_keypoints) {
  std::vector<PlanViolation> out;
  auto add = [&](std::string rule, int stage, std::string msg) {
    out.push_back({std::move(rule), stage, std::move(msg)});
  };
  const int n = plan.num_stages;
  if (n < 1) add("num-stages", -1, "num_stages must be >= 1");
  if (static_cast<int>(plan.grasp_keypoints.size()) != n)
    add("array-length", -1, "grasp_keypoints must have num_stages entries");
  if (static_cast<int>(plan.release_keypoints.size()) != n)
    add("array-length", -1, "release_keypoints must have num_stages entries");

  auto id_ok = [&](int id) { return id >= 0 && (!num_keypoints || id <= *num_keypoints); };

  for (const auto& a : plan.atoms) {
    if (a.stage < 0 || a.stage >= n) {
      add("stage-range", a.stage, "atom refers to a stage outside [0, num_stages)");
      continue;
    }
    if (!id_ok(a.i) || (uses_j(a.kind) && !id_ok(a.j)))
      add("keypoint-id", a.stage, std::string(to_string(a.kind)) + " references a keypoint that does not exist");
    if (a.kind == AtomKind::GraspMaintained && a.i == 0)
      add("keypoint-id", a.stage, "grasp_maintained must name an object keypoint, not the end-effector");
    // height_above carries a signed height; every other value is a tolerance or angle.
    if (a.kind == AtomKind::HeightAbove ? !std::isfinite(a.value) : !(a.value >= 0.0))
      add("tolerance", a.stage, std::string(to_string(a.kind)) + " tolerance must be >= 0");
    if (a.kind == AtomKind::AxisAngle && !(a.vec.norm() > 0.0))
      add("axis", a.stage, "axis_angle needs a nonzero axis");
  }

  const std::size_t stages = static_cast<std::size_t>(std::max(n, 0));
  int held = -1;
  std::set<int> grasped_before;
  for (std::size_t s = 0; s < stages; ++s) {
    const int stage = static_cast<int>(s);
    const int g = s < plan.grasp_keypoints.size() ? plan.grasp_keypoints[s] : -1;
    const int r = s < plan.release_keypoints.size() ? plan.release_keypoints[s] : -1;
    if (g != -1) {
      if (g < 1 || !id_ok(g)) add("keypoint-id", stage, "grasp keypoint " + std::to_string(g) + " does not exist");
      int subgoals = 0, paths = 0;
      for (const auto& a : plan.atoms) {
        if (a.stage != stage) continue;
        (a.role == AtomRole::Subgoal ? subgoals : paths) += 1;
      }
      if (subgoals != 1) add("grasp-single-subgoal", stage, "a grasp stage must have exactly one sub-goal constraint");
      if (paths != 0) add("grasp-no-path", stage, "a grasp stage must not have path constraints");
      if (held != -1 && held != g)
        add("single-hold", stage, "keypoint " + std::to_string(g) + " grasped while keypoint " +
                                      std::to_string(held) + " is still held");
    }
    if (r != -1) {
      if (!grasped_before.contains(r))
        add("release-after-grasp", stage,
            "keypoint " + std::to_string(r) + " is released without being grasped in an earlier stage");
      else if (held == r)
        held = -1;
    }
    if (g != -1) {
      held = g;
      grasped_before.insert(g);
    }
  }
  return out;
}

namespace {

json atom_to_json(const ConstraintAtom& a) {
  json j = {{"kind", std::string(to_string(a.kind))}};
  switch (a.kind) {
    case AtomKind::PointOffset:
      j.update({{"i", a.i}, {"j", a.j}, {"offset", codec::vec(a.vec)}, {"tolerance", a.value}});
      break;
    case AtomKind::AxisAngle:
      j.update({{"i", a.i}, {"j", a.j}, {"axis", codec::vec(a.vec)}, {"max_angle", a.value}});
      break;
    case AtomKind::HeightAbove:
      j.update({{"i", a.i}, {"j", a.j}, {"min_height", a.value}});
      break;
    case AtomKind::GraspMaintained:
      j["keypoint"] = a.i;
      break;
    case AtomKind::WithinRadius:
      j.update({{"i", a.i}, {"point", codec::vec(a.vec)}, {"radius", a.value}});
      break;
  }
  return j;
}

ConstraintAtom atom_from_json(const json& j, int stage, AtomRole role) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "point_offset")
    return ConstraintAtom::point_offset(stage, role, j.at("i").get<int>(), j.at("j").get<int>(),
                                        codec::vec(j.at("offset")), j.at("tolerance").get<double>());
  if (kind == "axis_angle")
    return ConstraintAtom::axis_angle(stage, role, j.at("i").get<int>(), j.at("j").get<int>(),
                                      codec::vec(j.at("axis")), j.at("max_angle").get<double>());
  if (kind == "height_above")
    return ConstraintAtom::height_above(stage, role, j.at("i").get<int>(), j.at("j").get<int>(),
                                        j.at("min_height").get<double>());
  if (kind == "grasp_maintained") return ConstraintAtom::grasp_maintained(stage, role, j.at("keypoint").get<int>());
  if (kind == "within_radius")
    return ConstraintAtom::within_radius(stage, role, j.at("i").get<int>(), codec::vec(j.at("point")),
                                         j.at("radius").get<double>());
  throw ParseError("unknown constraint kind '" + kind + "'");
}

}  // namespace

void to_json(json& j, const ConstraintPlan& plan) {
  json stages = json::array();
  for (int s = 0; s < plan.num_stages; ++s) {
    json sub = json::array(), path = json::array();
    for (const auto& a : plan.atoms) {
      if (a.stage != s) continue;
      (a.role == AtomRole::Subgoal ? sub : path).push_back(atom_to_json(a));
    }
    stages.push_back({{"subgoals", sub}, {"path", path}});
  }
  j = {{"num_stages", plan.num_stages},
       {"grasp_keypoints", plan.grasp_keypoints},
       {"release_keypoints", plan.release_keypoints},
       {"stages", stages}};
}

void from_json(const json& j, ConstraintPlan& p) {
  p = ConstraintPlan{};
  p.num_stages = j.at("num_stages").get<int>();
  p.grasp_keypoints = j.at("grasp_keypoints").get<std::vector<int>>();
  p.release_keypoints = j.at("release_keypoints").get<std::vector<int>>();
  const auto& stages = j.at("stages");
  if (!stages.is_array()) throw ParseError("constraint plan 'stages' must be an array");
  for (std::size_t s = 0; s < stages.size(); ++s) {
    const int stage = static_cast<int>(s);
    for (const auto& a : stages[s].value("subgoals", json::array()))
      p.atoms.push_back(atom_from_json(a, stage, AtomRole::Subgoal));
    for (const auto& a : stages[s].value("path", json::array()))
      p.atoms.push_back(atom_from_json(a, stage, AtomRole::Path));
  }
}

std::string to_json_string(const ConstraintPlan& plan) { return json(plan).dump(2) + "\n"; }

ConstraintPlan constraint_plan_from_json(std::string_view text) {
  const json j = codec::parse_document(text);
  return codec::decode("constraint plan", [&] { return j.get<ConstraintPlan>(); });
}

}  // namespace hybridgen
