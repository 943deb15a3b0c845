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


#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <doctest.h>

#include "hybridgen/constraints.hpp"
#include "hybridgen/errors.hpp"
#include "oracles.hpp"

using namespace hybridgen;

namespace {

bool has_rule(const std::vector<PlanViolation>& v, const std::string& rule) {
  return std::any_of(v.begin(), v.end(), [&](const PlanViolation& p) { return p.rule == rule; });
}

ConstraintPlan two_stage_plan() {
  ConstraintPlan p;
  p.num_stages = 2;
  p.grasp_keypoints = {1, -1};
  p.release_keypoints = {-1, 1};
  p.atoms.push_back(ConstraintAtom::point_offset(0, AtomRole::Subgoal, 0, 1, Vec3(0, 0, 0.05), 0.01));
  p.atoms.push_back(ConstraintAtom::point_offset(1, AtomRole::Subgoal, 1, 2, Vec3(0, 0, 0.05), 0.02));
  p.atoms.push_back(ConstraintAtom::grasp_maintained(1, AtomRole::Path, 1));
  p.atoms.push_back(ConstraintAtom::axis_angle(1, AtomRole::Path, 1, 2, Vec3(0, 0, 1), 1.5));
  p.atoms.push_back(ConstraintAtom::height_above(1, AtomRole::Path, 1, 2, 0.01));
  p.atoms.push_back(ConstraintAtom::within_radius(1, AtomRole::Path, 0, Vec3(0.5, 0, 0.2), 0.3));
  return p;
}

// Independent re-statement of the atom formulas.
double oracle_atom(const ConstraintAtom& a, const std::vector<Vec3>& k, double gripper) {
  const auto p = [&](int id) { return k[static_cast<std::size_t>(id)]; };
  switch (a.kind) {
    case AtomKind::PointOffset: return (p(a.i) - p(a.j) - a.vec).norm() - a.value;
    case AtomKind::AxisAngle: {
      const Vec3 d = p(a.i) - p(a.j);
      const double c = std::clamp(d.dot(a.vec) / (d.norm() * a.vec.norm()), -1.0, 1.0);
      return std::acos(c) - a.value;
    }
    case AtomKind::HeightAbove: return p(a.j).z() + a.value - p(a.i).z();
    case AtomKind::GraspMaintained: return std::max((p(0) - p(a.i)).norm() - kGraspEpsilon, 0.5 - gripper);
    case AtomKind::WithinRadius: return (p(a.i) - a.vec).norm() - a.value;
  }
  return 0.0;
}

double oracle_semantic(const std::vector<LabeledPose>& traj, const ConstraintPlan& plan, int stage,
                       const std::vector<Vec3>& base, int grasped, const Pose& attach) {
  using namespace oracle;
  std::vector<std::size_t> free;
  for (std::size_t t = 0; t < traj.size(); ++t)
    if (traj[t].label == PoseLabel::R) free.push_back(t);
  double sum = 0.0;
  for (std::size_t t : free) {
    std::vector<Vec3> k = base;
    k[0] = traj[t].pose.translation();
    if (grasped >= 1) {
      const auto q = oracle::apply(oracle::mul(oracle::matrix(traj[t].pose), oracle::inverse(oracle::matrix(attach))), base[static_cast<std::size_t>(grasped)]);
      k[static_cast<std::size_t>(grasped)] = Vec3(q[0], q[1], q[2]);
    }
    for (const auto& a : plan.atoms) {
      if (a.stage != stage) continue;
      if (a.role == AtomRole::Subgoal && t != free.back()) continue;
      const double c = oracle_atom(a, k, traj[t].gripper);
      sum += c > 0 ? c * c : 0.0;
    }
  }
  return sum;
}

}  // namespace

TEST_SUITE("constraints") {

TEST_CASE("eval_atom basics") {
  const std::vector<Vec3> k{Vec3::Zero(), Vec3(0.1, 0.2, 0.3), Vec3(0.1, 0.2, 0.25)};
  const Pose ee = Pose::from_translation(Vec3(0.1, 0.2, 0.3));
  CHECK(eval_atom(ConstraintAtom::point_offset(0, AtomRole::Subgoal, 1, 2, Vec3(0, 0, 0.05), 0.01), ee, k, 0.0) ==
        doctest::Approx(-0.01).epsilon(1e-12));
  CHECK(eval_atom(ConstraintAtom::grasp_maintained(0, AtomRole::Path, 1), ee, k, 1.0) <= 0.0);
  CHECK(eval_atom(ConstraintAtom::grasp_maintained(0, AtomRole::Path, 1), ee, k, 0.0) == doctest::Approx(0.5));
  CHECK(eval_atom(ConstraintAtom::axis_angle(0, AtomRole::Path, 1, 2, Vec3(0, 0, 2), 0.1), ee, k, 0.0) ==
        doctest::Approx(-0.1).epsilon(1e-12));
  CHECK(eval_atom(ConstraintAtom::height_above(0, AtomRole::Path, 1, 2, 0.02), ee, k, 0.0) ==
        doctest::Approx(-0.03));
  CHECK(eval_atom(ConstraintAtom::within_radius(0, AtomRole::Path, 0, Vec3(0.1, 0.2, 0.0), 0.1), ee, k, 0.0) ==
        doctest::Approx(0.2));
  CHECK_THROWS_AS(eval_atom(ConstraintAtom::point_offset(0, AtomRole::Subgoal, 3, 1, Vec3::Zero(), 0.0), ee, k, 0.0),
                  ValidationError);
}

TEST_CASE("moved_keypoints") {
  const std::vector<Vec3> base{Vec3::Zero(), Vec3(0.4, 0.0, 0.02), Vec3(0.6, 0.1, 0.0)};
  const Pose attach(yaw_rotation(0.3), Vec3(0.4, 0.0, 0.03));
  const Pose ee(yaw_rotation(1.1), Vec3(0.2, 0.3, 0.2));

  const auto none = moved_keypoints(base, ee, -1, attach);
  CHECK(none[1] == base[1]);
  CHECK(none[2] == base[2]);
  CHECK(none[0] == ee.translation());

  const Pose shifted(attach.rotation(), attach.translation() + Vec3(0.1, -0.2, 0.3));
  const auto t = moved_keypoints(base, shifted, 1, attach);
  CHECK((t[1] - (base[1] + Vec3(0.1, -0.2, 0.3))).norm() < 1e-12);
  CHECK(t[2] == base[2]);

  Rng rng(30);
  for (int i = 0; i < 100; ++i) {
    const Pose e = oracle::random_pose(rng);
    const auto m = moved_keypoints(base, e, 1, attach);
    const auto q = oracle::apply(oracle::mul(oracle::matrix(e), oracle::inverse(oracle::matrix(attach))), base[1]);
    CHECK((m[1] - Vec3(q[0], q[1], q[2])).norm() < 1e-12);
  }
}

TEST_CASE("semantic_cost") {
  const ConstraintPlan plan = two_stage_plan();
  const std::vector<Vec3> base{Vec3::Zero(), Vec3(0.4, 0.0, 0.02), Vec3(0.6, 0.1, 0.0)};
  const Pose attach = Pose::from_translation(Vec3(0.4, 0.0, 0.02));
  const KeypointTracker tracker(base, 1, attach);

  // Every atom satisfied: carried keypoint stays at the end-effector, ends above keypoint 2.
  std::vector<LabeledPose> good;
  for (int i = 0; i <= 10; ++i) {
    const Vec3 p = Vec3(0.4, 0.0, 0.08) + (Vec3(0.6, 0.1, 0.05) - Vec3(0.4, 0.0, 0.08)) * (i / 10.0);
    good.push_back({Pose::from_translation(p), 1.0, i == 0 ? PoseLabel::D : PoseLabel::R});
  }
  CHECK(semantic_cost(good, plan, 1, tracker) == 0.0);
  CHECK(max_violation(good, plan, 1, tracker) <= 0.0);

  // One path atom violated by 0.1 at one pose.
  ConstraintPlan single;
  single.num_stages = 1;
  single.grasp_keypoints = {-1};
  single.release_keypoints = {-1};
  single.atoms.push_back(ConstraintAtom::within_radius(0, AtomRole::Path, 0, Vec3::Zero(), 1.0));
  std::vector<LabeledPose> one{{Pose::from_translation(Vec3(0.5, 0, 0)), 0.0, PoseLabel::R},
                               {Pose::from_translation(Vec3(1.1, 0, 0)), 0.0, PoseLabel::R}};
  CHECK(semantic_cost(one, single, 0, KeypointTracker({Vec3::Zero()})) == doctest::Approx(0.01).epsilon(1e-12));
  one[1].label = PoseLabel::D;
  CHECK(semantic_cost(one, single, 0, KeypointTracker({Vec3::Zero()})) == 0.0);

  Rng rng(31);
  for (int i = 0; i < 50; ++i) {
    std::vector<LabeledPose> traj;
    for (int t = 0; t < 12; ++t)
      traj.push_back({oracle::random_pose(rng, 0.5), rng.uniform(), rng.uniform() < 0.7 ? PoseLabel::R : PoseLabel::D});
    for (int stage : {0, 1}) {
      const double got = semantic_cost(traj, plan, stage, tracker);
      CHECK(std::abs(got - oracle_semantic(traj, plan, stage, base, 1, attach)) < 1e-12);
    }
  }
}

TEST_CASE("validate_plan") {
  CHECK(validate_plan(two_stage_plan(), 2).empty());

  ConstraintPlan three;
  three.num_stages = 3;
  three.grasp_keypoints = {1, -1, -1};
  three.release_keypoints = {-1, -1, 1};
  three.atoms.push_back(ConstraintAtom::point_offset(0, AtomRole::Subgoal, 0, 1, Vec3::Zero(), 0.01));
  three.atoms.push_back(ConstraintAtom::height_above(1, AtomRole::Subgoal, 1, 2, 0.1));
  three.atoms.push_back(ConstraintAtom::grasp_maintained(1, AtomRole::Path, 1));
  three.atoms.push_back(ConstraintAtom::point_offset(2, AtomRole::Subgoal, 1, 2, Vec3(0, 0, 0.02), 0.01));
  CHECK(validate_plan(three, 2).empty());

  ConstraintPlan two_subgoals = two_stage_plan();
  two_subgoals.atoms.push_back(ConstraintAtom::within_radius(0, AtomRole::Subgoal, 0, Vec3::Zero(), 1.0));
  CHECK(has_rule(validate_plan(two_subgoals), "grasp-single-subgoal"));

  ConstraintPlan early = two_stage_plan();
  early.release_keypoints = {1, -1};
  CHECK(has_rule(validate_plan(early), "release-after-grasp"));

  ConstraintPlan path_in_grasp = two_stage_plan();
  path_in_grasp.atoms.push_back(ConstraintAtom::grasp_maintained(0, AtomRole::Path, 1));
  CHECK(has_rule(validate_plan(path_in_grasp), "grasp-no-path"));

  ConstraintPlan dangling = two_stage_plan();
  CHECK(has_rule(validate_plan(dangling, 1), "keypoint-id"));

  ConstraintPlan lengths = two_stage_plan();
  lengths.grasp_keypoints = {1};
  CHECK(has_rule(validate_plan(lengths), "array-length"));

  ConstraintPlan stage_range = two_stage_plan();
  stage_range.atoms.push_back(ConstraintAtom::within_radius(5, AtomRole::Path, 0, Vec3::Zero(), 1.0));
  CHECK(has_rule(validate_plan(stage_range), "stage-range"));

  ConstraintPlan negative = two_stage_plan();
  negative.atoms[1].value = -0.1;
  CHECK(has_rule(validate_plan(negative), "tolerance"));
  ConstraintPlan below = two_stage_plan();
  below.atoms.push_back(ConstraintAtom::height_above(1, AtomRole::Path, 1, 2, -0.15));
  CHECK(validate_plan(below).empty());

  ConstraintPlan double_hold = two_stage_plan();
  double_hold.grasp_keypoints = {1, 2};
  double_hold.release_keypoints = {-1, -1};
  double_hold.atoms = {ConstraintAtom::point_offset(0, AtomRole::Subgoal, 0, 1, Vec3::Zero(), 0.01),
                       ConstraintAtom::point_offset(1, AtomRole::Subgoal, 0, 2, Vec3::Zero(), 0.01)};
  CHECK(has_rule(validate_plan(double_hold), "single-hold"));
}

TEST_CASE("plan json round trip") {
  const ConstraintPlan p = two_stage_plan();
  CHECK(constraint_plan_from_json(to_json_string(p)) == p);
  CHECK_THROWS_AS(constraint_plan_from_json(R"({"num_stages": 1, "grasp_keypoints": [-1], "release_keypoints": [-1],
    "stages": [{"subgoals": [{"kind": "teleport"}], "path": []}]})"),
                  ParseError);
  CHECK_THROWS_AS(constraint_plan_from_json("{"), ParseError);
}

TEST_CASE("eval_atom is Lipschitz in the keypoints") {
  Rng rng(60);
  const Vec3 axis = Vec3(0.3, -0.2, 1.0).normalized();
  for (int inst = 0; inst < 500; ++inst) {
    std::vector<Vec3> k;
    for (int i = 0; i < 3; ++i) k.emplace_back(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5));
    const Pose ee = Pose::from_translation(k[0]);
    const ConstraintAtom atoms[] = {
        ConstraintAtom::point_offset(0, AtomRole::Path, 1, 2, Vec3(0.1, 0, 0), 0.01),
        ConstraintAtom::height_above(0, AtomRole::Path, 1, 2, 0.05),
        ConstraintAtom::within_radius(0, AtomRole::Path, 1, Vec3(0.2, 0.1, 0), 0.1),
        ConstraintAtom::grasp_maintained(0, AtomRole::Path, 1),
        ConstraintAtom::axis_angle(0, AtomRole::Path, 1, 2, axis, 0.3)};
    for (const auto& a : atoms) {
      const std::size_t id = 1 + rng.index(2);
      const Vec3 dir = Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)).normalized();
      const double h = 1e-6;
      auto moved = k;
      moved[id] += h * dir;
      const double slope = std::abs(eval_atom(a, ee, moved, 1.0) - eval_atom(a, ee, k, 1.0)) / h;
      // Distance-like atoms are 1-Lipschitz; the angle atom is bounded by 1 / |k_i - k_j|.
      const double bound = a.kind == AtomKind::AxisAngle ? 1.0 / ((k[1] - k[2]).norm() - h) : 1.0;
      CHECK(slope <= bound * (1.0 + 1e-4) + 1e-6);
    }
  }
}

TEST_CASE("semantic_cost is zero exactly when every applicable atom holds") {
  Rng rng(61);
  const ConstraintPlan plan = two_stage_plan();
  const std::vector<Vec3> base{Vec3::Zero(), Vec3(0.5, 0.0, 0.1), Vec3(0.5, 0.0, 0.0)};
  const Pose attach = Pose::from_translation(base[1]);
  const KeypointTracker tracker(base, 1, attach);
  int zero = 0;
  for (int inst = 0; inst < 2000; ++inst) {
    std::vector<LabeledPose> traj;
    const std::size_t n = 1 + rng.index(4);
    for (std::size_t t = 0; t < n; ++t) {
      const Vec3 p = base[2] + Vec3(rng.uniform(-0.02, 0.02), rng.uniform(-0.02, 0.02), rng.uniform(0.03, 0.08));
      traj.push_back({Pose::from_translation(p), rng.uniform() < 0.9 ? 1.0 : 0.0,
                      rng.uniform() < 0.7 ? PoseLabel::R : PoseLabel::D});
    }
    bool all = true;
    std::vector<std::size_t> free;
    for (std::size_t t = 0; t < n; ++t)
      if (traj[t].label == PoseLabel::R) free.push_back(t);
    for (std::size_t t : free) {
      const auto k = moved_keypoints(base, traj[t].pose, 1, attach);
      for (const auto& a : plan.atoms) {
        if (a.stage != 1 || (a.role == AtomRole::Subgoal && t != free.back())) continue;
        all = all && oracle_atom(a, k, traj[t].gripper) <= 0.0;
      }
    }
    const double cost = semantic_cost(traj, plan, 1, tracker);
    CHECK((cost == 0.0) == all);
    zero += all;
  }
  CHECK(zero > 100);
  CHECK(zero < 1900);
}

}  // TEST_SUITE
