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
#include <limits>
#include <numbers>
#include <vector>

#include <doctest.h>

#include "hybridgen/errors.hpp"
#include "hybridgen/kinematics.hpp"
#include "hybridgen/planner.hpp"
#include "hybridgen/sdf.hpp"
#include "hybridgen/simenv.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace hybridgen;

namespace {

KinematicChain planar(double l1, double l2) {
  KinematicChain c;
  RevoluteJoint a, b;
  a.axis = b.axis = Vec3::UnitZ();
  a.lower = b.lower = -10.0;
  a.upper = b.upper = 10.0;
  b.origin = Pose::from_translation(Vec3(l1, 0, 0));
  c.joints = {a, b};
  c.tool = Pose::from_translation(Vec3(l2, 0, 0));
  return c;
}

RobotSpec robot() { return load_task_config(testing::source_dir() / "config/tasks.json").robot; }

Quat down(double psi) { return yaw_rotation(psi) * Quat(Eigen::AngleAxisd(std::numbers::pi, Vec3::UnitY())); }

LabeledPose at(const Vec3& p, PoseLabel l = PoseLabel::R) { return {Pose(down(0.0), p), 0.0, l}; }

}  // namespace

TEST_SUITE("planner") {

TEST_CASE("sphere and capsule sdf") {
  const Sphere s{Vec3(1, 2, 3), 0.5};
  CHECK(sdf(s, s.center) == doctest::Approx(-0.5));
  CHECK(sdf(s, s.center + Vec3(1.0, 0, 0)) == doctest::Approx(0.5));
  const Capsule c{Vec3(0, 0, 0), Vec3(1, 0, 0), 0.1};
  CHECK(sdf(c, Vec3(0.5, 0.3, 0)) == doctest::Approx(0.2));
  CHECK(sdf(c, Vec3(1.3, 0, 0)) == doctest::Approx(0.2));
  CHECK(sdf(SdfEnvironment{}, Vec3::Zero()) == std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(validate(SdfPrimitive{Sphere{Vec3::Zero(), 0.0}}), ValidationError);
}

TEST_CASE("box sdf against sampled oracles") {
  const Box unit{Vec3::Zero(), Vec3::Constant(0.5), Quat::Identity()};
  // Dense surface samples, spacing 2 mm.
  std::vector<Vec3> surface;
  const int n = 500;
  for (int axis = 0; axis < 3; ++axis) {
    for (double side : {-0.5, 0.5}) {
      for (int u = 0; u <= n; ++u) {
        for (int v = 0; v <= n; ++v) {
          Vec3 p;
          p[axis] = side;
          p[(axis + 1) % 3] = -0.5 + static_cast<double>(u) / n;
          p[(axis + 2) % 3] = -0.5 + static_cast<double>(v) / n;
          surface.push_back(p);
        }
      }
    }
  }
  Rng rng(40);
  for (int q = 0; q < 20; ++q) {
    const Vec3 p(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    const bool inside = (p.array().abs() <= 0.5).all();
    double nearest = std::numeric_limits<double>::infinity();
    for (const auto& s : surface) nearest = std::min(nearest, (s - p).squaredNorm());
    nearest = std::sqrt(nearest);
    const double d = sdf(unit, p);
    CHECK((d < 0.0) == inside);
    CHECK(std::abs(std::abs(d) - nearest) < 2e-3);
  }
  // Rotated and translated boxes agree with the sdf of the local point.
  const Pose pose(yaw_rotation(0.7), Vec3(0.3, -0.1, 0.2));
  const SdfPrimitive moved = transformed(SdfPrimitive{unit}, pose);
  for (int q = 0; q < 50; ++q) {
    const Vec3 p(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    CHECK(sdf(moved, pose.transform_point(p)) == doctest::Approx(sdf(unit, p)).epsilon(1e-12));
  }
}

TEST_CASE("collision_cost") {
  SdfEnvironment env;
  env.primitives.push_back(Sphere{Vec3::Zero(), 0.1});
  const std::vector<LabeledPose> far{at(Vec3(1, 0, 0)), at(Vec3(0, 1, 0))};
  CHECK(collision_cost(far, env, 0.02) == 0.0);
  const std::vector<LabeledPose> touching{at(Vec3(0.1, 0, 0)), at(Vec3(0, 1, 0))};
  CHECK(collision_cost(touching, env, 0.02) == doctest::Approx(0.0004).epsilon(1e-12));

  Rng rng(41);
  env.primitives.push_back(Box{Vec3(0.2, 0.1, 0), Vec3(0.05, 0.1, 0.02), yaw_rotation(0.4)});
  env.primitives.push_back(Capsule{Vec3(-0.1, 0, 0), Vec3(0, 0.2, 0.1), 0.03});
  for (int i = 0; i < 20; ++i) {
    std::vector<LabeledPose> traj;
    for (int t = 0; t < 15; ++t) traj.push_back(at(Vec3(rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), rng.uniform(-0.1, 0.1))));
    double expect = 0.0;
    for (const auto& p : traj) {
      double d = std::numeric_limits<double>::infinity();
      for (const auto& prim : env.primitives) d = std::min(d, sdf(prim, p.pose.translation()));
      expect += std::pow(std::max(0.03 - d, 0.0), 2);
    }
    CHECK(collision_cost(traj, env, 0.03) == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("smoothness_cost") {
  const std::vector<LabeledPose> constant(5, at(Vec3(0.1, 0.2, 0.3)));
  CHECK(smoothness_cost(constant) == 0.0);
  const std::vector<LabeledPose> two{at(Vec3(0, 0, 0)), at(Vec3(0.1, 0, 0))};
  CHECK(smoothness_cost(two) == doctest::Approx(0.01));
  CHECK(smoothness_cost(std::vector<LabeledPose>{at(Vec3::Zero())}) == 0.0);

  std::vector<LabeledPose> line;
  for (int t = 0; t <= 20; ++t) line.push_back(at(Vec3(0.02 * t, 0.01 * t, 0)));
  const double base = smoothness_cost(line);
  Rng rng(42);
  for (int i = 0; i < 100; ++i) {
    auto p = line;
    for (std::size_t t = 1; t + 1 < p.size(); ++t) {
      const Vec3 d(rng.uniform(-0.01, 0.01), rng.uniform(-0.01, 0.01), rng.uniform(-0.01, 0.01));
      p[t].pose = apply_increment(p[t].pose, d, Vec3(rng.uniform(-0.05, 0.05), 0, 0));
    }
    CHECK(smoothness_cost(p) > base);
  }
}

TEST_CASE("ik_solve on a planar two-link arm") {
  const double l1 = 0.5, l2 = 0.3;
  const KinematicChain arm = planar(l1, l2);
  JointVector zero = JointVector::Zero(2);

  JointVector q(2);
  q << 0.3, -0.7;
  const IkResult self = ik_solve(arm, forward_kinematics(arm, q), q);
  CHECK(self.residual < 1e-9);
  CHECK((self.config - q).norm() == 0.0);

  Rng rng(43);
  for (int i = 0; i < 100; ++i) {
    const double r = rng.uniform(0.25, 0.78), th = rng.uniform(-std::numbers::pi, std::numbers::pi);
    const int elbow = rng.uniform() < 0.5 ? 1 : -1;
    const auto sol = oracle::two_link_ik(l1, l2, r * std::cos(th), r * std::sin(th), elbow);
    REQUIRE(sol);
    const Pose target(yaw_rotation(sol->first + sol->second), Vec3(r * std::cos(th), r * std::sin(th), 0));
    const IkResult res = ik_solve(arm, target, zero);
    CHECK(res.residual < 1e-6);
    CHECK(std::abs(oracle::wrap(res.config[0] - sol->first)) < 1e-6);
    CHECK(std::abs(oracle::wrap(res.config[1] - sol->second)) < 1e-6);
  }

  // Out of reach: the residual is the gap to the boundary when the orientation points at the target.
  for (double r : {0.9, 1.0, 1.2}) {
    const double th = 0.4;
    const Pose target(yaw_rotation(th), Vec3(r * std::cos(th), r * std::sin(th), 0));
    JointVector seed(2);
    seed << 0.2, 0.3;
    const IkResult res = ik_solve(arm, target, seed);
    CHECK(res.residual == doctest::Approx(r - (l1 + l2)).epsilon(1e-4));
  }
}

TEST_CASE("ik_cost") {
  const RobotSpec rb = robot();
  Rng rng(44);
  std::vector<Pose> reachable;
  JointVector q = rb.home;
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < q.size(); ++j) q[j] += rng.uniform(-0.05, 0.05);
    reachable.push_back(forward_kinematics(rb.chain, q));
  }
  CHECK(ik_cost(reachable, rb.chain, rb.home) < 1e-8);
  CHECK(ik_cost({}, rb.chain, rb.home) == 0.0);
  reachable.push_back(Pose(down(0), Vec3(2.0, 0, 0.3)));
  CHECK(ik_cost(reachable, rb.chain, rb.home) > 0.0);
}

TEST_CASE("replan with zero weights returns the initial trajectory") {
  const RobotSpec rb = robot();
  PlanProblem p;
  p.chain = rb.chain;
  p.ik_seed = rb.home;
  p.weights = {0.0, 0.0, 0.0, 0.0};
  for (int i = 0; i < 8; ++i) p.trajectory.push_back(at(Vec3(0.4, -0.1 + 0.03 * i, 0.2), i == 0 || i == 7 ? PoseLabel::D : PoseLabel::R));
  const PlanResult r = replan(p);
  CHECK(r.trajectory == p.trajectory);
  CHECK(r.converged);
  CHECK(r.iterations == 1);
}

TEST_CASE("replan reaches a single point-offset sub-goal") {
  const RobotSpec rb = robot();
  PlanProblem p;
  p.chain = rb.chain;
  p.ik_seed = rb.home;
  const Vec3 a(0.4, -0.1, 0.2), b(0.4, 0.1, 0.2);
  p.trajectory = {at(a, PoseLabel::D), at((a + b) / 2), at(b, PoseLabel::D)};
  p.keypoints = {{1, Vec3(0.45, 0.0, 0.1)}};
  p.plan.num_stages = 1;
  p.plan.grasp_keypoints = {-1};
  p.plan.release_keypoints = {-1};
  const Vec3 offset(0.0, 0.0, 0.05);
  p.plan.atoms.push_back(ConstraintAtom::point_offset(0, AtomRole::Subgoal, 0, 1, offset, 0.01));
  const PlanResult r = replan(p);
  CHECK(r.feasible);
  // Closed form: the sub-goal is met iff the free pose lies in the ball around k_1 + offset.
  const Vec3 goal = p.keypoints[0].position + offset;
  CHECK((r.trajectory[1].pose.translation() - goal).norm() <= 0.01 + p.options.feasibility_eps);
  CHECK(r.trajectory[0] == p.trajectory[0]);
  CHECK(r.trajectory[2] == p.trajectory[2]);
  for (std::size_t i = 1; i < r.cost_history.size(); ++i) CHECK(r.cost_history[i] <= r.cost_history[i - 1]);
}

TEST_CASE("corridor fixture") {
  const PlanProblem p = plan_problem_from_json(read_text_file(testing::source_dir() / "data/corridor_problem.json"));
  CHECK(p.weights == PlanWeights{});
  CHECK(validate_plan(p.plan, static_cast<int>(p.keypoints.size())).empty());

  // Grid-search oracle: a detour through one via point (y = 0) over a height and
  // sideways-offset grid, resampled to the same pose count, is clear and meets the plan.
  const Vec3 a = p.trajectory.front().pose.translation(), b = p.trajectory.back().pose.translation();
  std::vector<Vec3> base{Vec3::Zero()};
  for (const auto& k : p.keypoints) base.push_back(k.position);
  const KeypointTracker tracker(base);
  bool exists = false;
  for (double h = 0.0; h <= 0.2 && !exists; h += 0.01) {
    for (double s = -0.15; s <= 0.15 && !exists; s += 0.01) {
      const Vec3 via(a.x() + s, 0.0, a.z() + h);
      std::vector<LabeledPose> cand = p.trajectory;
      const std::size_t n = cand.size() - 1;
      for (std::size_t i = 1; i < n; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(n);
        const Vec3 q = t < 0.5 ? a + (via - a) * (2 * t) : via + (b - via) * (2 * t - 1);
        cand[i].pose = Pose(cand[i].pose.rotation(), q);
      }
      exists = min_clearance(cand, p.env) >= 0.0 && max_violation(cand, p.plan, 0, tracker) <= 0.0;
    }
  }
  CHECK(exists);

  const PlanResult r = replan(p);
  CHECK(r.feasible);
  for (const auto& q : r.trajectory) CHECK(sdf(p.env, q.pose.translation()) >= 0.0);
  CHECK(r.cost.semantic <= 1e-6);
  for (std::size_t i = 1; i < r.cost_history.size(); ++i) CHECK(r.cost_history[i] <= r.cost_history[i - 1]);
}

TEST_CASE("objective gradient and cost breakdown") {
  const PlanProblem p = plan_problem_from_json(read_text_file(testing::source_dir() / "data/corridor_problem.json"));
  const PlanObjective obj(p);
  Rng rng(46);
  int agree = 0, total = 0;
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::VectorXd x(obj.dimension());
    for (int i = 0; i < x.size(); ++i) x[i] = rng.uniform(-0.03, 0.03);
    const CostBreakdown c = obj.breakdown(x);
    const auto& w = p.weights;
    CHECK(std::abs(c.total - (w.semantic * c.semantic + w.collision * c.collision + w.smoothness * c.smoothness +
                              w.ik * c.ik)) <= 1e-9);
    const Eigen::VectorXd g = obj.gradient(x);
    for (int i = 0; i < x.size(); ++i) {
      const double h = 1e-6;
      Eigen::VectorXd xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      const double fd = (obj.value(xp) - obj.value(xm)) / (2 * h);
      if (std::abs(fd) < 1e-7) continue;
      ++total;
      agree += (fd > 0) == (g[i] > 0);
    }
  }
  REQUIRE(total > 0);
  CHECK(static_cast<double>(agree) >= 0.95 * total);
}

TEST_CASE("replan validation") {
  PlanProblem p;
  p.chain = robot().chain;
  p.trajectory = {at(Vec3(0.4, 0, 0.2), PoseLabel::D)};
  CHECK_THROWS_AS(replan(p), ValidationError);
  p.trajectory.push_back(at(Vec3(0.4, 0.1, 0.2)));
  p.weights.smoothness = -1.0;
  CHECK_THROWS_AS(replan(p), ValidationError);
}

TEST_CASE("plan problem round trip") {
  const std::string text = read_text_file(testing::source_dir() / "data/corridor_problem.json");
  CHECK(to_json_string(plan_problem_from_json(text)) == text);
}

TEST_CASE("select_subsegment") {
  SdfEnvironment env;
  env.primitives.push_back(Sphere{Vec3(0, 0, 0), 0.05});
  std::vector<LabeledPose> clear;
  for (int i = 0; i < 10; ++i) clear.push_back(at(Vec3(0.1 + 0.01 * i, 0, 0)));
  const auto whole = select_subsegment(clear, env, clear.front().pose, clear.back().pose);
  CHECK(whole.ok);
  CHECK(whole.begin == 0);
  CHECK(whole.end == 10);

  auto prefixed = clear;
  prefixed[0] = at(Vec3(0.01, 0, 0));
  const auto trimmed = select_subsegment(prefixed, env, prefixed[1].pose, prefixed.back().pose);
  CHECK(trimmed.ok);
  CHECK(trimmed.begin == 1);
  CHECK(trimmed.end == 10);
  CHECK(trimmed.trajectory.size() == 9);

  Rng rng(45);
  for (int inst = 0; inst < 300; ++inst) {
    std::vector<LabeledPose> traj;
    const std::size_t n = 1 + rng.index(15);
    for (std::size_t i = 0; i < n; ++i) traj.push_back(at(Vec3(rng.uniform(-0.15, 0.15), rng.uniform(-0.15, 0.15), 0)));
    const Pose s = at(Vec3(rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1), 0)).pose;
    const Pose g = at(Vec3(rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1), 0)).pose;
    const double delta = 0.1;
    const auto got = select_subsegment(traj, env, s, g, delta);
    const auto expect = oracle::exhaustive_subsegment(traj, env, s.translation(), g.translation(), delta);
    CHECK(got.ok == expect.has_value());
    if (expect) {
      CHECK(got.begin == expect->first);
      CHECK(got.end == expect->second);
    }
  }
}

}  // TEST_SUITE
