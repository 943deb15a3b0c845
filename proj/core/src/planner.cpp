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

#include "hybridgen/planner.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "codec.hpp"
#include "hybridgen/errors.hpp"
#include "hybridgen/rng.hpp"

namespace hybridgen {

using nlohmann::json;

double collision_cost(std::span<const LabeledPose> traj, const SdfEnvironment& env, double margin) {
  double total = 0.0;
  for (const auto& p : traj) total += hinge_sq(margin - sdf(env, p.pose.translation()));
  return total;
}

namespace {

double pair_cost(const Pose& a, const Pose& b, double beta) {
  const double ang = geodesic_angle(a.rotation(), b.rotation());
  return (a.translation() - b.translation()).squaredNorm() + beta * ang * ang;
}

}  // namespace

double smoothness_cost(std::span<const LabeledPose> traj, double beta) {
  double total = 0.0;
  for (std::size_t i = 1; i < traj.size(); ++i) total += pair_cost(traj[i - 1].pose, traj[i].pose, beta);
  return total;
}

double min_clearance(std::span<const LabeledPose> traj, const SdfEnvironment& env) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& p : traj) m = std::min(m, sdf(env, p.pose.translation()));
  return m;
}

void validate(const PlanProblem& problem) {
  const bool any_free = std::any_of(problem.trajectory.begin(), problem.trajectory.end(),
                                    [](const LabeledPose& p) { return p.label == PoseLabel::R; });
  if (!any_free) throw ValidationError("plan problem has no free (R) poses");
  const auto& w = problem.weights;
  if (!(w.semantic >= 0 && w.collision >= 0 && w.smoothness >= 0 && w.ik >= 0))
    throw ValidationError("plan weights must be >= 0");
  if (problem.plan.num_stages > 0 && (problem.stage < 0 || problem.stage >= problem.plan.num_stages))
    throw ValidationError("plan stage " + std::to_string(problem.stage) + " outside the constraint plan");
  if (problem.options.max_iters < 0 || problem.options.restarts < 0 || !(problem.options.fd_step > 0) ||
      !(problem.options.collision_margin >= 0))
    throw ValidationError("invalid plan options");
  if (w.ik > 0) {
    validate(problem.chain);
    if (problem.ik_seed.size() != 0 && problem.ik_seed.size() != problem.chain.dof())
      throw ValidationError("ik_seed size does not match the chain");
  }
  for (std::size_t i = 0; i < problem.keypoints.size(); ++i) {
    if (problem.keypoints[i].id != static_cast<int>(i) + 1)
      throw ValidationError("plan keypoints must have ids 1..n in order");
  }
  for (const auto& s : problem.env.primitives) validate(s);
}

PlanObjective::PlanObjective(const PlanProblem& problem) : problem_(problem) {
  const auto& traj = problem.trajectory;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    init_.push_back(traj[i].pose);
    if (traj[i].label == PoseLabel::R) free_.push_back(i);
  }
  std::vector<Vec3> base{Vec3::Zero()};
  for (const auto& k : problem.keypoints) base.push_back(k.position);
  tracker_ = KeypointTracker(std::move(base), problem.grasped_keypoint, problem.attach_pose);
  if (problem.plan.num_stages > 0) {
    for (const auto& a : problem.plan.atoms) {
      if (a.stage != problem.stage) continue;
      (a.role == AtomRole::Path ? path_atoms_ : subgoal_atoms_).push_back(a);
    }
  }
  if (problem.weights.ik > 0) {
    JointVector q = problem.ik_seed.size() == problem.chain.dof()
                        ? problem.ik_seed
                        : JointVector(JointVector::Zero(problem.chain.dof()));
    for (std::size_t f : free_) {
      q = ik_solve(problem.chain, init_[f], q, problem.options.ik).config;
      seeds_.push_back(q);
    }
  }
}

Pose PlanObjective::pose_at(std::size_t f, const Eigen::VectorXd& x) const {
  const auto seg = x.segment<6>(6 * static_cast<Eigen::Index>(f));
  if ((seg.array() == 0.0).all()) return init_[free_[f]];
  return apply_increment(init_[free_[f]], seg.head<3>(), seg.tail<3>());
}

std::vector<LabeledPose> PlanObjective::trajectory(const Eigen::VectorXd& x) const {
  std::vector<LabeledPose> out = problem_.trajectory;
  for (std::size_t f = 0; f < free_.size(); ++f) out[free_[f]].pose = pose_at(f, x);
  return out;
}

// Collision, IK and semantic terms of free pose f plus the smoothness of its two
// neighbouring pairs, all weighted.
double PlanObjective::local_cost(std::size_t f, const Pose& pose, const Pose* prev, const Pose* next,
                                 double* ik_res) const {
  const auto& w = problem_.weights;
  const auto& o = problem_.options;
  double c = 0.0;
  if (w.collision > 0) c += w.collision * hinge_sq(o.collision_margin - sdf(problem_.env, pose.translation()));
  if (w.smoothness > 0) {
    if (prev) c += w.smoothness * pair_cost(*prev, pose, o.beta);
    if (next) c += w.smoothness * pair_cost(pose, *next, o.beta);
  }
  if (w.semantic > 0 && (!path_atoms_.empty() || (!subgoal_atoms_.empty() && f + 1 == free_.size()))) {
    thread_local std::vector<Vec3> kps;
    tracker_.at(pose, kps);
    const double grip = problem_.trajectory[free_[f]].gripper;
    double s = 0.0;
    for (const auto& a : path_atoms_) s += hinge_sq(eval_atom(a, pose, kps, grip));
    if (f + 1 == free_.size()) {
      for (const auto& a : subgoal_atoms_) s += hinge_sq(eval_atom(a, pose, kps, grip));
    }
    c += w.semantic * s;
  }
  if (ik_res) {
    const double r = ik_solve(problem_.chain, pose, seeds_[f], o.ik).residual;
    *ik_res = r;
    c += w.ik * r * r;
  }
  return c;
}

CostBreakdown PlanObjective::breakdown(const Eigen::VectorXd& x) const {
  const auto traj = trajectory(x);
  const auto& w = problem_.weights;
  const auto& o = problem_.options;
  CostBreakdown b;
  std::vector<Vec3> kps;
  const std::size_t last = free_.back();
  for (std::size_t f = 0; f < free_.size(); ++f) {
    const auto& p = traj[free_[f]];
    b.collision += hinge_sq(o.collision_margin - sdf(problem_.env, p.pose.translation()));
    if (!path_atoms_.empty() || free_[f] == last) {
      tracker_.at(p.pose, kps);
      for (const auto& a : path_atoms_) b.semantic += hinge_sq(eval_atom(a, p.pose, kps, p.gripper));
      if (free_[f] == last) {
        for (const auto& a : subgoal_atoms_) b.semantic += hinge_sq(eval_atom(a, p.pose, kps, p.gripper));
      }
    }
    if (w.ik > 0) {
      const double r = ik_solve(problem_.chain, p.pose, seeds_[f], o.ik).residual;
      b.ik += r * r;
    }
  }
  b.smoothness = smoothness_cost(traj, o.beta);
  b.total = w.semantic * b.semantic + w.collision * b.collision + w.smoothness * b.smoothness + w.ik * b.ik;
  return b;
}

Eigen::VectorXd PlanObjective::gradient(const Eigen::VectorXd& x) const {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(x.size());
  const double h = problem_.options.fd_step;
  const bool use_ik = problem_.weights.ik > 0;
  std::vector<Pose> poses(init_);
  for (std::size_t f = 0; f < free_.size(); ++f) poses[free_[f]] = pose_at(f, x);
  for (std::size_t f = 0; f < free_.size(); ++f) {
    const std::size_t i = free_[f];
    const Pose* prev = i > 0 ? &poses[i - 1] : nullptr;
    const Pose* next = i + 1 < poses.size() ? &poses[i + 1] : nullptr;
    // A converged IK solve contributes a second-order term only; skip its differences.
    double base_res = 0.0;
    bool ik_here = false;
    if (use_ik) {
      local_cost(f, poses[i], prev, next, &base_res);
      ik_here = base_res * base_res > 1e-18;
    }
    const auto seg = x.segment<6>(6 * static_cast<Eigen::Index>(f));
    const Pose& start = init_[i];
    for (int c = 0; c < 6; ++c) {
      Eigen::Matrix<double, 6, 1> lo = seg, hi = seg;
      lo[c] -= h;
      hi[c] += h;
      double r = 0.0;
      const Pose ph = apply_increment(start, hi.head<3>(), hi.tail<3>());
      const Pose pl = apply_increment(start, lo.head<3>(), lo.tail<3>());
      const double fh = local_cost(f, ph, prev, next, ik_here ? &r : nullptr);
      const double fl = local_cost(f, pl, prev, next, ik_here ? &r : nullptr);
      g[6 * static_cast<Eigen::Index>(f) + c] = (fh - fl) / (2.0 * h);
    }
  }
  return g;
}

void PlanObjective::commit(const Eigen::VectorXd& x) {
  if (problem_.weights.ik <= 0) return;
  for (std::size_t f = 0; f < free_.size(); ++f)
    seeds_[f] = ik_solve(problem_.chain, pose_at(f, x), seeds_[f], problem_.options.ik).config;
}

namespace {

struct RunResult {
  Eigen::VectorXd x;
  CostBreakdown cost;
  std::vector<double> history;
  int iterations = 0;
  bool converged = false;
};

// Two-loop recursion for the L-BFGS direction.
Eigen::VectorXd lbfgs_direction(const Eigen::VectorXd& g, const std::deque<Eigen::VectorXd>& s,
                                const std::deque<Eigen::VectorXd>& y) {
  Eigen::VectorXd q = g;
  std::vector<double> alpha(s.size());
  for (std::size_t k = s.size(); k-- > 0;) {
    alpha[k] = s[k].dot(q) / y[k].dot(s[k]);
    q -= alpha[k] * y[k];
  }
  if (!s.empty()) q *= s.back().dot(y.back()) / y.back().squaredNorm();
  for (std::size_t k = 0; k < s.size(); ++k) {
    const double beta = y[k].dot(q) / y[k].dot(s[k]);
    q += (alpha[k] - beta) * s[k];
  }
  return -q;
}

RunResult optimize(PlanObjective& obj, Eigen::VectorXd x, const PlanOptions& opt) {
  constexpr std::size_t kMemory = 8;
  constexpr double kArmijo = 1e-4;
  constexpr double kMaxStep = 0.05;  // largest coordinate change per line-search trial
  RunResult run;
  obj.commit(x);
  double f = obj.value(x);
  run.history.push_back(f);
  if (opt.max_iters == 0) {
    run.x = std::move(x);
    run.cost = obj.breakdown(run.x);
    return run;
  }
  Eigen::VectorXd g = obj.gradient(x);
  std::deque<Eigen::VectorXd> S, Y;
  for (int it = 1; it <= opt.max_iters; ++it) {
    run.iterations = it;
    if (f == 0.0 || g.lpNorm<Eigen::Infinity>() == 0.0) {
      run.converged = true;
      break;
    }
    Eigen::VectorXd d = lbfgs_direction(g, S, Y);
    double slope = g.dot(d);
    if (!(slope < 0.0)) {
      S.clear();
      Y.clear();
      d = -g;
      slope = g.dot(d);
    }
    bool accepted = false;
    Eigen::VectorXd x_new;
    double f_new = f;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      double step = std::min(1.0, kMaxStep / d.lpNorm<Eigen::Infinity>());
      for (int k = 0; k < 40; ++k, step *= 0.5) {
        x_new = x + step * d;
        f_new = obj.value(x_new);
        if (f_new <= f + kArmijo * step * slope) {
          accepted = true;
          break;
        }
      }
      if (!accepted && !S.empty()) {
        S.clear();
        Y.clear();
        d = -g;
        slope = g.dot(d);
      } else {
        break;
      }
    }
    if (!accepted) {
      run.converged = true;  // no descent left at this resolution
      break;
    }
    obj.commit(x_new);
    f_new = std::min(f_new, obj.value(x_new));
    Eigen::VectorXd g_new = obj.gradient(x_new);
    Eigen::VectorXd s = x_new - x, yv = g_new - g;
    if (s.dot(yv) > 1e-12 * s.norm() * yv.norm()) {
      S.push_back(std::move(s));
      Y.push_back(std::move(yv));
      if (S.size() > kMemory) {
        S.pop_front();
        Y.pop_front();
      }
    }
    const double change = (f - f_new) / std::max(std::abs(f), std::numeric_limits<double>::min());
    x = std::move(x_new);
    g = std::move(g_new);
    f = f_new;
    run.history.push_back(f);
    if (change < opt.tol) {
      run.converged = true;
      break;
    }
  }
  run.x = std::move(x);
  run.cost = obj.breakdown(run.x);
  return run;
}

}  // namespace

PlanResult replan(const PlanProblem& problem) {
  validate(problem);
  const auto& opt = problem.options;
  PlanResult best;
  bool have_best = false;
  std::vector<Vec3> base{Vec3::Zero()};
  for (const auto& k : problem.keypoints) base.push_back(k.position);
  const KeypointTracker tracker(base, problem.grasped_keypoint, problem.attach_pose);

  for (int r = 0; r <= opt.restarts; ++r) {
    PlanObjective obj(problem);
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(obj.dimension());
    if (r > 0) {
      Rng rng(derive_seed(opt.seed, 0x706c616eULL, static_cast<std::uint64_t>(r)));
      for (Eigen::Index f = 0; f < x0.size() / 6; ++f) {
        for (int c = 0; c < 3; ++c) x0[6 * f + c] = rng.uniform(-opt.restart_noise, opt.restart_noise);
      }
    }
    RunResult run = optimize(obj, x0, opt);

    PlanResult res;
    res.trajectory = obj.trajectory(run.x);
    res.cost = run.cost;
    res.iterations = run.iterations;
    res.converged = run.converged;
    res.cost_history = std::move(run.history);
    res.runs = r + 1;
    double worst = -std::numeric_limits<double>::infinity();
    if (problem.plan.num_stages > 0) worst = max_violation(res.trajectory, problem.plan, problem.stage, tracker);
    res.max_violation = std::isfinite(worst) ? worst : 0.0;
    res.min_clearance = min_clearance(res.trajectory, problem.env);
    double free_clear = std::numeric_limits<double>::infinity();
    for (std::size_t i : obj.free_indices())
      free_clear = std::min(free_clear, sdf(problem.env, res.trajectory[i].pose.translation()));
    res.feasible = res.max_violation <= opt.feasibility_eps && free_clear >= 0.0;

    const bool better = !have_best || (res.feasible && !best.feasible) ||
                        (res.feasible == best.feasible && res.cost.total < best.cost.total);
    if (better) {
      const int runs = res.runs;
      best = std::move(res);
      best.runs = runs;
      have_best = true;
    }
    best.runs = r + 1;
    if (best.feasible) break;
  }
  return best;
}

Subsegment select_subsegment(std::span<const LabeledPose> traj, const SdfEnvironment& env, const Pose& start,
                             const Pose& goal, double delta) {
  Subsegment out;
  std::size_t best_len = 0;
  std::size_t i = 0;
  const std::size_t n = traj.size();
  while (i < n) {
    if (sdf(env, traj[i].pose.translation()) < 0.0) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < n && sdf(env, traj[j].pose.translation()) >= 0.0) ++j;
    // Clear block [i, j): earliest admissible start, latest admissible end.
    std::optional<std::size_t> a, b;
    for (std::size_t k = i; k < j; ++k) {
      if ((traj[k].pose.translation() - start.translation()).norm() <= delta) {
        a = k;
        break;
      }
    }
    for (std::size_t k = j; k-- > i;) {
      if ((traj[k].pose.translation() - goal.translation()).norm() <= delta) {
        b = k;
        break;
      }
    }
    if (a && b && *b >= *a && *b - *a + 1 > best_len) {
      best_len = *b - *a + 1;
      out.begin = *a;
      out.end = *b + 1;
      out.ok = true;
    }
    i = j;
  }
  if (out.ok) {
    out.trajectory.assign(traj.begin() + static_cast<std::ptrdiff_t>(out.begin),
                          traj.begin() + static_cast<std::ptrdiff_t>(out.end));
  } else {
    out.trajectory.assign(traj.begin(), traj.end());
    out.begin = 0;
    out.end = n;
  }
  return out;
}

namespace {

json weights_json(const PlanWeights& w) {
  return {{"semantic", w.semantic}, {"collision", w.collision}, {"smoothness", w.smoothness}, {"ik", w.ik}};
}

json options_json(const PlanOptions& o) {
  return {{"max_iters", o.max_iters},
          {"tol", o.tol},
          {"restarts", o.restarts},
          {"collision_margin", o.collision_margin},
          {"feasibility_eps", o.feasibility_eps},
          {"beta", o.beta},
          {"fd_step", o.fd_step},
          {"restart_noise", o.restart_noise},
          {"seed", o.seed},
          {"ik", {{"damping", o.ik.damping}, {"max_iterations", o.ik.max_iterations}, {"tolerance", o.ik.tolerance}}}};
}

json cost_json(const CostBreakdown& c) {
  return {{"J_p", c.semantic}, {"J_c", c.collision}, {"J_l", c.smoothness}, {"J_ik", c.ik}, {"total", c.total}};
}

}  // namespace

std::string to_json_string(const PlanProblem& p) {
  json kps = json::array();
  for (const auto& k : p.keypoints) kps.push_back({{"id", k.id}, {"position", codec::vec(k.position)}});
  json j = {{"trajectory", p.trajectory},
            {"plan", p.plan},
            {"stage", p.stage},
            {"env", p.env},
            {"chain", p.chain},
            {"ik_seed", codec::joints(p.ik_seed)},
            {"weights", weights_json(p.weights)},
            {"keypoints", kps},
            {"grasped_keypoint", p.grasped_keypoint},
            {"attach_pose", p.attach_pose},
            {"options", options_json(p.options)}};
  return j.dump(1) + "\n";
}

PlanProblem plan_problem_from_json(std::string_view text) {
  const json j = codec::parse_document(text);
  return codec::decode("plan problem", [&] {
    PlanProblem p;
    p.trajectory = j.at("trajectory").get<std::vector<LabeledPose>>();
    if (j.contains("plan") && !j.at("plan").is_null()) p.plan = j.at("plan").get<ConstraintPlan>();
    p.stage = j.value("stage", 0);
    p.env = j.at("env").get<SdfEnvironment>();
    if (j.contains("chain")) p.chain = j.at("chain").get<KinematicChain>();
    if (j.contains("ik_seed")) p.ik_seed = codec::joints(j.at("ik_seed"));
    if (j.contains("weights")) {
      const auto& w = j.at("weights");
      p.weights = {w.value("semantic", 100.0), w.value("collision", 1.0), w.value("smoothness", 0.1),
                   w.value("ik", 20.0)};
    }
    for (const auto& k : j.value("keypoints", json::array()))
      p.keypoints.push_back({k.at("id").get<int>(), codec::vec(k.at("position"))});
    p.grasped_keypoint = j.value("grasped_keypoint", -1);
    p.attach_pose = j.value("attach_pose", Pose{});
    if (j.contains("options")) {
      const auto& o = j.at("options");
      PlanOptions d;
      d.max_iters = o.value("max_iters", d.max_iters);
      d.tol = o.value("tol", d.tol);
      d.restarts = o.value("restarts", d.restarts);
      d.collision_margin = o.value("collision_margin", d.collision_margin);
      d.feasibility_eps = o.value("feasibility_eps", d.feasibility_eps);
      d.beta = o.value("beta", d.beta);
      d.fd_step = o.value("fd_step", d.fd_step);
      d.restart_noise = o.value("restart_noise", d.restart_noise);
      d.seed = o.value("seed", d.seed);
      if (o.contains("ik")) {
        const auto& ik = o.at("ik");
        d.ik.damping = ik.value("damping", d.ik.damping);
        d.ik.max_iterations = ik.value("max_iterations", d.ik.max_iterations);
        d.ik.tolerance = ik.value("tolerance", d.ik.tolerance);
      }
      p.options = d;
    }
    return p;
  });
}

std::string to_json_string(const PlanResult& r) {
  json j = {{"trajectory", r.trajectory},
            {"cost", cost_json(r.cost)},
            {"iterations", r.iterations},
            {"converged", r.converged},
            {"feasible", r.feasible},
            {"cost_history", r.cost_history},
            {"max_violation", r.max_violation},
            {"min_clearance", std::isfinite(r.min_clearance) ? json(r.min_clearance) : json(nullptr)},
            {"runs", r.runs}};
  return j.dump(1) + "\n";
}

}  // namespace hybridgen
