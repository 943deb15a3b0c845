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

#include "hybridgen/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <sstream>
#include <thread>

#include "codec.hpp"
#include "hybridgen/adapt.hpp"
#include "hybridgen/errors.hpp"
#include "hybridgen/rng.hpp"
#include "hybridgen/selection.hpp"

namespace hybridgen {

using nlohmann::json;

namespace {

constexpr std::uint64_t kStage1Stream = 1;
constexpr std::uint64_t kStage2Stream = 2;

std::filesystem::path resolve(const std::filesystem::path& base, const std::filesystem::path& p) {
  return p.is_absolute() ? p : base / p;
}

}  // namespace

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  const json j = codec::parse_document(read_text_file(path));
  const auto dir = path.parent_path();
  return codec::decode("pipeline config", [&] {
    PipelineConfig c;
    c.task = j.value("task", c.task);
    if (j.contains("variant")) c.variant = variant_from_string(j.at("variant").get<std::string>());
    c.seed = j.value("seed", c.seed);
    c.stage1_target = j.value("stage1_target", c.stage1_target);
    c.stage2_target = j.value("stage2_target", c.stage2_target);
    if (j.contains("attempt_limit") && !j.at("attempt_limit").is_null())
      c.attempt_limit = j.at("attempt_limit").get<std::size_t>();
    c.k = j.value("k", c.k);
    c.use_vlm = j.value("use_vlm", c.use_vlm);
    c.use_grt = j.value("use_grt", c.use_grt);
    c.workers = j.value("workers", c.workers);
    if (j.contains("weights")) {
      const auto& w = j.at("weights");
      c.weights.semantic = w.value("semantic", c.weights.semantic);
      c.weights.collision = w.value("collision", c.weights.collision);
      c.weights.smoothness = w.value("smoothness", c.weights.smoothness);
      c.weights.ik = w.value("ik", c.weights.ik);
    }
    if (j.contains("plan")) {
      const auto& o = j.at("plan");
      auto& p = c.plan_options;
      p.max_iters = o.value("max_iters", p.max_iters);
      p.tol = o.value("tol", p.tol);
      p.restarts = o.value("restarts", p.restarts);
      p.collision_margin = o.value("collision_margin", p.collision_margin);
      p.feasibility_eps = o.value("feasibility_eps", p.feasibility_eps);
    }
    if (j.contains("distance")) {
      const auto& d = j.at("distance");
      c.distance.translation = d.value("translation", c.distance.translation);
      c.distance.rotation = d.value("rotation", c.distance.rotation);
    }
    if (j.contains("vlm")) {
      c.transport = parse_transport(j.at("vlm").get<std::string>());
      if (auto* r = std::get_if<RecordedTransport>(&c.transport)) r->dir = resolve(dir, r->dir);
    }
    if (j.contains("tasks_file")) c.tasks_file = resolve(dir, j.at("tasks_file").get<std::string>());
    c.upsample = j.value("upsample", c.upsample);
    c.stitch_gap = j.value("stitch_gap", c.stitch_gap);
    c.bridge_step = j.value("bridge_step", c.bridge_step);
    c.bridge_rot_step = j.value("bridge_rot_step", c.bridge_rot_step);
    c.batch = j.value("batch", c.batch);
    if (c.k < 1 || c.stage1_target < 1 || c.stage2_target < 1 || c.workers < 1 || c.batch < 1)
      throw ValidationError("pipeline config: k, targets, workers and batch must be >= 1");
    return c;
  });
}

std::string to_json_string(const GenerationReport& report) {
  json stages = json::array();
  for (const auto& s : report.stages) {
    stages.push_back({{"stage", s.stage},
                      {"attempts", s.attempts},
                      {"successes", s.successes},
                      {"failures",
                       {{"planner_infeasible", s.failures.planner_infeasible},
                        {"execution_collision", s.failures.execution_collision},
                        {"predicate_failed", s.failures.predicate_failed}}},
                      {"wall_seconds", s.wall_seconds},
                      {"seed", s.seed}});
  }
  return json{{"stages", stages}}.dump(2) + "\n";
}

ConstraintPlan fetch_constraint_plan(const TaskSpec& task, const PipelineConfig& cfg, int num_keypoints) {
  const VlmRequest req{RequestKind::ConstraintProposal, render_prompt(RequestKind::ConstraintProposal, task.description),
                       {"image:" + task.name + "_scene"}};
  const std::string raw = fetch_raw(req, cfg.transport);
  VlmResponse r = parse_constraint_response(raw, num_keypoints);
  if (!r.valid) {
    std::string msg = "constraint plan for '" + task.name + "' is invalid:";
    for (const auto& v : r.violations) msg += "\n  " + v;
    throw ValidationError(msg);
  }
  return std::get<ConstraintPlan>(r.parsed);
}

Dataset label_dataset(const Dataset& src, const PipelineConfig& cfg) {
  const TaskSpec task = load_task_config(cfg.tasks_file).task(src.metadata.task);
  Dataset out = src;
  for (auto& demo : out.demonstrations) {
    const VlmRequest req{RequestKind::VideoAnalysis, render_prompt(RequestKind::VideoAnalysis, task.description),
                         {"video:" + demo.source_id}};
    const VlmResponse r = fetch(req, cfg.transport);
    if (!r.valid) {
      std::string msg = "video analysis for '" + demo.source_id + "' is invalid:";
      for (const auto& v : r.violations) msg += "\n  " + v;
      throw ValidationError(msg);
    }
    const auto& iv = std::get<std::vector<TimeInterval>>(r.parsed);
    demo = label_from_intervals(std::move(demo), iv, src.metadata.fps, cfg.upsample);
  }
  return out;
}

namespace {

struct Attempt {
  AttemptOutcome outcome = AttemptOutcome::PredicateFailed;
  Demonstration demo;
};

// Runs attempts [begin, begin + count) on `workers` threads; results by index.
template <typename F>
std::vector<Attempt> run_batch(std::size_t begin, std::size_t count, int workers, const F& f) {
  std::vector<Attempt> out(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        out[i] = f(begin + i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int n = std::max(1, std::min<int>(workers, static_cast<int>(count)));
  if (n == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

template <typename F>
std::pair<std::vector<Demonstration>, StageReport> generate(const std::string& name, std::size_t target,
                                                            const PipelineConfig& cfg, const F& attempt) {
  const auto t0 = std::chrono::steady_clock::now();
  StageReport report;
  report.stage = name;
  report.seed = cfg.seed;
  const std::size_t limit = cfg.attempt_limit.value_or(10 * target);
  std::vector<Demonstration> kept;
  std::size_t next = 0;
  while (kept.size() < target && next < limit) {
    const std::size_t count =
        std::min(static_cast<std::size_t>(cfg.batch) * static_cast<std::size_t>(cfg.workers), limit - next);
    auto results = run_batch(next, count, cfg.workers, attempt);
    for (auto& r : results) {
      if (kept.size() >= target) break;
      ++report.attempts;
      switch (r.outcome) {
        case AttemptOutcome::Success:
          kept.push_back(std::move(r.demo));
          break;
        case AttemptOutcome::PlannerInfeasible: ++report.failures.planner_infeasible; break;
        case AttemptOutcome::ExecutionCollision: ++report.failures.execution_collision; break;
        case AttemptOutcome::PredicateFailed: ++report.failures.predicate_failed; break;
      }
    }
    next += count;
  }
  report.successes = kept.size();
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (kept.empty())
    throw PipelineError(name + ": no successful demonstrations after " + std::to_string(report.attempts) +
                            " attempts",
                        report);
  return {std::move(kept), report};
}

// Candidates for subtask i over every demonstration.
std::vector<std::vector<GraspCandidate>> candidates_by_subtask(const Dataset& ds, std::size_t subtasks) {
  std::vector<std::vector<GraspCandidate>> out(subtasks);
  for (const auto& d : ds.demonstrations) {
    if (d.segments.size() != subtasks)
      throw ValidationError("demonstration '" + d.source_id + "' has " + std::to_string(d.segments.size()) +
                            " segments, the task has " + std::to_string(subtasks));
    for (std::size_t i = 0; i < subtasks; ++i) out[i].push_back(make_candidate(d, i));
  }
  return out;
}

std::size_t choose(const std::vector<GraspCandidate>& cands, const Pose& current_rel, const PipelineConfig& cfg,
                   Rng& rng) {
  if (!cfg.use_grt) return static_cast<std::size_t>(rng.index(cands.size()));
  const auto top = select_topk(current_rel, cands, cfg.k, cfg.distance);
  return pick(top, rng);
}

Pose current_relative(const SceneDescription& scene, const SubtaskSpec& st, const Pose& ee) {
  const Pose& target = scene.object(st.target_object).pose;
  const Pose grasp = st.grasp_object ? scene.object(*st.grasp_object).pose : ee;
  return relative_grasp(grasp, target);
}

void append_tracking_attach(std::vector<LabeledPose>& out, const LabeledPose& p, std::optional<Pose>& attach) {
  if (!out.empty() && !out.back().closed() && p.closed()) attach = p.pose;
  out.push_back(p);
}

std::string provenance(const char* stage, std::size_t attempt, const std::vector<std::string>& ids) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s-%06zu:", stage, attempt);
  std::string s = buf;
  for (std::size_t i = 0; i < ids.size(); ++i) s += (i ? "+" : "") + ids[i];
  return s;
}

Attempt finish(std::vector<LabeledPose> traj, std::vector<SubtaskSegment> segments, const SceneDescription& scene,
               const TaskSpec& task, std::string source_id) {
  Attempt a;
  const ExecutionTrace trace = run(traj, scene, task);
  if (trace.collision) {
    a.outcome = AttemptOutcome::ExecutionCollision;
    return a;
  }
  if (!trace.success) {
    a.outcome = AttemptOutcome::PredicateFailed;
    return a;
  }
  a.outcome = AttemptOutcome::Success;
  a.demo.poses = std::move(traj);
  a.demo.segments = std::move(segments);
  a.demo.scene = scene;
  a.demo.source_id = std::move(source_id);
  a.demo.grasp_offsets = trace.grasp_offsets;
  return a;
}

}  // namespace

std::pair<Dataset, StageReport> stage1(const Dataset& src, const PipelineConfig& cfg) {
  const TaskConfig tc = load_task_config(cfg.tasks_file);
  const TaskSpec& task = tc.task(src.metadata.task.empty() ? cfg.task : src.metadata.task);
  ConstraintPlan plan;
  if (cfg.use_vlm) {
    SceneDescription probe;
    probe.objects = task.objects;
    plan = fetch_constraint_plan(task, cfg, static_cast<int>(probe.world_keypoints().size()));
  }
  return stage1(src, cfg, task, tc.robot, plan);
}

std::pair<Dataset, StageReport> stage1(const Dataset& src, const PipelineConfig& cfg, const TaskSpec& task,
                                       const RobotSpec& robot, const ConstraintPlan& plan) {
  if (src.demonstrations.empty()) throw ValidationError("stage1 needs at least one source demonstration");
  validate(src);
  const std::size_t M = task.subtasks.size();
  const auto cands = candidates_by_subtask(src, M);
  const Pose home = robot.home_pose();
  PlanWeights weights = cfg.weights;
  PlanOptions options = cfg.plan_options;
  if (!cfg.use_vlm) {
    weights.semantic = 0.0;
    options.max_iters = 0;
    options.restarts = 0;
  }

  auto attempt = [&](std::size_t a) -> Attempt {
    Rng rng(derive_seed(cfg.seed, kStage1Stream, a));
    const SceneDescription scene = sample_scene(task, cfg.variant, rng);
    const SdfEnvironment env = scene.obstacles();
    std::vector<Vec3> world_kps = scene.world_keypoints();
    std::vector<Keypoint> keypoints;
    for (std::size_t i = 0; i < world_kps.size(); ++i) keypoints.push_back({static_cast<int>(i) + 1, world_kps[i]});

    std::vector<LabeledPose> out{{home, 0.0, PoseLabel::R}};
    std::vector<SubtaskSegment> segments;
    std::map<std::string, Pose> new_offsets;
    std::vector<std::string> used;
    std::optional<Pose> attach;
    std::size_t seg_start = 0;
    for (std::size_t i = 0; i < M; ++i) {
      const auto& st = task.subtasks[i];
      const std::size_t pick_idx = choose(cands[i], current_relative(scene, st, out.back().pose), cfg, rng);
      const Demonstration& demo = src.demonstrations[pick_idx];
      used.push_back(demo.source_id);
      const auto adapted = adapt_demo_segment(demo, i, scene, new_offsets);

      std::size_t b = 0;
      while (b < adapted.size()) {
        std::size_t e = b;
        const PoseLabel label = adapted[b].label;
        while (e < adapted.size() && adapted[e].label == label) ++e;
        if (label == PoseLabel::D) {
          // Consecutive data-dependent runs from different segments must already meet.
          if ((adapted[b].pose.translation() - out.back().pose.translation()).norm() > cfg.stitch_gap)
            return {AttemptOutcome::PlannerInfeasible, {}};
          for (std::size_t k = b; k < e; ++k) append_tracking_attach(out, adapted[k], attach);
        } else {
          const std::size_t n = e - b;
          const LabeledPose left = out.back();
          const std::optional<LabeledPose> right =
              e < adapted.size() ? std::optional<LabeledPose>(adapted[e]) : std::nullopt;
          PlanProblem prob;
          prob.trajectory.push_back({left.pose, left.gripper, PoseLabel::D});
          for (std::size_t k = 0; k < n; ++k) {
            Pose init = right ? interpolate(left.pose, right->pose, static_cast<double>(k + 1) / static_cast<double>(n + 1))
                              : adapted[b + k].pose;
            prob.trajectory.push_back({init, adapted[b + k].gripper, PoseLabel::R});
          }
          if (right) prob.trajectory.push_back({right->pose, right->gripper, PoseLabel::D});
          if (cfg.use_vlm && static_cast<int>(i) < plan.num_stages) {
            prob.plan = plan;
            prob.stage = static_cast<int>(i);
          }
          prob.env = env;
          prob.chain = robot.chain;
          prob.ik_seed = robot.home;
          prob.weights = weights;
          prob.keypoints = keypoints;
          if (st.grasp_object && attach) {
            prob.grasped_keypoint = scene.first_keypoint_id(*st.grasp_object).value_or(-1);
            prob.attach_pose = *attach;
          }
          prob.options = options;
          prob.options.seed = derive_seed(cfg.seed, a, i);
          const PlanResult res = replan(prob);
          if (!res.feasible) return {AttemptOutcome::PlannerInfeasible, {}};
          const std::span<const LabeledPose> free(res.trajectory.data() + 1, n);
          const Pose goal = right ? right->pose : free.back().pose;
          const Subsegment sub = select_subsegment(free, env, left.pose, goal, cfg.stitch_gap);
          if (!sub.ok) return {AttemptOutcome::PlannerInfeasible, {}};
          for (const auto& p : sub.trajectory) append_tracking_attach(out, p, attach);
        }
        b = e;
      }
      if (i + 1 < M && task.subtasks[i + 1].grasp_object) {
        const auto& obj = *task.subtasks[i + 1].grasp_object;
        if (const auto it = demo.grasp_offsets.find(obj); it != demo.grasp_offsets.end()) new_offsets[obj] = it->second;
      }
      segments.push_back({seg_start, out.size(), st.target_object, st.grasp_object});
      seg_start = out.size();
    }
    return finish(std::move(out), std::move(segments), scene, task, provenance("s1", a, used));
  };

  auto [kept, report] = generate("stage1", cfg.stage1_target, cfg, attempt);
  Dataset ds;
  ds.metadata = src.metadata;
  ds.metadata.stage = Stage::Stage1;
  ds.metadata.variant = cfg.variant;
  ds.metadata.seed = cfg.seed;
  ds.demonstrations = std::move(kept);
  return {std::move(ds), report};
}

std::pair<Dataset, StageReport> stage2(const Dataset& stage1_out, const PipelineConfig& cfg) {
  const TaskConfig tc = load_task_config(cfg.tasks_file);
  return stage2(stage1_out, cfg, tc.task(stage1_out.metadata.task.empty() ? cfg.task : stage1_out.metadata.task),
                tc.robot);
}

std::pair<Dataset, StageReport> stage2(const Dataset& stage1_out, const PipelineConfig& cfg, const TaskSpec& task,
                                       const RobotSpec& robot) {
  if (stage1_out.demonstrations.empty()) throw ValidationError("stage2 needs a nonempty stage-1 dataset");
  validate(stage1_out);
  const std::size_t M = task.subtasks.size();
  const auto cands = candidates_by_subtask(stage1_out, M);
  const Pose home = robot.home_pose();

  auto bridge = [&](std::vector<LabeledPose>& out, const Pose& to) {
    const LabeledPose from = out.back();
    const double steps = std::max((to.translation() - from.pose.translation()).norm() / cfg.bridge_step,
                                  geodesic_angle(from.pose.rotation(), to.rotation()) / cfg.bridge_rot_step);
    const int n = static_cast<int>(std::ceil(steps)) - 1;
    for (int k = 1; k <= n; ++k)
      out.push_back({interpolate(from.pose, to, static_cast<double>(k) / (n + 1)), from.gripper, PoseLabel::R});
  };

  auto attempt = [&](std::size_t a) -> Attempt {
    Rng rng(derive_seed(cfg.seed, kStage2Stream, a));
    const SceneDescription scene = sample_scene(task, cfg.variant, rng);
    std::vector<LabeledPose> out{{home, 0.0, PoseLabel::R}};
    std::vector<SubtaskSegment> segments;
    std::map<std::string, Pose> new_offsets;
    std::vector<std::string> used;
    std::size_t seg_start = 0;
    for (std::size_t i = 0; i < M; ++i) {
      const auto& st = task.subtasks[i];
      const std::size_t pick_idx = choose(cands[i], current_relative(scene, st, out.back().pose), cfg, rng);
      const Demonstration& demo = stage1_out.demonstrations[pick_idx];
      used.push_back(demo.source_id.substr(0, demo.source_id.find(':')));
      const auto adapted = adapt_demo_segment(demo, i, scene, new_offsets);
      bridge(out, adapted.front().pose);
      out.insert(out.end(), adapted.begin(), adapted.end());
      if (i + 1 < M && task.subtasks[i + 1].grasp_object) {
        const auto& obj = *task.subtasks[i + 1].grasp_object;
        if (const auto it = demo.grasp_offsets.find(obj); it != demo.grasp_offsets.end()) new_offsets[obj] = it->second;
      }
      segments.push_back({seg_start, out.size(), st.target_object, st.grasp_object});
      seg_start = out.size();
    }
    return finish(std::move(out), std::move(segments), scene, task, provenance("s2", a, used));
  };

  auto [kept, report] = generate("stage2", cfg.stage2_target, cfg, attempt);
  Dataset ds;
  ds.metadata = stage1_out.metadata;
  ds.metadata.stage = Stage::Stage2;
  ds.metadata.variant = cfg.variant;
  ds.metadata.seed = cfg.seed;
  ds.demonstrations = std::move(kept);
  return {std::move(ds), report};
}

std::vector<std::size_t> verify(const Dataset& dataset, const TaskSpec& task) {
  std::vector<std::size_t> bad;
  for (std::size_t i = 0; i < dataset.demonstrations.size(); ++i) {
    const auto& d = dataset.demonstrations[i];
    if (!run(d.poses, d.scene, task).success) bad.push_back(i);
  }
  return bad;
}

DatasetSummary summarize(const Dataset& dataset, const TaskSpec* task) {
  DatasetSummary s;
  s.task = dataset.metadata.task;
  s.variant = std::string(to_string(dataset.metadata.variant));
  s.stage = std::string(to_string(dataset.metadata.stage));
  s.demonstrations = dataset.demonstrations.size();
  std::vector<Pose> grasps;
  double total = 0.0;
  for (const auto& d : dataset.demonstrations) {
    total += static_cast<double>(d.poses.size());
    ++s.length_histogram[d.poses.size() / 10 * 10];
    for (std::size_t i = 0; i < d.poses.size(); ++i) {
      if (d.poses[i].closed() && (i == 0 || !d.poses[i - 1].closed())) {
        grasps.push_back(d.poses[i].pose);
        break;
      }
    }
  }
  if (task) s.verified = s.demonstrations - verify(dataset, *task).size();
  if (s.demonstrations > 0) s.mean_length = total / static_cast<double>(s.demonstrations);
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < grasps.size(); ++i) {
    for (std::size_t j = i + 1; j < grasps.size(); ++j) {
      sum += pose_distance(grasps[i], grasps[j]);
      ++pairs;
    }
  }
  s.grasp_diversity = pairs ? sum / static_cast<double>(pairs) : 0.0;
  return s;
}

std::string to_json_string(const DatasetSummary& s) {
  json hist = json::object();
  for (const auto& [k, v] : s.length_histogram) hist[std::to_string(k)] = v;
  json j = {{"task", s.task},
            {"variant", s.variant},
            {"stage", s.stage},
            {"demonstrations", s.demonstrations},
            {"verified", s.verified},
            {"mean_length", s.mean_length},
            {"length_histogram", hist},
            {"grasp_diversity", s.grasp_diversity}};
  return j.dump(2) + "\n";
}

std::string to_text(const DatasetSummary& s) {
  std::ostringstream o;
  o << "task " << s.task << "  variant " << s.variant << "  stage " << s.stage << "\n";
  o << "demonstrations " << s.demonstrations << "  verified " << s.verified << "\n";
  o << "mean length " << s.mean_length << " poses\n";
  o << "grasp diversity " << s.grasp_diversity << "\n";
  o << "length histogram:\n";
  for (const auto& [k, v] : s.length_histogram) o << "  " << k << "-" << k + 9 << ": " << v << "\n";
  return o.str();
}

}  // namespace hybridgen
