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


// Regenerates the committed fixtures under data/: scripted source datasets,
// recorded model responses, the corridor planning problem and a synthetic
// response map.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "expert.hpp"
#include "hybridgen/keypoints.hpp"
#include "hybridgen/planner.hpp"

namespace fs = std::filesystem;
using namespace hybridgen;

namespace {

PlanProblem corridor(const RobotSpec& robot) {
  PlanProblem p;
  const Pose a(fixtures::down(0.0), Vec3(0.35, -0.2, 0.2));
  const Pose b(fixtures::down(0.0), Vec3(0.35, 0.2, 0.2));
  constexpr int kFree = 18;
  p.trajectory.push_back({a, 0.0, PoseLabel::D});
  for (int k = 1; k <= kFree; ++k) p.trajectory.push_back({interpolate(a, b, k / (kFree + 1.0)), 0.0, PoseLabel::R});
  p.trajectory.push_back({b, 0.0, PoseLabel::D});
  // Slightly off the straight line so the gradient has a preferred side.
  p.env.primitives.push_back(Sphere{Vec3(0.36, 0.0, 0.19), 0.06});
  p.env.workspace = {Vec3(0.0, -0.5, 0.0), Vec3(0.8, 0.5, 0.6)};
  p.chain = robot.chain;
  p.ik_seed = robot.home;
  p.keypoints = {{1, b.translation()}};
  p.plan.num_stages = 1;
  p.plan.grasp_keypoints = {-1};
  p.plan.release_keypoints = {-1};
  p.plan.atoms.push_back(ConstraintAtom::point_offset(0, AtomRole::Subgoal, 0, 1, Vec3(0, -0.02, 0), 0.03));
  p.plan.atoms.push_back(ConstraintAtom::height_above(0, AtomRole::Path, 0, 1, -0.15));
  return p;
}

// Three planted peaks inside the workspace plus one beyond its x limit.
ResponseMap three_peaks() {
  ResponseMap m;
  m.height = 16;
  m.width = 16;
  m.text_prompt = "ring and peg";
  m.image_id = "square_scene";
  struct Peak {
    int r, c;
    double amp;
  };
  const Peak peaks[] = {{3, 4, 1.0}, {8, 11, 0.9}, {12, 5, 0.8}, {2, 14, 0.95}};
  for (int r = 0; r < m.height; ++r) {
    for (int c = 0; c < m.width; ++c) {
      double v = 0.02;
      for (const auto& p : peaks) {
        const double d2 = (r - p.r) * (r - p.r) + (c - p.c) * (c - p.c);
        v = std::max(v, p.amp * std::exp(-d2 / 2.0));
      }
      m.values.push_back(std::round(v * 1e6) / 1e6);
      m.points.emplace_back(Vec3(0.2 + 0.04 * c, -0.3 + 0.04 * r, 0.02));
    }
  }
  return m;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regenerate the committed test fixtures"};
  fs::path tasks_file = "config/tasks.json";
  fs::path out = "data";
  std::uint64_t seed = 7;
  std::size_t count = 10;
  app.add_option("--tasks", tasks_file, "task configuration")->check(CLI::ExistingFile);
  app.add_option("--out", out, "output directory");
  app.add_option("--seed", seed, "source scene seed");
  app.add_option("--count", count, "source demonstrations per task");
  CLI11_PARSE(app, argc, argv);

  try {
    const TaskConfig tc = load_task_config(tasks_file);
    const fs::path rec = out / "recordings";
    for (const auto& task : tc.tasks) {
      const Dataset ds = fixtures::source_dataset(task, tc.robot, Variant::D0, count, seed);
      if (ds.demonstrations.size() < count) {
        std::cerr << task.name << ": expert produced only " << ds.demonstrations.size() << " demos\n";
        return 1;
      }
      save(ds, out / (task.name + "_source.json"));
      for (const auto& d : ds.demonstrations) {
        const VlmRequest req{RequestKind::VideoAnalysis, render_prompt(RequestKind::VideoAnalysis, task.description),
                             {"video:" + d.source_id}};
        record(req, fixtures::video_response(fixtures::expert_intervals()), rec);
      }
      const VlmRequest req{RequestKind::ConstraintProposal,
                           render_prompt(RequestKind::ConstraintProposal, task.description),
                           {"image:" + task.name + "_scene"}};
      record(req, fixtures::plan_response(fixtures::expert_plan(task)), rec);
      std::cout << task.name << ": " << ds.demonstrations.size() << " source demos\n";
    }
    write_text_file(out / "corridor_problem.json", to_json_string(corridor(tc.robot)));
    save(three_peaks(), out / "response_map_3peaks.json");
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
