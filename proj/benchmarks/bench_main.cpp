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


#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "hybridgen/planner.hpp"
#include "hybridgen/selection.hpp"
#include "hybridgen/simenv.hpp"

using namespace hybridgen;

namespace {

const std::filesystem::path kRoot = HYBRIDGEN_SOURCE_DIR;

Pose some_pose(Rng& rng) {
  const Vec3 axis = Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)).normalized();
  return {Quat(Eigen::AngleAxisd(rng.uniform(0, std::numbers::pi), axis)),
          Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1))};
}

void BM_Compose(benchmark::State& state) {
  Rng rng(1);
  const Pose a = some_pose(rng), b = some_pose(rng);
  for (auto _ : state) benchmark::DoNotOptimize(compose(a, b));
}
BENCHMARK(BM_Compose);

void BM_IkSolve(benchmark::State& state) {
  const RobotSpec robot = load_task_config(kRoot / "config/tasks.json").robot;
  JointVector q = robot.home;
  q[0] += 0.3;
  q[2] -= 0.2;
  const Pose target = forward_kinematics(robot.chain, q);
  for (auto _ : state) benchmark::DoNotOptimize(ik_solve(robot.chain, target, robot.home));
}
BENCHMARK(BM_IkSolve);

void BM_ReplanCorridor(benchmark::State& state) {
  const PlanProblem p = plan_problem_from_json(read_text_file(kRoot / "data/corridor_problem.json"));
  for (auto _ : state) benchmark::DoNotOptimize(replan(p));
}
BENCHMARK(BM_ReplanCorridor)->Unit(benchmark::kMillisecond);

void BM_SelectTopk(benchmark::State& state) {
  Rng rng(2);
  std::vector<GraspCandidate> cands;
  for (int i = 0; i < state.range(0); ++i)
    cands.push_back({"demo_" + std::to_string(i % 50), static_cast<std::size_t>(i % 2), some_pose(rng)});
  const Pose cur = some_pose(rng);
  for (auto _ : state) benchmark::DoNotOptimize(select_topk(cur, cands, 3));
}
BENCHMARK(BM_SelectTopk)->Arg(50)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
