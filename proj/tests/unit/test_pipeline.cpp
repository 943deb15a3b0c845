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


#include <cmath>
#include <numbers>
#include <string>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "hybridgen/errors.hpp"
#include "hybridgen/pipeline.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace hybridgen;

namespace {

PipelineConfig base_config() { return load_pipeline_config(testing::source_dir() / "config/pipeline.json"); }

const Dataset& labeled_square() {
  static const Dataset d = label_dataset(load_dataset(testing::source_dir() / "data/square_source.json"),
                                         base_config());
  return d;
}

LabeledPose lp(double x, double gripper) { return {Pose(Quat::Identity(), Vec3(x, 0, 0.2)), gripper}; }

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("configuration files") {
  const PipelineConfig c = base_config();
  CHECK(c.task == "square");
  CHECK(c.stage1_target == 50);
  CHECK(c.stage2_target == 1000);
  CHECK(c.k == 3);
  CHECK(std::filesystem::exists(c.tasks_file));
  REQUIRE(std::holds_alternative<RecordedTransport>(c.transport));
  CHECK(std::filesystem::is_directory(std::get<RecordedTransport>(c.transport).dir));

  const auto dir = testing::source_dir() / "config/ablation";
  const std::pair<bool, bool> flags[] = {{true, true}, {false, true}, {true, false}, {false, false}};
  const char* names[] = {"a.json", "b.json", "c.json", "d.json"};
  for (int i = 0; i < 4; ++i) {
    const PipelineConfig a = load_pipeline_config(dir / names[i]);
    CHECK(a.use_vlm == flags[i].first);
    CHECK(a.use_grt == flags[i].second);
    CHECK(a.attempt_limit == std::optional<std::size_t>(500));
    CHECK(std::filesystem::exists(a.tasks_file));
  }
}

TEST_CASE("labeling from recorded video analysis") {
  const Dataset& d = labeled_square();
  CHECK(d.demonstrations.size() == 10);
  for (const auto& demo : d.demonstrations) {
    REQUIRE(demo.poses.size() == 70);
    for (std::size_t i = 0; i < demo.poses.size(); ++i) {
      const bool in_d = (i >= 20 && i < 30) || (i >= 50 && i < 70);
      CHECK((demo.poses[i].label == PoseLabel::D) == in_d);
    }
  }
}

TEST_CASE("stage 1 keeps verified successes deterministically") {
  PipelineConfig cfg = base_config();
  cfg.stage1_target = 4;
  const auto [a, ra] = stage1(labeled_square(), cfg);
  const auto [b, rb] = stage1(labeled_square(), cfg);
  CHECK(a.demonstrations.size() == 4);
  CHECK(ra.successes == 4);
  CHECK(ra.successes <= ra.attempts);
  CHECK(ra.attempts == ra.successes + ra.failures.planner_infeasible + ra.failures.execution_collision +
                           ra.failures.predicate_failed);
  CHECK(a.metadata.stage == Stage::Stage1);
  CHECK(to_json_string(a) == to_json_string(b));
  const TaskConfig tc = load_task_config(cfg.tasks_file);
  CHECK(verify(a, tc.task("square")).empty());

  cfg.workers = 2;
  CHECK(to_json_string(stage1(labeled_square(), cfg).first) == to_json_string(a));
  cfg.workers = 1;
  cfg.seed = 1;
  CHECK(to_json_string(stage1(labeled_square(), cfg).first) != to_json_string(a));
}

TEST_CASE("interpolation-only configuration runs without a constraint plan") {
  PipelineConfig cfg = base_config();
  cfg.stage1_target = 2;
  cfg.use_vlm = false;
  cfg.transport = RecordedTransport{"/nonexistent"};
  const auto [out, report] = stage1(labeled_square(), cfg);
  CHECK(report.attempts >= report.successes);
  CHECK(out.demonstrations.size() == report.successes);
}

TEST_CASE("stage 2 from a single stage-1 demonstration") {
  PipelineConfig cfg = base_config();
  cfg.stage1_target = 1;
  const auto one = stage1(labeled_square(), cfg).first;
  REQUIRE(one.demonstrations.size() == 1);
  cfg.stage2_target = 3;
  const auto [out, report] = stage2(one, cfg);
  CHECK(report.successes <= 3);
  CHECK(out.metadata.stage == Stage::Stage2);
  const TaskConfig tc = load_task_config(cfg.tasks_file);
  CHECK(verify(out, tc.task("square")).empty());
  CHECK_THROWS_AS(stage2(Dataset{}, cfg), ValidationError);
}

TEST_CASE("exhausted attempt budget raises with the report") {
  PipelineConfig cfg = base_config();
  cfg.stage1_target = 1;
  cfg.attempt_limit = 3;
  const TaskConfig tc = load_task_config(cfg.tasks_file);
  TaskSpec impossible = tc.task("square");
  impossible.success.radius = -1.0;
  const ConstraintPlan plan = fetch_constraint_plan(tc.task("square"), cfg, 2);
  try {
    (void)stage1(labeled_square(), cfg, impossible, tc.robot, plan);
    FAIL("expected PipelineError");
  } catch (const PipelineError& e) {
    CHECK(e.report().attempts == 3);
    CHECK(e.report().successes == 0);
  }
}

TEST_CASE("summary of an empty dataset is zeroed") {
  Dataset empty;
  empty.metadata.task = "square";
  const auto s = summarize(empty);
  CHECK(s.demonstrations == 0);
  CHECK(s.verified == 0);
  CHECK(s.mean_length == 0.0);
  CHECK(s.length_histogram.empty());
  CHECK(s.grasp_diversity == 0.0);
  const auto j = nlohmann::json::parse(to_json_string(s));
  CHECK(j.at("demonstrations") == 0);
  CHECK_FALSE(to_text(s).empty());
}

TEST_CASE("summary matches a hand count") {
  // Lengths 5, 12 and 18; first closings at x = 0.1, 0.4 and 0.2.
  Dataset d;
  d.metadata.task = "square";
  d.metadata.stage = Stage::Stage2;
  auto demo = [](std::size_t n, std::size_t close_at, double x) {
    Demonstration m;
    for (std::size_t i = 0; i < n; ++i) m.poses.push_back(lp(i == close_at ? x : 0.0, i >= close_at ? 1.0 : 0.0));
    return m;
  };
  d.demonstrations = {demo(5, 2, 0.1), demo(12, 0, 0.4), demo(18, 10, 0.2)};
  const auto s = summarize(d);
  CHECK(s.demonstrations == 3);
  CHECK(s.stage == "stage2");
  CHECK(s.mean_length == doctest::Approx(35.0 / 3.0));
  CHECK(s.length_histogram == std::map<std::size_t, std::size_t>{{0, 1}, {10, 2}});
  CHECK(s.grasp_diversity == doctest::Approx((0.3 + 0.1 + 0.2) / 3.0));

  const auto j = nlohmann::json::parse(to_json_string(s));
  CHECK(j.at("length_histogram").at("10") == 2);
  CHECK(j.at("grasp_diversity").get<double>() == doctest::Approx(0.2));
}

TEST_CASE("report json") {
  GenerationReport r;
  r.stages.push_back({"stage1", 10, 7, {1, 1, 1}, 0.5, 3});
  const auto j = nlohmann::json::parse(to_json_string(r));
  REQUIRE(j.at("stages").size() == 1);
  CHECK(j.at("stages")[0].at("attempts") == 10);
  CHECK(j.at("stages")[0].at("successes") == 7);
}

}  // TEST_SUITE
