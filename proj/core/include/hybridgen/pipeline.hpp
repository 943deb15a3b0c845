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

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include "hybridgen/constraints.hpp"
#include "hybridgen/demos.hpp"
#include "hybridgen/gateway.hpp"
#include "hybridgen/planner.hpp"
#include "hybridgen/simenv.hpp"

namespace hybridgen {

struct PipelineConfig {
  std::string task = "square";
  Variant variant = Variant::D1;
  std::uint64_t seed = 0;
  std::size_t stage1_target = 50;
  std::size_t stage2_target = 1000;
  std::optional<std::size_t> attempt_limit;  // default: 10x the stage target
  std::size_t k = 3;
  bool use_vlm = true;  // false: interpolation only (no semantic cost, no iterations)
  bool use_grt = true;  // false: uniform choice among all candidates
  int workers = 1;
  PlanWeights weights;
  PlanOptions plan_options;
  DistanceWeights distance;
  Transport transport = RecordedTransport{"data/recordings"};
  std::filesystem::path tasks_file = "config/tasks.json";
  int upsample = 10;
  double stitch_gap = 0.05;         // m
  double bridge_step = 0.02;        // m between bridge poses
  double bridge_rot_step = 0.1;     // rad between bridge poses
  int batch = 16;                   // attempts scheduled per round
};

/// Reads a JSON config; keys mirror PipelineConfig field names. Missing keys keep
/// defaults; a relative tasks_file resolves against the config's directory.
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

struct FailureCounts {
  std::size_t planner_infeasible = 0;
  std::size_t execution_collision = 0;
  std::size_t predicate_failed = 0;
};

struct StageReport {
  std::string stage;
  std::size_t attempts = 0;
  std::size_t successes = 0;
  FailureCounts failures;
  double wall_seconds = 0.0;
  std::uint64_t seed = 0;
};

struct GenerationReport {
  std::vector<StageReport> stages;
};

std::string to_json_string(const GenerationReport& report);

class PipelineError : public std::runtime_error {
 public:
  PipelineError(const std::string& what, StageReport report)
      : std::runtime_error(what), report_(std::move(report)) {}
  const StageReport& report() const { return report_; }

 private:
  StageReport report_;
};

/// Constraint plan for the task, fetched through the configured transport.
/// Throws ValidationError when the response violates the plan rules.
ConstraintPlan fetch_constraint_plan(const TaskSpec& task, const PipelineConfig& cfg, int num_keypoints);

/// Labels every demonstration from its recorded video-analysis response.
Dataset label_dataset(const Dataset& src, const PipelineConfig& cfg);

/// One attempt's outcome, exposed for tests and the ablation.
enum class AttemptOutcome { Success, PlannerInfeasible, ExecutionCollision, PredicateFailed };

/// First augmentation: adapt data-dependent poses, replan the rest, keep successes.
std::pair<Dataset, StageReport> stage1(const Dataset& src, const PipelineConfig& cfg);
/// As above with an already-resolved task, robot and constraint plan.
std::pair<Dataset, StageReport> stage1(const Dataset& src, const PipelineConfig& cfg, const TaskSpec& task,
                                       const RobotSpec& robot, const ConstraintPlan& plan);

/// Second augmentation: whole-segment adaptation with free per-subtask selection.
std::pair<Dataset, StageReport> stage2(const Dataset& stage1_out, const PipelineConfig& cfg);
std::pair<Dataset, StageReport> stage2(const Dataset& stage1_out, const PipelineConfig& cfg, const TaskSpec& task,
                                       const RobotSpec& robot);

/// Dataset statistics: counts, length histogram and a diversity proxy (mean
/// pairwise pose_distance of the poses where the gripper first closes).
struct DatasetSummary {
  std::string task;
  std::string variant;
  std::string stage;
  std::size_t demonstrations = 0;
  std::size_t verified = 0;  // pass check_success on re-execution (when a task is given)
  double mean_length = 0.0;
  std::map<std::size_t, std::size_t> length_histogram;  // bucket start (10-pose buckets) -> count
  double grasp_diversity = 0.0;
};

DatasetSummary summarize(const Dataset& dataset, const TaskSpec* task = nullptr);
std::string to_json_string(const DatasetSummary& summary);
std::string to_text(const DatasetSummary& summary);

/// Re-executes every demonstration; returns indices that fail check_success.
std::vector<std::size_t> verify(const Dataset& dataset, const TaskSpec& task);

}  // namespace hybridgen
