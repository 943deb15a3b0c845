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


#include <charconv>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "hybridgen/errors.hpp"
#include "hybridgen/keypoints.hpp"
#include "hybridgen/pipeline.hpp"
#include "hybridgen/planner.hpp"

namespace fs = std::filesystem;
using namespace hybridgen;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitPipeline = 3;

struct Globals {
  fs::path config;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::string vlm;
};

PipelineConfig make_config(const Globals& g) {
  PipelineConfig c = g.config.empty() ? PipelineConfig{} : load_pipeline_config(g.config);
  if (g.seed) c.seed = *g.seed;
  if (g.workers) c.workers = *g.workers;
  if (!g.vlm.empty()) c.transport = parse_transport(g.vlm);
  return c;
}

void print_report(const StageReport& r) {
  std::printf("%s: %zu/%zu kept (planner-infeasible %zu, collision %zu, predicate %zu) in %.1f s\n",
              r.stage.c_str(), r.successes, r.attempts, r.failures.planner_infeasible,
              r.failures.execution_collision, r.failures.predicate_failed, r.wall_seconds);
}

struct StageArgs {
  fs::path in;
  fs::path out;
  fs::path report;
  std::optional<std::size_t> target;
  std::optional<std::size_t> attempt_limit;
  std::string variant;
  bool no_vlm = false;
  bool no_grt = false;
};

void add_stage_options(CLI::App* cmd, StageArgs& a) {
  cmd->add_option("--in", a.in, "input dataset")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", a.out, "output dataset")->required();
  cmd->add_option("--report", a.report, "write the stage report as JSON");
  cmd->add_option("--target", a.target, "successes to keep");
  cmd->add_option("--attempt-limit", a.attempt_limit, "attempt budget (default 10x target)");
  cmd->add_option("--variant", a.variant, "D0, D1 or D2");
  cmd->add_flag("--no-vlm", a.no_vlm, "interpolate replanning poses without constraints");
  cmd->add_flag("--no-grt", a.no_grt, "uniform segment choice instead of nearest grasp");
}

void apply(const StageArgs& a, PipelineConfig& c, bool stage1) {
  if (a.target) (stage1 ? c.stage1_target : c.stage2_target) = *a.target;
  if (a.attempt_limit) c.attempt_limit = *a.attempt_limit;
  if (!a.variant.empty()) c.variant = variant_from_string(a.variant);
  if (a.no_vlm) c.use_vlm = false;
  if (a.no_grt) c.use_grt = false;
}

int finish_stage(const std::pair<Dataset, StageReport>& r, const StageArgs& a) {
  save(r.first, a.out);
  print_report(r.second);
  if (!a.report.empty()) write_text_file(a.report, to_json_string(GenerationReport{{r.second}}));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-stage demonstration augmentation"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "pipeline config (JSON)")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "RNG seed");
  app.add_option("--workers", g.workers, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--vlm", g.vlm, "recorded:<dir> or http:<url>");

  fs::path label_in, label_out;
  auto* label = app.add_subcommand("label", "apply recorded video intervals to a source dataset");
  label->add_option("--in", label_in, "source dataset")->required()->check(CLI::ExistingFile);
  label->add_option("--out", label_out, "labeled dataset")->required();

  StageArgs s1, s2;
  auto* aug1 = app.add_subcommand("augment1", "stage 1: adapt and replan");
  add_stage_options(aug1, s1);
  auto* aug2 = app.add_subcommand("augment2", "stage 2: whole-segment adaptation");
  add_stage_options(aug2, s2);

  fs::path problem, dump;
  auto* plan = app.add_subcommand("plan", "solve one replanning problem");
  plan->add_option("--problem", problem, "problem JSON")->required()->check(CLI::ExistingFile);
  plan->add_option("--dump", dump, "write the result JSON");

  fs::path validate_in, trace_out;
  std::optional<std::size_t> trace_index;
  auto* val = app.add_subcommand("validate", "re-execute every demonstration of a dataset");
  val->add_option("--in", validate_in, "dataset")->required()->check(CLI::ExistingFile);
  val->add_option("--dump-trace", trace_index, "dump the execution trace of this demonstration");
  val->add_option("--trace-out", trace_out, "trace file (default stdout)");

  fs::path report_in;
  bool report_json = false;
  auto* rep = app.add_subcommand("report", "dataset statistics");
  rep->add_option("--in", report_in, "dataset")->required()->check(CLI::ExistingFile);
  rep->add_flag("--json", report_json, "JSON output");

  fs::path map_in, kp_out;
  std::string kp_task;
  ExtractionConfig ecfg;
  auto* kp = app.add_subcommand("keypoints", "extract keypoints from a response map");
  kp->add_option("--map", map_in, "response map JSON")->required()->check(CLI::ExistingFile);
  kp->add_option("--task", kp_task, "restrict to this task's workspace");
  kp->add_option("--clusters", ecfg.num_clusters, "k-means clusters");
  kp->add_option("--top", ecfg.top_fraction, "fraction of cells kept");
  kp->add_option("--bandwidth", ecfg.merge_bandwidth, "merge bandwidth (m)");
  kp->add_option("--out", kp_out, "write keypoints JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Usage errors count as validation errors; --help exits 0.
    return app.exit(e) == 0 ? 0 : kExitValidation;
  }

  try {
    PipelineConfig cfg = make_config(g);
    if (*label) {
      const Dataset out = label_dataset(load_dataset(label_in), cfg);
      validate(out);
      save(out, label_out);
      std::printf("labeled %zu demonstrations\n", out.demonstrations.size());
    } else if (*aug1) {
      apply(s1, cfg, true);
      return finish_stage(stage1(load_dataset(s1.in), cfg), s1);
    } else if (*aug2) {
      apply(s2, cfg, false);
      return finish_stage(stage2(load_dataset(s2.in), cfg), s2);
    } else if (*plan) {
      const PlanProblem p = plan_problem_from_json(read_text_file(problem));
      const auto t0 = std::chrono::steady_clock::now();
      const PlanResult r = replan(p);
      const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      std::printf("feasible %s  cost %.6g (semantic %.3g collision %.3g smooth %.3g ik %.3g)\n",
                  r.feasible ? "yes" : "no", r.cost.total, r.cost.semantic, r.cost.collision, r.cost.smoothness,
                  r.cost.ik);
      std::printf("iterations %d  runs %d  clearance %.4f m  violation %.3g  %.2f s\n", r.iterations, r.runs,
                  r.min_clearance, r.max_violation, dt);
      if (!dump.empty()) write_text_file(dump, to_json_string(r));
      return r.feasible ? 0 : kExitPipeline;
    } else if (*val) {
      const Dataset ds = load_dataset(validate_in);
      const TaskSpec task = load_task_config(cfg.tasks_file).task(ds.metadata.task);
      if (trace_index) {
        if (*trace_index >= ds.demonstrations.size()) throw RangeError("--dump-trace index out of range");
        const auto& d = ds.demonstrations[*trace_index];
        const std::string trace = to_json_string(run(d.poses, d.scene, task));
        if (trace_out.empty()) std::cout << trace;
        else write_text_file(trace_out, trace);
      }
      const auto bad = verify(ds, task);
      std::printf("%zu/%zu demonstrations pass\n", ds.demonstrations.size() - bad.size(), ds.demonstrations.size());
      for (auto i : bad) std::printf("  failed: %zu (%s)\n", i, ds.demonstrations[i].source_id.c_str());
      return bad.empty() ? 0 : kExitValidation;
    } else if (*rep) {
      const Dataset ds = load_dataset(report_in);
      const TaskConfig tc = load_task_config(cfg.tasks_file);
      const DatasetSummary s = summarize(ds, &tc.task(ds.metadata.task));
      std::cout << (report_json ? to_json_string(s) : to_text(s));
    } else if (*kp) {
      const ResponseMap m = load_response_map(map_in);
      if (!kp_task.empty()) ecfg.workspace = load_task_config(cfg.tasks_file).task(kp_task).workspace;
      Rng rng(cfg.seed);
      const auto kps = extract(m, ecfg, rng);
      // Shortest round-trip form of each coordinate.
      auto num = [](double v) {
        char buf[32];
        const auto r = std::to_chars(buf, buf + sizeof buf, v);
        return std::string(buf, r.ptr);
      };
      std::string text = "[\n";
      for (std::size_t i = 0; i < kps.size(); ++i) {
        const auto& p = kps[i].position;
        text += "  {\"id\": " + std::to_string(kps[i].id) + ", \"position\": [" + num(p.x()) + ", " + num(p.y()) +
                ", " + num(p.z()) + "]}" + (i + 1 < kps.size() ? ",\n" : "\n");
      }
      text += "]\n";
      if (kp_out.empty()) std::cout << text;
      else write_text_file(kp_out, text);
    }
  } catch (const PipelineError& e) {
    std::cerr << "error: " << e.what() << "\n";
    print_report(e.report());
    return kExitPipeline;
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const VersionError& e) {
    std::cerr << "version error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const RangeError& e) {
    std::cerr << "range error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitPipeline;
  }
  return 0;
}
