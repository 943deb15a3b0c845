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

#include "hybridgen/simenv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "codec.hpp"
#include "hybridgen/errors.hpp"

namespace hybridgen {

using nlohmann::json;

const VariantSpec& TaskSpec::variant(Variant v) const {
  const auto it = variants.find(v);
  if (it == variants.end())
    throw ValidationError("task '" + name + "' has no variant " + std::string(to_string(v)));
  return it->second;
}

const TaskSpec& TaskConfig::task(std::string_view name) const {
  for (const auto& t : tasks) {
    if (t.name == name) return t;
  }
  throw ValidationError("unknown task '" + std::string(name) + "'");
}

namespace {

ObjectPlacement placement_from_json(const json& j) {
  ObjectPlacement p;
  p.center = codec::vec(j.at("center"));
  p.half_extent = codec::vec(j.value("half_extent", json::array({0.0, 0.0, 0.0})));
  const auto yaw = j.value("yaw", json::array({0.0, 0.0}));
  p.yaw_lo = yaw.at(0).get<double>();
  p.yaw_hi = yaw.at(1).get<double>();
  p.fixed = j.value("fixed", false);
  return p;
}

SuccessSpec success_from_json(const json& j) {
  SuccessSpec s;
  s.kind = j.at("kind").get<std::string>();
  s.object = j.at("object").get<std::string>();
  s.target = j.at("target").get<std::string>();
  s.radius = j.value("radius", s.radius);
  s.max_height = j.value("max_height", s.max_height);
  if (j.contains("tip")) s.tip = codec::vec(j.at("tip"));
  if (j.contains("object_axis")) s.object_axis = codec::vec(j.at("object_axis"));
  if (j.contains("hole")) s.hole = codec::vec(j.at("hole"));
  if (j.contains("hole_axis")) s.hole_axis = codec::vec(j.at("hole_axis"));
  s.max_angle = j.value("max_angle", s.max_angle);
  return s;
}

TaskSpec task_from_json(const json& j) {
  TaskSpec t;
  t.name = j.at("name").get<std::string>();
  t.description = j.value("description", t.name);
  t.workspace = j.at("workspace").get<Aabb>();
  for (const auto& o : j.at("objects")) {
    SceneObject obj = o.get<SceneObject>();
    t.objects.push_back(std::move(obj));
  }
  for (const auto& s : j.at("subtasks")) {
    SubtaskSpec st;
    st.target_object = s.at("target_object").get<std::string>();
    if (s.contains("grasp_object") && !s.at("grasp_object").is_null())
      st.grasp_object = s.at("grasp_object").get<std::string>();
    t.subtasks.push_back(st);
  }
  t.success = success_from_json(j.at("success"));
  for (const auto& [name, v] : j.at("variants").items()) {
    VariantSpec spec;
    for (const auto& [id, p] : v.items()) spec.placements[id] = placement_from_json(p);
    t.variants[variant_from_string(name)] = std::move(spec);
  }
  return t;
}

}  // namespace

TaskConfig task_config_from_json(std::string_view text) {
  const json j = codec::parse_document(text);
  TaskConfig cfg = codec::decode("task config", [&] {
    TaskConfig c;
    const auto& robot = j.at("robot");
    c.robot.chain = robot.at("chain").get<KinematicChain>();
    c.robot.home = codec::joints(robot.at("home"));
    for (const auto& t : j.at("tasks")) c.tasks.push_back(task_from_json(t));
    return c;
  });
  validate(cfg);
  return cfg;
}

TaskConfig load_task_config(const std::filesystem::path& path) { return task_config_from_json(read_text_file(path)); }

void validate(const TaskConfig& config) {
  validate(config.robot.chain);
  if (config.robot.home.size() != config.robot.chain.dof())
    throw ValidationError("robot home configuration does not match the chain");
  for (const auto& t : config.tasks) {
    auto has = [&](const std::string& id) {
      return std::any_of(t.objects.begin(), t.objects.end(), [&](const SceneObject& o) { return o.id == id; });
    };
    for (const auto& o : t.objects) validate(o.shape);
    for (const auto& s : t.subtasks) {
      if (!has(s.target_object) || (s.grasp_object && !has(*s.grasp_object)))
        throw ValidationError("task '" + t.name + "' subtask references an unknown object");
    }
    if (!has(t.success.object) || !has(t.success.target))
      throw ValidationError("task '" + t.name + "' success predicate references an unknown object");
    for (const auto& [v, spec] : t.variants) {
      for (const auto& o : t.objects) {
        const auto it = spec.placements.find(o.id);
        if (it == spec.placements.end())
          throw ValidationError("task '" + t.name + "' variant " + std::string(to_string(v)) +
                                " has no placement for '" + o.id + "'");
        const auto& p = it->second;
        if (!t.workspace.contains(Aabb{p.center - p.half_extent, p.center + p.half_extent}))
          throw ValidationError("placement region of '" + o.id + "' leaves the workspace");
        if (p.yaw_lo > p.yaw_hi) throw ValidationError("placement yaw range of '" + o.id + "' is inverted");
      }
    }
  }
}

SceneDescription sample_scene(const TaskSpec& task, Variant variant, Rng& rng) {
  return sample_scene(task, task.variant(variant), variant, rng);
}

SceneDescription sample_scene(const TaskSpec& task, const VariantSpec& spec, Variant variant, Rng& rng) {
  constexpr int kMaxAttempts = 100;
  SceneDescription scene;
  scene.workspace = task.workspace;
  scene.variant = variant;
  scene.objects = task.objects;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    for (auto& obj : scene.objects) {
      const auto it = spec.placements.find(obj.id);
      if (it == spec.placements.end()) throw ValidationError("no placement for object '" + obj.id + "'");
      const auto& p = it->second;
      Vec3 pos = p.center;
      double yaw = 0.5 * (p.yaw_lo + p.yaw_hi);
      if (!p.fixed) {
        for (int a = 0; a < 3; ++a) pos[a] += rng.uniform(-p.half_extent[a], p.half_extent[a]);
        yaw = rng.uniform(p.yaw_lo, p.yaw_hi);
      }
      obj.pose = Pose(yaw_rotation(yaw), pos);
    }
    bool overlap = false;
    for (std::size_t a = 0; a < scene.objects.size() && !overlap; ++a) {
      const auto& A = scene.objects[a];
      const auto shape_a = transformed(A.shape, A.pose);
      for (std::size_t b = 0; b < scene.objects.size(); ++b) {
        if (a == b) continue;
        const auto& B = scene.objects[b];
        if (sdf(shape_a, B.pose.translation()) < B.footprint) {
          overlap = true;
          break;
        }
      }
    }
    if (!overlap) return scene;
  }
  throw SamplingError("task '" + task.name + "': no overlap-free scene after 100 attempts");
}

SceneDescription ExecutionTrace::final_scene(const SceneDescription& initial) const {
  SceneDescription s = initial;
  if (steps.empty()) return s;
  for (std::size_t i = 0; i < object_ids.size(); ++i) s.object(object_ids[i]).pose = steps.back().object_poses[i];
  return s;
}

ExecutionTrace execute(std::span<const LabeledPose> traj, const SceneDescription& scene,
                       const ExecuteOptions& options) {
  ExecutionTrace trace;
  const std::size_t n_obj = scene.objects.size();
  std::vector<Pose> poses;
  for (const auto& o : scene.objects) {
    trace.object_ids.push_back(o.id);
    poses.push_back(o.pose);
  }
  struct Obstacle {
    std::string id;
    SdfPrimitive shape;
  };
  std::vector<Obstacle> obstacles;
  for (const auto& o : scene.objects) {
    if (o.obstacle) obstacles.push_back({o.id, transformed(o.shape, o.pose)});
  }

  bool closed = false;
  std::optional<std::size_t> held;
  Pose held_offset;  // T_G^E
  for (std::size_t step = 0; step < traj.size(); ++step) {
    const Pose& ee = traj[step].pose;
    const bool now_closed = traj[step].gripper >= kGripperClosed;
    if (now_closed && !closed && !held) {
      std::optional<std::size_t> best;
      double best_d = options.grasp_epsilon;
      for (std::size_t i = 0; i < n_obj; ++i) {
        if (!scene.objects[i].graspable) continue;
        const double d = (poses[i].transform_point(scene.objects[i].grasp_point) - ee.translation()).norm();
        if (d <= best_d) {
          best_d = d;
          best = i;
        }
      }
      if (best) {
        held = best;
        held_offset = inverse(poses[*best]) * ee;
        const auto& id = scene.objects[*best].id;
        trace.events.push_back({EventType::Attach, step, id});
        if (!trace.grasp_offsets.contains(id)) trace.grasp_offsets[id] = held_offset;
        if (std::find(trace.grasped.begin(), trace.grasped.end(), id) == trace.grasped.end())
          trace.grasped.push_back(id);
      }
    } else if (!now_closed && closed && held) {
      trace.events.push_back({EventType::Detach, step, scene.objects[*held].id});
      held.reset();
    }
    closed = now_closed;
    if (held) poses[*held] = ee * inverse(held_offset);

    for (const auto& ob : obstacles) {
      bool hit = sdf(ob.shape, ee.translation()) < 0.0;
      if (held) hit = hit || sdf(ob.shape, poses[*held].translation()) < 0.0;
      if (hit) {
        trace.events.push_back({EventType::Collision, step, ob.id});
        trace.collision = true;
      }
    }
    ExecutionStep s{ee, traj[step].gripper, std::nullopt, poses};
    if (held) s.attached = scene.objects[*held].id;
    trace.steps.push_back(std::move(s));
  }
  return trace;
}

bool check_success(const ExecutionTrace& trace, const TaskSpec& task) {
  const auto& spec = task.success;
  if (spec.kind != "insertion" && spec.kind != "threading")
    throw ValidationError("unknown success predicate '" + spec.kind + "' for task '" + task.name + "'");
  if (trace.steps.empty()) return false;
  if (std::find(trace.grasped.begin(), trace.grasped.end(), spec.object) == trace.grasped.end()) return false;
  auto index = [&](const std::string& id) -> std::size_t {
    const auto it = std::find(trace.object_ids.begin(), trace.object_ids.end(), id);
    if (it == trace.object_ids.end()) throw ValidationError("trace has no object '" + id + "'");
    return static_cast<std::size_t>(it - trace.object_ids.begin());
  };
  const auto& last = trace.steps.back();
  const Pose& obj = last.object_poses[index(spec.object)];
  const Pose& target = last.object_poses[index(spec.target)];
  if (spec.kind == "insertion") {
    if (last.attached) return false;
    const Vec3 axis = target.rotate(Vec3::UnitZ());
    const Vec3 d = obj.translation() - target.translation();
    const double height = d.dot(axis);
    const double radial = (d - height * axis).norm();
    return radial <= spec.radius && height <= spec.max_height;
  }
  const Vec3 tip = obj.transform_point(spec.tip);
  const Vec3 hole = target.transform_point(spec.hole);
  const Vec3 a = obj.rotate(spec.object_axis).normalized();
  const Vec3 b = target.rotate(spec.hole_axis).normalized();
  const double angle = std::acos(std::clamp(std::abs(a.dot(b)), 0.0, 1.0));
  return (tip - hole).norm() <= spec.radius && angle <= spec.max_angle;
}

ExecutionTrace run(std::span<const LabeledPose> traj, const SceneDescription& scene, const TaskSpec& task) {
  ExecutionTrace trace = execute(traj, scene);
  trace.success = !trace.collision && check_success(trace, task);
  return trace;
}

std::string to_json_string(const ExecutionTrace& trace) {
  static constexpr const char* kNames[] = {"attach", "detach", "collision"};
  json steps = json::array();
  for (const auto& s : trace.steps) {
    steps.push_back({{"ee", s.ee},
                     {"gripper", s.gripper},
                     {"attached", s.attached ? json(*s.attached) : json(nullptr)},
                     {"object_poses", s.object_poses}});
  }
  json events = json::array();
  for (const auto& e : trace.events)
    events.push_back({{"type", kNames[static_cast<int>(e.type)]}, {"step", e.step}, {"object", e.object}});
  json offsets = json::object();
  for (const auto& [k, v] : trace.grasp_offsets) offsets[k] = v;
  json j = {{"object_ids", trace.object_ids}, {"steps", steps},         {"events", events},
            {"grasp_offsets", offsets},       {"collision", trace.collision}, {"success", trace.success}};
  return j.dump(1) + "\n";
}

}  // namespace hybridgen
