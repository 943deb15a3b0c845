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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hybridgen/geometry.hpp"
#include "hybridgen/scene.hpp"

namespace hybridgen {

/// D: data-dependent pose copied (after adaptation) from a demonstration.
/// R: replanning pose regenerated by the planner.
enum class PoseLabel { D, R };

inline constexpr double kGripperClosed = 0.5;

struct LabeledPose {
  Pose pose;             // T_W^E
  double gripper = 0.0;  // 0 open, 1 closed
  PoseLabel label = PoseLabel::R;

  bool closed() const { return gripper >= kGripperClosed; }
  bool operator==(const LabeledPose&) const = default;
};

/// Half-open pose index range [start, end) handling one object-centric subtask.
struct SubtaskSegment {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string target_object;
  std::optional<std::string> grasp_object;

  std::size_t size() const { return end - start; }
  bool operator==(const SubtaskSegment&) const = default;
};

struct Demonstration {
  std::vector<LabeledPose> poses;
  std::vector<SubtaskSegment> segments;
  SceneDescription scene;
  std::string source_id;
  std::map<std::string, Pose> grasp_offsets;  // T_G^E per grasped object, captured at grasp

  bool operator==(const Demonstration&) const = default;
};

enum class Stage { Source, Stage1, Stage2 };

std::string_view to_string(Stage s);
Stage stage_from_string(std::string_view s);

struct DatasetMetadata {
  std::string task;
  Variant variant = Variant::D0;
  Stage stage = Stage::Source;
  std::uint64_t seed = 0;
  double fps = 20.0;  // video frame rate of the source recordings

  bool operator==(const DatasetMetadata&) const = default;
};

struct Dataset {
  DatasetMetadata metadata;
  std::vector<Demonstration> demonstrations;

  bool operator==(const Dataset&) const = default;
};

inline constexpr int kDatasetFormatVersion = 1;

struct TimeInterval {
  double start = 0.0;  // seconds
  double end = 0.0;
  bool operator==(const TimeInterval&) const = default;
};

/// Half-open pose index range labeled D for one interval:
/// v = floor(t * fps * upsample + 0.5), index = floor(v / upsample).
std::pair<std::size_t, std::size_t> interval_to_indices(const TimeInterval& interval, double fps,
                                                        int upsample);

/// Labels poses inside any interval D and all others R. Intervals must be sorted
/// and non-overlapping (ValidationError) and end within the demo (RangeError).
Demonstration label_from_intervals(Demonstration demo, std::span<const TimeInterval> intervals,
                                   double fps, int upsample = 10);

struct SegmentBoundary {
  std::size_t end_index = 0;
  std::string target_object;
  std::optional<std::string> grasp_object;
};

/// Replaces the segment list; boundaries must be strictly increasing and end at N.
Demonstration attach_segments(Demonstration demo, std::span<const SegmentBoundary> boundaries);

/// Segment cover, gripper range and grasp-offset invariants. Throws ValidationError.
void validate(const Demonstration& demo);
void validate(const Dataset& dataset);

/// Index of the segment containing pose `index`.
std::size_t segment_of(const Demonstration& demo, std::size_t index);

std::string to_json_string(const Dataset& dataset);
Dataset dataset_from_json(std::string_view text);

void save(const Dataset& dataset, const std::filesystem::path& path);
/// ParseError (with line/column) on malformed input, VersionError on format mismatch.
Dataset load_dataset(const std::filesystem::path& path);

/// Reads a whole file; ParseError when it cannot be opened.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace hybridgen
