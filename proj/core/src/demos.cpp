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

#include "hybridgen/demos.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "codec.hpp"
#include "hybridgen/errors.hpp"

namespace hybridgen {

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::Source: return "source";
    case Stage::Stage1: return "stage1";
    case Stage::Stage2: return "stage2";
  }
  return "source";
}

Stage stage_from_string(std::string_view s) {
  if (s == "source") return Stage::Source;
  if (s == "stage1") return Stage::Stage1;
  if (s == "stage2") return Stage::Stage2;
  throw ValidationError("unknown stage '" + std::string(s) + "'");
}

std::pair<std::size_t, std::size_t> interval_to_indices(const TimeInterval& interval, double fps,
                                                        int upsample) {
  auto to_index = [&](double t) {
    const double v = std::floor(t * fps * upsample + 0.5);
    return static_cast<std::size_t>(std::floor(v / upsample));
  };
  return {to_index(interval.start), to_index(interval.end)};
}

Demonstration label_from_intervals(Demonstration demo, std::span<const TimeInterval> intervals,
                                   double fps, int upsample) {
  if (!(fps > 0.0)) throw ValidationError("fps must be > 0");
  if (upsample < 1) throw ValidationError("upsample must be >= 1");
  const std::size_t n = demo.poses.size();
  const double duration = static_cast<double>(n) / fps;
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    const auto& iv = intervals[i];
    if (!(iv.start >= 0.0) || !(iv.start < iv.end))
      throw ValidationError("interval " + std::to_string(i) + " violates 0 <= start < end");
    if (i > 0 && iv.start < intervals[i - 1].end)
      throw ValidationError("intervals overlap or are unsorted at index " + std::to_string(i));
    if (iv.end > duration)
      throw RangeError("interval " + std::to_string(i) + " ends after the demonstration (" +
                       std::to_string(duration) + " s)");
  }
  for (auto& p : demo.poses) p.label = PoseLabel::R;
  for (const auto& iv : intervals) {
    const auto [lo, hi] = interval_to_indices(iv, fps, upsample);
    for (std::size_t k = lo; k < std::min(hi, n); ++k) demo.poses[k].label = PoseLabel::D;
  }
  return demo;
}

Demonstration attach_segments(Demonstration demo, std::span<const SegmentBoundary> boundaries) {
  if (boundaries.empty()) throw ValidationError("at least one segment boundary is required");
  std::vector<SubtaskSegment> segments;
  std::size_t start = 0;
  for (const auto& b : boundaries) {
    if (b.end_index <= start)
      throw ValidationError("segment boundaries must be strictly increasing (got " +
                            std::to_string(b.end_index) + " after " + std::to_string(start) + ")");
    segments.push_back({start, b.end_index, b.target_object, b.grasp_object});
    start = b.end_index;
  }
  if (start != demo.poses.size())
    throw ValidationError("last segment boundary must equal the number of poses");
  demo.segments = std::move(segments);
  return demo;
}

void validate(const Demonstration& demo) {
  const std::size_t n = demo.poses.size();
  if (n == 0) throw ValidationError("demonstration '" + demo.source_id + "' has no poses");
  if (demo.segments.empty()) throw ValidationError("demonstration '" + demo.source_id + "' has no segments");
  std::size_t expect = 0;
  for (const auto& s : demo.segments) {
    if (s.start != expect || s.end <= s.start)
      throw ValidationError("segments of '" + demo.source_id + "' are not a contiguous ordered cover");
    expect = s.end;
    demo.scene.object(s.target_object);
    if (s.grasp_object) {
      demo.scene.object(*s.grasp_object);
      if (!demo.grasp_offsets.contains(*s.grasp_object))
        throw ValidationError("demonstration '" + demo.source_id + "' lacks a grasp offset for '" +
                              *s.grasp_object + "'");
    }
  }
  if (expect != n) throw ValidationError("segments of '" + demo.source_id + "' do not cover all poses");
  for (const auto& p : demo.poses) {
    if (!(p.gripper >= 0.0 && p.gripper <= 1.0))
      throw ValidationError("gripper value outside [0, 1] in '" + demo.source_id + "'");
    if (!is_finite(p.pose)) throw ValidationError("non-finite pose in '" + demo.source_id + "'");
  }
}

void validate(const Dataset& dataset) {
  for (const auto& d : dataset.demonstrations) validate(d);
}

std::size_t segment_of(const Demonstration& demo, std::size_t index) {
  for (std::size_t i = 0; i < demo.segments.size(); ++i) {
    if (index >= demo.segments[i].start && index < demo.segments[i].end) return i;
  }
  throw RangeError("pose index " + std::to_string(index) + " is not inside any segment");
}

std::string to_json_string(const Dataset& dataset) {
  nlohmann::json j;
  j["format_version"] = kDatasetFormatVersion;
  j["metadata"] = dataset.metadata;
  j["demonstrations"] = dataset.demonstrations;
  return j.dump(1) + "\n";
}

Dataset dataset_from_json(std::string_view text) {
  const nlohmann::json j = codec::parse_document(text);
  return codec::decode("dataset", [&] {
    const int version = j.at("format_version").get<int>();
    if (version != kDatasetFormatVersion)
      throw VersionError("dataset format_version " + std::to_string(version) + " is not supported (expected " +
                         std::to_string(kDatasetFormatVersion) + ")");
    Dataset d;
    d.metadata = j.at("metadata").get<DatasetMetadata>();
    d.demonstrations = j.at("demonstrations").get<std::vector<Demonstration>>();
    return d;
  });
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
}

void save(const Dataset& dataset, const std::filesystem::path& path) {
  write_text_file(path, to_json_string(dataset));
}

Dataset load_dataset(const std::filesystem::path& path) { return dataset_from_json(read_text_file(path)); }

}  // namespace hybridgen
