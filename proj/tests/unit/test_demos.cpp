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


#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include <doctest.h>

#include "hybridgen/demos.hpp"
#include "hybridgen/errors.hpp"
#include "hybridgen/rng.hpp"
#include "support.hpp"

using namespace hybridgen;

namespace {

std::string labels(const Demonstration& d) {
  std::string s;
  for (const auto& p : d.poses) s += p.label == PoseLabel::D ? 'D' : 'R';
  return s;
}

}  // namespace

TEST_SUITE("demos") {

TEST_CASE("interval to pose indices") {
  CHECK(interval_to_indices({2.0, 4.0}, 20.0, 10) == std::pair<std::size_t, std::size_t>{40, 80});
  // Rounding happens on the upsampled grid before integer division.
  CHECK(interval_to_indices({0.1474, 0.26}, 20.0, 10).first == 2);
  CHECK(interval_to_indices({0.1476, 0.26}, 20.0, 10).first == 3);
  CHECK(interval_to_indices({0.1474, 0.26}, 20.0, 10).second == 5);
}

TEST_CASE("label_from_intervals") {
  const Demonstration d = testing::line_demo(100);
  const std::vector<TimeInterval> one{{2.0, 4.0}};
  const Demonstration l = label_from_intervals(d, one, 20.0);
  for (std::size_t i = 0; i < 100; ++i) CHECK((l.poses[i].label == PoseLabel::D) == (i >= 40 && i < 80));

  CHECK(labels(label_from_intervals(d, std::vector<TimeInterval>{}, 20.0)) == std::string(100, 'R'));
  const std::vector<TimeInterval> all{{0.0, 5.0}};
  CHECK(labels(label_from_intervals(d, all, 20.0)) == std::string(100, 'D'));

  const std::vector<TimeInterval> too_long{{1.0, 5.5}};
  CHECK_THROWS_AS(label_from_intervals(d, too_long, 20.0), RangeError);
  const std::vector<TimeInterval> overlap{{1.0, 3.0}, {2.0, 4.0}};
  CHECK_THROWS_AS(label_from_intervals(d, overlap, 20.0), ValidationError);
  const std::vector<TimeInterval> reversed{{3.0, 1.0}};
  CHECK_THROWS_AS(label_from_intervals(d, reversed, 20.0), ValidationError);
}

TEST_CASE("attach_segments") {
  const Demonstration d = testing::line_demo(20);
  const std::vector<SegmentBoundary> single{{20, "ring", std::nullopt}};
  CHECK(attach_segments(d, single).segments.size() == 1);

  const std::vector<SegmentBoundary> two{{10, "ring", std::nullopt}, {20, "peg", std::nullopt}};
  const Demonstration s = attach_segments(d, two);
  REQUIRE(s.segments.size() == 2);
  CHECK(s.segments[0].start == 0);
  CHECK(s.segments[0].end == 10);
  CHECK(s.segments[1].start == 10);
  CHECK(s.segments[1].end == 20);
  CHECK(segment_of(s, 9) == 0);
  CHECK(segment_of(s, 10) == 1);
  CHECK_THROWS_AS(segment_of(s, 20), RangeError);

  const std::vector<SegmentBoundary> dup{{10, "ring", std::nullopt}, {10, "peg", std::nullopt}, {20, "peg", std::nullopt}};
  CHECK_THROWS_AS(attach_segments(d, dup), ValidationError);
  const std::vector<SegmentBoundary> short_cover{{10, "ring", std::nullopt}};
  CHECK_THROWS_AS(attach_segments(d, short_cover), ValidationError);
}

TEST_CASE("validate demonstrations") {
  Demonstration d = testing::line_demo(10);
  CHECK_NOTHROW(validate(d));
  d.segments[0].grasp_object = "ring";
  CHECK_THROWS_AS(validate(d), ValidationError);  // no grasp offset recorded
  d.grasp_offsets["ring"] = Pose::identity();
  CHECK_NOTHROW(validate(d));
  d.poses[3].gripper = 1.5;
  CHECK_THROWS_AS(validate(d), ValidationError);
  Demonstration e = testing::line_demo(10);
  e.segments[0].target_object = "nothing";
  CHECK_THROWS_AS(validate(e), ValidationError);
}

TEST_CASE("dataset round trip") {
  Dataset empty;
  CHECK(dataset_from_json(to_json_string(empty)) == empty);

  const Dataset src = load_dataset(testing::source_dir() / "data/square_source.json");
  REQUIRE(src.demonstrations.size() == 10);
  const std::string text = to_json_string(src);
  const Dataset back = dataset_from_json(text);
  CHECK(back == src);
  CHECK(to_json_string(back) == text);
}

TEST_CASE("dataset parse errors") {
  const std::string text = to_json_string(load_dataset(testing::source_dir() / "data/square_source.json"));
  try {
    dataset_from_json(text.substr(0, text.size() / 2));
    FAIL("truncated input parsed");
  } catch (const ParseError& e) {
    CHECK(e.line() > 1);
    CHECK(e.column() >= 1);
  }
  CHECK_THROWS_AS(dataset_from_json(R"({"format_version": 99, "metadata": {}, "demonstrations": []})"),
                  VersionError);
  CHECK_THROWS_AS(dataset_from_json(R"({"format_version": 1, "metadata": {"task": 3}})"), ParseError);
  CHECK_THROWS_AS(load_dataset("/nonexistent/file.json"), ParseError);
}

TEST_CASE("D count matches per-pose membership") {
  Rng rng(30);
  const double fps = 10.0;
  for (int inst = 0; inst < 200; ++inst) {
    const std::size_t n = 20 + rng.index(80);
    const Demonstration d = testing::line_demo(n);
    const double duration = static_cast<double>(n) / fps;
    std::vector<TimeInterval> iv;
    double t = 0.0;
    while (true) {
      const double start = t + rng.uniform(0.0, 1.0);
      const double end = start + rng.uniform(0.05, 1.5);
      if (end > duration) break;
      iv.push_back({start, end});
      t = end;
    }
    const Demonstration l = label_from_intervals(d, iv, fps);
    std::size_t spans = 0;
    for (const auto& i : iv) {
      const auto [lo, hi] = interval_to_indices(i, fps, 10);
      spans += std::min(hi, n) - std::min(lo, n);
    }
    std::size_t count = 0;
    for (std::size_t p = 0; p < n; ++p) {
      bool inside = false;
      for (const auto& i : iv) {
        // Membership straight from the rounding rule, per pose.
        const double lo = std::floor(std::floor(i.start * fps * 10 + 0.5) / 10);
        const double hi = std::floor(std::floor(i.end * fps * 10 + 0.5) / 10);
        inside = inside || (static_cast<double>(p) >= lo && static_cast<double>(p) < hi);
      }
      CHECK((l.poses[p].label == PoseLabel::D) == inside);
      count += l.poses[p].label == PoseLabel::D;
    }
    CHECK(count == spans);
  }
}

TEST_CASE("random demonstrations round trip exactly") {
  Rng rng(31);
  Dataset ds;
  ds.metadata = {"square", Variant::D2, Stage::Stage1, 99, 12.5};
  for (int i = 0; i < 1000; ++i) {
    Demonstration d = testing::line_demo(2 + rng.index(6), "demo_" + std::to_string(i));
    for (auto& p : d.poses) {
      const Vec3 axis = Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)).normalized();
      p = LabeledPose{Pose(Quat(Eigen::AngleAxisd(rng.uniform(0, 3.14), axis)), Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1),
                                                                            rng.uniform(-1, 1))),
           rng.uniform(), rng.uniform() < 0.5 ? PoseLabel::D : PoseLabel::R};
    }
    d.grasp_offsets["ring"] = Pose(yaw_rotation(rng.uniform(-3, 3)), Vec3(0, 0, rng.uniform()));
    ds.demonstrations.push_back(std::move(d));
  }
  const std::string text = to_json_string(ds);
  const Dataset back = dataset_from_json(text);
  CHECK(back == ds);
  CHECK(to_json_string(back) == text);
}

}  // TEST_SUITE
