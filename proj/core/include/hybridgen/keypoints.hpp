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

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hybridgen/constraints.hpp"
#include "hybridgen/rng.hpp"
#include "hybridgen/sdf.hpp"

namespace hybridgen {

/// Patch-grid relevance map with an optional 3D point per cell (row-major).
struct ResponseMap {
  int height = 0;
  int width = 0;
  std::vector<double> values;              // in [0, 1]
  std::vector<std::optional<Vec3>> points;  // world frame, nullopt without depth
  std::string text_prompt;                  // meta
  std::string image_id;                     // meta

  double at(int row, int col) const { return values[static_cast<std::size_t>(row * width + col)]; }
  bool operator==(const ResponseMap&) const = default;
};

struct ExtractionConfig {
  int num_clusters = 5;
  double top_fraction = 0.2;
  double merge_bandwidth = 0.04;  // m
  Aabb workspace{Vec3::Constant(-1e9), Vec3::Constant(1e9)};
  int kmeans_restarts = 20;
};

/// Shape and range checks. Throws ValidationError.
void validate(const ResponseMap& map);
void validate(const ExtractionConfig& cfg);

/// Keeps the top cells, clusters them (response-weighted k-means++ on cell
/// coordinates), snaps each center to its best cell, lifts to 3D, filters by
/// workspace and merges points closer than the bandwidth. Ids start at 1.
std::vector<Keypoint> extract(const ResponseMap& map, const ExtractionConfig& cfg, Rng& rng);

/// Cell (row, col) each returned keypoint came from, in the same order.
struct ExtractionDetail {
  std::vector<Keypoint> keypoints;
  std::vector<std::pair<int, int>> cells;
  double threshold = 0.0;  // response of the weakest kept cell
};
ExtractionDetail extract_detailed(const ResponseMap& map, const ExtractionConfig& cfg, Rng& rng);

std::string to_json_string(const ResponseMap& map);
/// ParseError on malformed files, shape mismatches or values outside [0, 1].
ResponseMap response_map_from_json(std::string_view text);
ResponseMap load_response_map(const std::filesystem::path& path);
void save(const ResponseMap& map, const std::filesystem::path& path);

}  // namespace hybridgen
