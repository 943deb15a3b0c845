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

#include "hybridgen/keypoints.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "codec.hpp"
#include "hybridgen/errors.hpp"

namespace hybridgen {

using nlohmann::json;

void validate(const ResponseMap& map) {
  if (map.height < 1 || map.width < 1) throw ValidationError("response map dimensions must be >= 1");
  const auto cells = static_cast<std::size_t>(map.height) * static_cast<std::size_t>(map.width);
  if (map.values.size() != cells) throw ValidationError("response map values do not match h * w");
  if (map.points.size() != cells) throw ValidationError("response map points do not match h * w");
  for (double v : map.values) {
    if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("response map value outside [0, 1]");
  }
}

void validate(const ExtractionConfig& cfg) {
  if (cfg.num_clusters < 1) throw ValidationError("num_clusters must be >= 1");
  if (!(cfg.top_fraction > 0.0 && cfg.top_fraction <= 1.0)) throw ValidationError("top_fraction must be in (0, 1]");
  if (!(cfg.merge_bandwidth > 0.0)) throw ValidationError("merge_bandwidth must be > 0");
  if (cfg.kmeans_restarts < 1) throw ValidationError("kmeans_restarts must be >= 1");
}

namespace {

struct Cell {
  int row, col;
  double w;
};

struct Clustering {
  std::vector<Eigen::Vector2d> centers;
  std::vector<int> assign;
  double inertia = std::numeric_limits<double>::infinity();
};

Eigen::Vector2d coord(const Cell& c) { return {static_cast<double>(c.row), static_cast<double>(c.col)}; }

// Weighted Lloyd iterations from a k-means++ seeding.
Clustering kmeans_once(const std::vector<Cell>& cells, int k, Rng& rng) {
  const std::size_t n = cells.size();
  Clustering c;
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  // First center: draw proportional to weight.
  auto draw = [&](const std::vector<double>& mass) {
    const double total = std::accumulate(mass.begin(), mass.end(), 0.0);
    if (!(total > 0.0)) return static_cast<std::size_t>(rng.index(n));
    double u = rng.uniform() * total;
    for (std::size_t i = 0; i < n; ++i) {
      u -= mass[i];
      if (u < 0.0) return i;
    }
    return n - 1;
  };
  std::vector<double> mass(n);
  for (std::size_t i = 0; i < n; ++i) mass[i] = cells[i].w;
  c.centers.push_back(coord(cells[draw(mass)]));
  while (static_cast<int>(c.centers.size()) < k) {
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], (coord(cells[i]) - c.centers.back()).squaredNorm());
      mass[i] = cells[i].w * d2[i];
    }
    c.centers.push_back(coord(cells[draw(mass)]));
  }
  c.assign.assign(n, 0);
  for (int iter = 0; iter < 100; ++iter) {
    bool changed = iter == 0;
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double bd = std::numeric_limits<double>::infinity();
      for (int j = 0; j < k; ++j) {
        const double d = (coord(cells[i]) - c.centers[static_cast<std::size_t>(j)]).squaredNorm();
        if (d < bd) {
          bd = d;
          best = j;
        }
      }
      if (best != c.assign[i]) changed = true;
      c.assign[i] = best;
    }
    std::vector<Eigen::Vector2d> sum(static_cast<std::size_t>(k), Eigen::Vector2d::Zero());
    std::vector<double> wsum(static_cast<std::size_t>(k), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      sum[static_cast<std::size_t>(c.assign[i])] += cells[i].w * coord(cells[i]);
      wsum[static_cast<std::size_t>(c.assign[i])] += cells[i].w;
    }
    for (std::size_t j = 0; j < static_cast<std::size_t>(k); ++j) {
      if (wsum[j] > 0.0) c.centers[j] = sum[j] / wsum[j];
    }
    if (!changed) break;
  }
  c.inertia = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    c.inertia += cells[i].w * (coord(cells[i]) - c.centers[static_cast<std::size_t>(c.assign[i])]).squaredNorm();
  return c;
}

// Flat-kernel mean shift; modes closer than the bandwidth collapse, then a
// greedy pass keeps representatives pairwise >= bandwidth apart.
std::vector<std::size_t> mean_shift_merge(const std::vector<Vec3>& pts, const std::vector<double>& score,
                                          double bandwidth) {
  const std::size_t n = pts.size();
  std::vector<Vec3> modes = pts;
  for (std::size_t i = 0; i < n; ++i) {
    for (int it = 0; it < 100; ++it) {
      Vec3 sum = Vec3::Zero();
      int cnt = 0;
      for (const auto& p : pts) {
        if ((p - modes[i]).norm() <= bandwidth) {
          sum += p;
          ++cnt;
        }
      }
      const Vec3 next = sum / cnt;
      const bool done = (next - modes[i]).norm() < 1e-9;
      modes[i] = next;
      if (done) break;
    }
  }
  // Rank candidates by score, keep one representative per mode group.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
  std::vector<std::size_t> keep;
  for (std::size_t i : order) {
    bool merged = false;
    for (std::size_t k : keep) {
      if ((modes[i] - modes[k]).norm() < bandwidth || (pts[i] - pts[k]).norm() < bandwidth) {
        merged = true;
        break;
      }
    }
    if (!merged) keep.push_back(i);
  }
  return keep;
}

}  // namespace

ExtractionDetail extract_detailed(const ResponseMap& map, const ExtractionConfig& cfg, Rng& rng) {
  validate(map);
  validate(cfg);
  ExtractionDetail out;
  const std::size_t n = map.values.size();
  std::vector<double> sorted = map.values;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  const auto keep = static_cast<std::size_t>(std::ceil(cfg.top_fraction * static_cast<double>(n)));
  out.threshold = sorted[std::min(keep, n) - 1];
  std::vector<Cell> cells;
  for (int r = 0; r < map.height; ++r) {
    for (int c = 0; c < map.width; ++c) {
      const double v = map.at(r, c);
      if (v >= out.threshold && v > 0.0) cells.push_back({r, c, v});
    }
  }
  if (cells.empty()) return out;
  const int k = std::min<int>(cfg.num_clusters, static_cast<int>(cells.size()));
  Clustering best;
  for (int rep = 0; rep < cfg.kmeans_restarts; ++rep) {
    Clustering c = kmeans_once(cells, k, rng);
    if (c.inertia < best.inertia) best = std::move(c);
  }
  // Snap: strongest cell per cluster (first in row-major order on ties).
  std::vector<Vec3> pts;
  std::vector<double> score;
  std::vector<std::pair<int, int>> where;
  for (int j = 0; j < k; ++j) {
    std::optional<std::size_t> arg;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (best.assign[i] != j) continue;
      if (!arg || cells[i].w > cells[*arg].w) arg = i;
    }
    if (!arg) continue;
    const auto& cell = cells[*arg];
    const auto& p = map.points[static_cast<std::size_t>(cell.row * map.width + cell.col)];
    if (!p || !cfg.workspace.contains(*p)) continue;
    pts.push_back(*p);
    score.push_back(cell.w);
    where.emplace_back(cell.row, cell.col);
  }
  const auto reps = mean_shift_merge(pts, score, cfg.merge_bandwidth);
  // Stable output order: row-major by source cell.
  std::vector<std::size_t> order(reps.begin(), reps.end());
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return where[a] < where[b]; });
  int id = 1;
  for (std::size_t i : order) {
    out.keypoints.push_back({id++, pts[i]});
    out.cells.push_back(where[i]);
  }
  return out;
}

std::vector<Keypoint> extract(const ResponseMap& map, const ExtractionConfig& cfg, Rng& rng) {
  return extract_detailed(map, cfg, rng).keypoints;
}

std::string to_json_string(const ResponseMap& map) {
  json pts = json::array();
  for (const auto& p : map.points) pts.push_back(p ? codec::vec(*p) : json(nullptr));
  json j = {{"h", map.height},
            {"w", map.width},
            {"values", map.values},
            {"points", pts},
            {"meta", {{"text_prompt", map.text_prompt}, {"image_id", map.image_id}}}};
  return j.dump() + "\n";
}

ResponseMap response_map_from_json(std::string_view text) {
  const json j = codec::parse_document(text);
  ResponseMap m = codec::decode("response map", [&] {
    ResponseMap r;
    r.height = j.at("h").get<int>();
    r.width = j.at("w").get<int>();
    r.values = j.at("values").get<std::vector<double>>();
    for (const auto& p : j.at("points")) {
      r.points.push_back(p.is_null() ? std::nullopt : std::optional<Vec3>(codec::vec(p)));
    }
    const json meta = j.value("meta", json::object());
    r.text_prompt = meta.value("text_prompt", "");
    r.image_id = meta.value("image_id", "");
    return r;
  });
  try {
    validate(m);
  } catch (const ValidationError& e) {
    throw ParseError(std::string("invalid response map: ") + e.what());
  }
  return m;
}

ResponseMap load_response_map(const std::filesystem::path& path) {
  return response_map_from_json(read_text_file(path));
}

void save(const ResponseMap& map, const std::filesystem::path& path) { write_text_file(path, to_json_string(map)); }

}  // namespace hybridgen
