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
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "hybridgen/constraints.hpp"
#include "hybridgen/demos.hpp"

namespace hybridgen {

enum class RequestKind { VideoAnalysis, ConstraintProposal };

std::string_view to_string(RequestKind k);

struct VlmRequest {
  RequestKind kind = RequestKind::VideoAnalysis;
  std::string prompt;
  std::vector<std::string> attachments;  // references such as "video:demo_000" or "image:square_scene"
};

struct VlmResponse {
  std::string raw_text;
  std::variant<std::monostate, std::vector<TimeInterval>, ConstraintPlan> parsed;
  bool valid = false;
  std::vector<std::string> violations;
};

/// Template text as shipped with the library.
std::string_view prompt_template(RequestKind kind);

/// Template with every "{{task}}" replaced by `task`. The video template has no
/// task field and is returned unchanged.
std::string render_prompt(RequestKind kind, std::string_view task);

/// Contents of the first ``` fenced block (language tag dropped), or the whole
/// text when there is none.
std::string_view fenced_block(std::string_view text);

struct IntervalParse {
  std::vector<TimeInterval> intervals;  // sorted by start
  bool valid = false;
  std::vector<std::string> violations;
};

/// Never throws. A single object is accepted as a one-element list.
IntervalParse parse_intervals(std::string_view text);

/// Fenced JSON block in the response format parse_intervals accepts.
std::string format_intervals(const std::vector<TimeInterval>& intervals);

/// Constraint plan from a response. Never throws; structural rule violations
/// from validate_plan are reported as "<rule> (stage s): message".
VlmResponse parse_constraint_response(std::string_view text, std::optional<int> num_keypoints = std::nullopt);

/// Lowercase hex SHA-256 of the canonical request document
/// {"attachments": [...], "kind": "...", "prompt": "..."}.
std::string request_hash(const VlmRequest& request);
std::string sha256_hex(std::string_view data);

struct RecordedTransport {
  std::filesystem::path dir;  // holds <sha256>.json
};

struct HttpTransport {
  std::string url;                            // http://host:port/path
  std::string token_env = "HYBRIDGEN_VLM_TOKEN";
  double timeout_s = 60.0;
  int max_attempts = 3;
  double backoff_base_s = 1.0;                // doubled after each failed attempt
  int max_in_flight = 2;
};

using Transport = std::variant<RecordedTransport, HttpTransport>;

/// "recorded:<dir>" or "http:<url>". Throws ValidationError otherwise.
Transport parse_transport(std::string_view spec);

class RecordingNotFound : public std::runtime_error {
 public:
  explicit RecordingNotFound(const std::string& hash)
      : std::runtime_error("recording not found for request " + hash), hash_(hash) {}
  const std::string& hash() const { return hash_; }

 private:
  std::string hash_;
};

class VlmTimeout : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class VlmHttpStatus : public std::runtime_error {
 public:
  VlmHttpStatus(int status, const std::string& body)
      : std::runtime_error("VLM endpoint returned HTTP " + std::to_string(status) + ": " + body), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

class VlmTransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raw response text for a request. Recorded mode never touches the network.
std::string fetch_raw(const VlmRequest& request, const Transport& transport);

/// fetch_raw plus parsing for the request kind. Throws ValidationError when a
/// constraint proposal carries no image attachment.
VlmResponse fetch(const VlmRequest& request, const Transport& transport);

/// Writes <dir>/<request_hash>.json and returns its path.
std::filesystem::path record(const VlmRequest& request, std::string_view raw_response,
                             const std::filesystem::path& dir);

}  // namespace hybridgen
