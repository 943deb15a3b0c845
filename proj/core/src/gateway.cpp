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

#include "hybridgen/gateway.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <mutex>
#include <thread>

#include <httplib.h>

#include "codec.hpp"
#include "hybridgen/errors.hpp"

namespace hybridgen {

namespace detail {
extern const std::string_view k_video_analysis_prompt;
extern const std::string_view k_constraint_proposal_prompt;
}  // namespace detail

using nlohmann::json;

std::string_view to_string(RequestKind k) {
  return k == RequestKind::VideoAnalysis ? "video_analysis" : "constraint_proposal";
}

std::string_view prompt_template(RequestKind kind) {
  return kind == RequestKind::VideoAnalysis ? detail::k_video_analysis_prompt
                                            : detail::k_constraint_proposal_prompt;
}

std::string render_prompt(RequestKind kind, std::string_view task) {
  std::string out(prompt_template(kind));
  constexpr std::string_view kField = "{{task}}";
  for (std::size_t pos = out.find(kField); pos != std::string::npos; pos = out.find(kField, pos + task.size()))
    out.replace(pos, kField.size(), task);
  return out;
}

std::string_view fenced_block(std::string_view text) {
  const std::size_t open = text.find("```");
  if (open == std::string_view::npos) return text;
  std::size_t body = text.find('\n', open);
  if (body == std::string_view::npos) return text.substr(open + 3);
  ++body;
  const std::size_t close = text.find("```", body);
  return text.substr(body, close == std::string_view::npos ? std::string_view::npos : close - body);
}

IntervalParse parse_intervals(std::string_view text) {
  IntervalParse out;
  json doc;
  try {
    doc = json::parse(fenced_block(text));
  } catch (const json::exception& e) {
    out.violations.push_back(std::string("malformed JSON: ") + e.what());
    return out;
  }
  if (doc.is_object()) doc = json::array({doc});
  if (!doc.is_array()) {
    out.violations.push_back("expected a list of {\"start\", \"end\"} objects");
    return out;
  }
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& e = doc[i];
    const std::string where = "interval " + std::to_string(i);
    if (!e.is_object() || !e.contains("start") || !e.contains("end")) {
      out.violations.push_back(where + ": needs \"start\" and \"end\"");
      continue;
    }
    if (!e["start"].is_number() || !e["end"].is_number()) {
      out.violations.push_back(where + ": start and end must be numbers");
      continue;
    }
    const TimeInterval iv{e["start"].get<double>(), e["end"].get<double>()};
    if (!(iv.start >= 0.0)) out.violations.push_back(where + ": start >= 0 violated");
    if (!(iv.start < iv.end)) out.violations.push_back(where + ": start < end violated");
    out.intervals.push_back(iv);
  }
  std::stable_sort(out.intervals.begin(), out.intervals.end(),
                   [](const TimeInterval& a, const TimeInterval& b) { return a.start < b.start; });
  for (std::size_t i = 1; i < out.intervals.size(); ++i) {
    if (out.intervals[i].start < out.intervals[i - 1].end)
      out.violations.push_back("intervals overlap at " + std::to_string(out.intervals[i].start) + " s");
  }
  out.valid = out.violations.empty();
  return out;
}

std::string format_intervals(const std::vector<TimeInterval>& intervals) {
  std::string s = "```json\n[\n";
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    s += json{{"start", intervals[i].start}, {"end", intervals[i].end}}.dump();
    s += i + 1 < intervals.size() ? ",\n" : "\n";
  }
  return s + "]\n```\n";
}

VlmResponse parse_constraint_response(std::string_view text, std::optional<int> num_keypoints) {
  VlmResponse r;
  r.raw_text = std::string(text);
  try {
    ConstraintPlan plan = constraint_plan_from_json(fenced_block(text));
    for (const auto& v : validate_plan(plan, num_keypoints)) {
      r.violations.push_back(v.rule + (v.stage >= 0 ? " (stage " + std::to_string(v.stage) + ")" : "") + ": " +
                             v.message);
    }
    r.parsed = std::move(plan);
  } catch (const std::exception& e) {
    r.violations.push_back(e.what());
  }
  r.valid = r.violations.empty();
  return r;
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 computation failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xf]);
  }
  return out;
}

namespace {

json request_json(const VlmRequest& r) {
  return {{"attachments", r.attachments}, {"kind", std::string(to_string(r.kind))}, {"prompt", r.prompt}};
}

// Bounds concurrent HTTP requests across threads.
class InFlightLimiter {
 public:
  void acquire(int limit) {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return active_ < std::max(limit, 1); });
    ++active_;
  }
  void release() {
    {
      std::lock_guard lock(mu_);
      --active_;
    }
    cv_.notify_one();
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  int active_ = 0;
};

InFlightLimiter& limiter() {
  static InFlightLimiter l;
  return l;
}

std::string fetch_recorded(const VlmRequest& request, const RecordedTransport& t) {
  const std::string hash = request_hash(request);
  const auto path = t.dir / (hash + ".json");
  if (!std::filesystem::exists(path)) throw RecordingNotFound(hash);
  const json doc = codec::parse_document(read_text_file(path));
  return codec::decode("recording", [&] { return doc.at("response").get<std::string>(); });
}

std::string fetch_http(const VlmRequest& request, const HttpTransport& t) {
  // Split http://host:port/path into client base and path.
  constexpr std::string_view kScheme = "http://";
  if (t.url.rfind(kScheme, 0) != 0) throw ValidationError("only http:// endpoints are supported: " + t.url);
  const std::size_t slash = t.url.find('/', kScheme.size());
  const std::string base = slash == std::string::npos ? t.url : t.url.substr(0, slash);
  const std::string path = slash == std::string::npos ? "/" : t.url.substr(slash);

  httplib::Client client(base);
  const auto secs = static_cast<time_t>(t.timeout_s);
  const auto usecs = static_cast<time_t>((t.timeout_s - static_cast<double>(secs)) * 1e6);
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);
  httplib::Headers headers;
  if (const char* token = std::getenv(t.token_env.c_str()); token && *token)
    headers.emplace("Authorization", std::string("Bearer ") + token);
  const std::string body = request_json(request).dump();

  limiter().acquire(t.max_in_flight);
  struct Release {
    ~Release() { limiter().release(); }
  } release;

  double delay = t.backoff_base_s;
  std::string last_error;
  bool last_timeout = false;
  int last_status = 0;
  std::string last_body;
  for (int attempt = 1; attempt <= std::max(t.max_attempts, 1); ++attempt) {
    if (attempt > 1) {
      std::this_thread::sleep_for(std::chrono::duration<double>(delay));
      delay *= 2.0;
    }
    auto res = client.Post(path, headers, body, "application/json");
    if (!res) {
      const auto err = res.error();
      last_timeout = err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read;
      last_error = httplib::to_string(err);
      last_status = 0;
      continue;
    }
    if (res->status >= 500) {
      last_status = res->status;
      last_body = res->body;
      continue;
    }
    if (res->status < 200 || res->status >= 300) throw VlmHttpStatus(res->status, res->body);
    const json doc = codec::parse_document(res->body);
    return codec::decode("VLM response", [&] { return doc.at("text").get<std::string>(); });
  }
  if (last_status != 0) throw VlmHttpStatus(last_status, last_body);
  if (last_timeout) throw VlmTimeout("VLM request timed out after " + std::to_string(t.max_attempts) + " attempts");
  throw VlmTransportError("VLM request failed: " + last_error);
}

}  // namespace

std::string request_hash(const VlmRequest& request) { return sha256_hex(codec::canonical(request_json(request))); }

Transport parse_transport(std::string_view spec) {
  if (spec.rfind("recorded:", 0) == 0) return RecordedTransport{std::filesystem::path(spec.substr(9))};
  if (spec.rfind("http:", 0) == 0) {
    HttpTransport t;
    t.url = std::string(spec.substr(5));
    if (t.url.rfind("//", 0) == 0) t.url = "http:" + t.url;  // "http://host" given directly
    return t;
  }
  throw ValidationError("--vlm must be recorded:<dir> or http:<url>, got '" + std::string(spec) + "'");
}

std::string fetch_raw(const VlmRequest& request, const Transport& transport) {
  if (const auto* r = std::get_if<RecordedTransport>(&transport)) return fetch_recorded(request, *r);
  return fetch_http(request, std::get<HttpTransport>(transport));
}

VlmResponse fetch(const VlmRequest& request, const Transport& transport) {
  if (request.kind == RequestKind::ConstraintProposal &&
      std::none_of(request.attachments.begin(), request.attachments.end(),
                   [](const std::string& a) { return a.rfind("image:", 0) == 0; }))
    throw ValidationError("constraint proposal requests need an image: attachment");
  const std::string raw = fetch_raw(request, transport);
  if (request.kind == RequestKind::ConstraintProposal) return parse_constraint_response(raw);
  VlmResponse r;
  r.raw_text = raw;
  auto parsed = parse_intervals(raw);
  r.valid = parsed.valid;
  r.violations = std::move(parsed.violations);
  r.parsed = std::move(parsed.intervals);
  return r;
}

std::filesystem::path record(const VlmRequest& request, std::string_view raw_response,
                             const std::filesystem::path& dir) {
  const auto path = dir / (request_hash(request) + ".json");
  const json doc = {{"request", request_json(request)}, {"response", std::string(raw_response)}};
  write_text_file(path, doc.dump(2) + "\n");
  return path;
}

}  // namespace hybridgen
