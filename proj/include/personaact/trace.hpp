// Copyright 2026 The personaact Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Trace data model: what a user saw and did, grouped into browsing
// sessions, plus line-delimited ingestion and chronological splitting.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "personaact/error.hpp"
#include "personaact/io.hpp"

namespace personaact {

// Shortest watch the collection tool can log; anything below is corrupt.
inline constexpr double kMinWatchDurationSeconds = 0.5;
// Sessions default to China Standard Time unless the trace says otherwise.
inline constexpr int kDefaultUtcOffsetMinutes = 8 * 60;

enum class Platform { kBilibili, kDouyin, kKuaishou, kSimulated };

inline std::string_view to_string(Platform p) {
  switch (p) {
    case Platform::kBilibili: return "bilibili";
    case Platform::kDouyin: return "douyin";
    case Platform::kKuaishou: return "kuaishou";
    case Platform::kSimulated: return "simulated";
  }
  return "simulated";
}

inline std::optional<Platform> parse_platform(std::string_view s) {
  if (s == "bilibili") return Platform::kBilibili;
  if (s == "douyin") return Platform::kDouyin;
  if (s == "kuaishou") return Platform::kKuaishou;
  if (s == "simulated") return Platform::kSimulated;
  return std::nullopt;
}

// Two-level category such as "Entertainment/Comedy".
struct CategoryPath {
  std::string top;
  std::string sub;

  std::string full() const { return top + "/" + sub; }

  // Splits on '/'. Levels beyond the second are folded into `sub`.
  static std::optional<CategoryPath> parse(std::string_view path) {
    const auto slash = path.find('/');
    if (slash == std::string_view::npos) return std::nullopt;
    CategoryPath out{std::string(path.substr(0, slash)),
                     std::string(path.substr(slash + 1))};
    if (out.top.empty() || out.sub.empty()) return std::nullopt;
    // Reject empty inner levels such as "A//B" or "A/B/".
    if (out.sub.front() == '/' || out.sub.back() == '/' ||
        out.sub.find("//") != std::string::npos) {
      return std::nullopt;
    }
    return out;
  }

  auto operator<=>(const CategoryPath&) const = default;
};

struct VideoMeta {
  std::string video_id;
  Platform platform = Platform::kSimulated;
  CategoryPath category;
  std::string title;
  std::string creator_id;
  double length_seconds = 1.0;
  std::vector<std::string> descriptors;

  bool operator==(const VideoMeta&) const = default;
};

struct ActionRecord {
  std::string video_id;
  double watch_duration_seconds = kMinWatchDurationSeconds;
  bool liked = false;
  bool commented = false;
  bool shared = false;
  std::int64_t timestamp_ms = 0;  // UTC

  bool operator==(const ActionRecord&) const = default;
};

struct TraceRecord {
  VideoMeta video;
  ActionRecord action;

  bool operator==(const TraceRecord&) const = default;
};

struct Session {
  std::string session_id;
  std::string persona_id;
  int utc_offset_minutes = kDefaultUtcOffsetMinutes;
  std::vector<TraceRecord> records;

  std::int64_t start_time_ms() const {
    return records.empty() ? 0 : records.front().action.timestamp_ms;
  }

  bool operator==(const Session&) const = default;
};

enum class Split { kTrain, kValidation, kTest };

inline std::string_view to_string(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kValidation: return "validation";
    case Split::kTest: return "test";
  }
  return "train";
}

inline std::optional<Split> parse_split(std::string_view s) {
  if (s == "train") return Split::kTrain;
  if (s == "validation") return Split::kValidation;
  if (s == "test") return Split::kTest;
  return std::nullopt;
}

using SplitSet = std::set<Split>;

inline const SplitSet& all_splits() {
  static const SplitSet kAll{Split::kTrain, Split::kValidation, Split::kTest};
  return kAll;
}

struct Rejection {
  std::size_t line = 0;  // 1-based, header is line 1
  std::string reason;

  bool operator==(const Rejection&) const = default;
};

// Sessions ordered by (persona_id, start time, session_id); `splits` is
// parallel to `sessions`. Fresh ingests assign every session to train.
struct Dataset {
  std::vector<Session> sessions;
  std::vector<Split> splits;
  std::vector<Rejection> rejections;

  std::size_t record_count() const {
    std::size_t n = 0;
    for (const auto& s : sessions) n += s.records.size();
    return n;
  }

  std::vector<std::string> persona_ids() const {
    std::vector<std::string> out;
    for (const auto& s : sessions) {
      if (out.empty() || out.back() != s.persona_id) out.push_back(s.persona_id);
    }
    return out;
  }

  bool has_persona(std::string_view persona_id) const {
    return std::any_of(sessions.begin(), sessions.end(), [&](const Session& s) {
      return s.persona_id == persona_id;
    });
  }

  std::size_t count_in(Split split) const {
    return static_cast<std::size_t>(std::count(splits.begin(), splits.end(), split));
  }

  bool operator==(const Dataset&) const = default;
};

// Restores the canonical session order. Split assignments travel with
// their sessions.
inline void canonicalize(Dataset& ds) {
  if (ds.splits.size() != ds.sessions.size()) {
    ds.splits.assign(ds.sessions.size(), Split::kTrain);
  }
  std::vector<std::size_t> order(ds.sessions.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const Session& x = ds.sessions[a];
    const Session& y = ds.sessions[b];
    return std::tuple(x.persona_id, x.start_time_ms(), x.session_id) <
           std::tuple(y.persona_id, y.start_time_ms(), y.session_id);
  });
  std::vector<Session> sessions;
  std::vector<Split> splits;
  sessions.reserve(order.size());
  splits.reserve(order.size());
  for (std::size_t i : order) {
    sessions.push_back(std::move(ds.sessions[i]));
    splits.push_back(ds.splits[i]);
  }
  ds.sessions = std::move(sessions);
  ds.splits = std::move(splits);
}

namespace detail {

inline const Json& require_key(const Json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw std::invalid_argument(std::string("missing key ") + key);
  return *it;
}

inline std::string require_string(const Json& obj, const char* key) {
  const Json& v = require_key(obj, key);
  if (!v.is_string()) throw std::invalid_argument(std::string(key) + " is not a string");
  return v.get<std::string>();
}

inline double require_number(const Json& obj, const char* key) {
  const Json& v = require_key(obj, key);
  if (!v.is_number()) throw std::invalid_argument(std::string(key) + " is not a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw std::invalid_argument(std::string(key) + " is not finite");
  return d;
}

inline bool require_bool(const Json& obj, const char* key) {
  const Json& v = require_key(obj, key);
  if (!v.is_boolean()) throw std::invalid_argument(std::string(key) + " is not a boolean");
  return v.get<bool>();
}

// Parses one record line. Throws std::invalid_argument with a reason that
// ends up in the rejection report.
inline std::pair<Session, TraceRecord> parse_record(const Json& obj,
                                                    int default_offset) {
  if (!obj.is_object()) throw std::invalid_argument("record is not an object");
  Session header;
  header.session_id = require_string(obj, "session_id");
  header.persona_id = require_string(obj, "persona_id");
  if (header.session_id.empty()) throw std::invalid_argument("empty session_id");
  if (header.persona_id.empty()) throw std::invalid_argument("empty persona_id");
  header.utc_offset_minutes = default_offset;
  if (auto it = obj.find("utc_offset_minutes"); it != obj.end()) {
    if (!it->is_number_integer()) {
      throw std::invalid_argument("utc_offset_minutes is not an integer");
    }
    header.utc_offset_minutes = it->get<int>();
  }

  TraceRecord rec;
  const Json& ts = require_key(obj, "timestamp_ms");
  if (!ts.is_number_integer()) throw std::invalid_argument("timestamp_ms is not an integer");
  rec.action.timestamp_ms = ts.get<std::int64_t>();

  rec.video.video_id = require_string(obj, "video_id");
  if (rec.video.video_id.empty()) throw std::invalid_argument("empty video_id");
  rec.action.video_id = rec.video.video_id;

  const std::string platform = require_string(obj, "platform");
  auto p = parse_platform(platform);
  if (!p) throw std::invalid_argument("unknown platform " + platform);
  rec.video.platform = *p;

  const std::string top = require_string(obj, "category_top");
  const std::string sub = require_string(obj, "category_sub");
  auto path = CategoryPath::parse(top + "/" + sub);
  if (!path || top.empty() || sub.empty()) {
    throw std::invalid_argument("category_path needs two non-empty levels");
  }
  rec.video.category = *path;

  rec.video.title = require_string(obj, "title");
  rec.video.creator_id = require_string(obj, "creator_id");
  rec.video.length_seconds = require_number(obj, "video_length_s");
  if (rec.video.length_seconds <= 0.0) {
    throw std::invalid_argument("video_length_s must be positive");
  }
  rec.action.watch_duration_seconds = require_number(obj, "watch_duration_s");
  if (rec.action.watch_duration_seconds < kMinWatchDurationSeconds) {
    throw std::invalid_argument("below duration floor");
  }
  rec.action.liked = require_bool(obj, "liked");
  rec.action.commented = require_bool(obj, "commented");
  rec.action.shared = require_bool(obj, "shared");

  if (auto it = obj.find("descriptors"); it != obj.end()) {
    if (!it->is_array()) throw std::invalid_argument("descriptors is not a list");
    for (const auto& d : *it) {
      if (!d.is_string()) throw std::invalid_argument("descriptor is not a string");
      rec.video.descriptors.push_back(d.get<std::string>());
    }
  }
  return {std::move(header), std::move(rec)};
}

}  // namespace detail

// Parses trace text (header line + one record per line). Invalid record
// lines are collected in Dataset::rejections rather than aborting.
inline Dataset parse_traces(std::string_view text,
                            std::string_view schema_version = kTraceSchema,
                            int default_utc_offset_minutes = kDefaultUtcOffsetMinutes) {
  std::vector<std::string_view> lines;
  {
    std::size_t start = 0;
    while (start <= text.size()) {
      std::size_t end = text.find('\n', start);
      if (end == std::string_view::npos) end = text.size();
      std::string_view line = text.substr(start, end - start);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      lines.push_back(line);
      start = end + 1;
    }
  }
  // The header is the first non-blank line.
  std::size_t header_idx = 0;
  while (header_idx < lines.size() &&
         lines[header_idx].find_first_not_of(" \t") == std::string_view::npos) {
    ++header_idx;
  }
  if (header_idx == lines.size()) {
    throw Error(ErrorCode::kEmptyDataset, "trace file is empty");
  }
  Json header;
  try {
    header = Json::parse(lines[header_idx]);
  } catch (const Json::parse_error&) {
    throw Error(ErrorCode::kSchemaMismatch, "header line is not a schema object");
  }
  if (!header.is_object() || !header.contains("schema") || !header["schema"].is_string()) {
    throw Error(ErrorCode::kSchemaMismatch, "header line lacks a schema field");
  }
  if (header["schema"].get<std::string>() != schema_version) {
    throw Error(ErrorCode::kSchemaMismatch,
                "schema " + header["schema"].get<std::string>() + " != " +
                    std::string(schema_version));
  }

  Dataset ds;
  std::map<std::string, std::size_t> index_of;  // session_id -> position
  for (std::size_t i = header_idx + 1; i < lines.size(); ++i) {
    std::string_view line = lines[i];
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    const std::size_t line_no = i + 1;
    try {
      Json obj;
      try {
        obj = Json::parse(line);
      } catch (const Json::parse_error&) {
        throw std::invalid_argument("malformed record");
      }
      auto [header_part, rec] = detail::parse_record(obj, default_utc_offset_minutes);
      auto it = index_of.find(header_part.session_id);
      if (it == index_of.end()) {
        index_of.emplace(header_part.session_id, ds.sessions.size());
        header_part.records.push_back(std::move(rec));
        ds.sessions.push_back(std::move(header_part));
      } else {
        Session& s = ds.sessions[it->second];
        if (s.persona_id != header_part.persona_id) {
          throw std::invalid_argument("persona_id differs within session");
        }
        if (s.utc_offset_minutes != header_part.utc_offset_minutes) {
          throw std::invalid_argument("utc_offset_minutes differs within session");
        }
        s.records.push_back(std::move(rec));
      }
    } catch (const std::invalid_argument& e) {
      ds.rejections.push_back({line_no, e.what()});
    }
  }
  if (ds.sessions.empty()) {
    throw Error(ErrorCode::kEmptyDataset, "no valid sessions in trace file");
  }
  for (auto& s : ds.sessions) {
    std::stable_sort(s.records.begin(), s.records.end(),
                     [](const TraceRecord& a, const TraceRecord& b) {
                       return a.action.timestamp_ms < b.action.timestamp_ms;
                     });
  }
  ds.splits.assign(ds.sessions.size(), Split::kTrain);
  canonicalize(ds);
  return ds;
}

inline Dataset ingest_traces(const std::filesystem::path& path,
                             std::string_view schema_version = kTraceSchema,
                             int default_utc_offset_minutes = kDefaultUtcOffsetMinutes) {
  return parse_traces(read_text_file(path), schema_version, default_utc_offset_minutes);
}

inline Json record_to_json(const Session& s, const TraceRecord& r) {
  Json obj = Json::object();
  obj["session_id"] = s.session_id;
  obj["persona_id"] = s.persona_id;
  obj["timestamp_ms"] = r.action.timestamp_ms;
  obj["video_id"] = r.video.video_id;
  obj["platform"] = to_string(r.video.platform);
  obj["category_top"] = r.video.category.top;
  obj["category_sub"] = r.video.category.sub;
  obj["title"] = r.video.title;
  obj["creator_id"] = r.video.creator_id;
  obj["video_length_s"] = r.video.length_seconds;
  obj["watch_duration_s"] = r.action.watch_duration_seconds;
  obj["liked"] = r.action.liked;
  obj["commented"] = r.action.commented;
  obj["shared"] = r.action.shared;
  obj["descriptors"] = r.video.descriptors;
  if (s.utc_offset_minutes != kDefaultUtcOffsetMinutes) {
    obj["utc_offset_minutes"] = s.utc_offset_minutes;
  }
  return obj;
}

// Inverse of parse_traces for valid records (rejections are not written).
inline std::string serialize_traces(const Dataset& ds) {
  std::string out;
  out += Json{{"schema", kTraceSchema}}.dump();
  out += '\n';
  for (const auto& s : ds.sessions) {
    for (const auto& r : s.records) {
      out += record_to_json(s, r).dump();
      out += '\n';
    }
  }
  return out;
}

struct SplitRatios {
  double train = 0.8;
  double validation = 0.1;
  double test = 0.1;
};

// Round half to even, with a small band around .5 so products such as
// 0.8 * 10 that land a few ulps off a half still resolve deterministically.
inline long bankers_round(double x) {
  const double f = std::floor(x);
  const double frac = x - f;
  if (std::abs(frac - 0.5) < 1e-9) {
    const long base = static_cast<long>(f);
    return (base % 2 == 0) ? base : base + 1;
  }
  return static_cast<long>(std::llround(x));
}

struct SplitCounts {
  std::size_t train = 0;
  std::size_t validation = 0;
  std::size_t test = 0;
};

inline SplitCounts split_counts(std::size_t n, const SplitRatios& r) {
  SplitCounts c;
  if (n == 0) return c;
  long train = std::max(1L, bankers_round(r.train * static_cast<double>(n)));
  train = std::min<long>(train, static_cast<long>(n));
  long val = bankers_round(r.validation * static_cast<double>(n));
  val = std::clamp<long>(val, 0, static_cast<long>(n) - train);
  c.train = static_cast<std::size_t>(train);
  c.validation = static_cast<std::size_t>(val);
  c.test = n - c.train - c.validation;
  return c;
}

// Chronological per-persona split: earliest sessions train, the next block
// validates, the remainder tests. Personas are split independently.
inline Dataset split_sessions(Dataset ds, const SplitRatios& ratios = {}) {
  const double sum = ratios.train + ratios.validation + ratios.test;
  if (!(ratios.train > 0.0) || !(ratios.validation > 0.0) || !(ratios.test > 0.0) ||
      std::abs(sum - 1.0) > 1e-9) {
    throw Error(ErrorCode::kInvalidRatios, "split ratios must be positive and sum to 1");
  }
  if (ds.sessions.empty()) throw Error(ErrorCode::kEmptyDataset, "dataset is empty");
  canonicalize(ds);
  std::size_t begin = 0;
  while (begin < ds.sessions.size()) {
    std::size_t end = begin;
    while (end < ds.sessions.size() &&
           ds.sessions[end].persona_id == ds.sessions[begin].persona_id) {
      ++end;
    }
    const SplitCounts c = split_counts(end - begin, ratios);
    for (std::size_t i = begin; i < end; ++i) {
      const std::size_t k = i - begin;
      ds.splits[i] = k < c.train                   ? Split::kTrain
                     : k < c.train + c.validation ? Split::kValidation
                                                   : Split::kTest;
    }
    begin = end;
  }
  return ds;
}

// Split assignment as a standalone document, keyed by session.
inline Json split_assignment_json(const Dataset& ds) {
  Json doc = Json::object();
  doc["schema"] = kSplitSchema;
  Json rows = Json::array();
  for (std::size_t i = 0; i < ds.sessions.size(); ++i) {
    rows.push_back({{"session_id", ds.sessions[i].session_id},
                    {"persona_id", ds.sessions[i].persona_id},
                    {"start_time_ms", ds.sessions[i].start_time_ms()},
                    {"split", to_string(ds.splits[i])}});
  }
  doc["sessions"] = std::move(rows);
  return doc;
}

inline void apply_split_assignment(Dataset& ds, const Json& doc) {
  std::map<std::string, Split> by_id;
  for (const auto& row : doc.at("sessions")) {
    auto s = parse_split(row.at("split").get<std::string>());
    if (!s) throw Error(ErrorCode::kParseError, "bad split label");
    by_id[row.at("session_id").get<std::string>()] = *s;
  }
  for (std::size_t i = 0; i < ds.sessions.size(); ++i) {
    auto it = by_id.find(ds.sessions[i].session_id);
    if (it == by_id.end()) {
      throw Error(ErrorCode::kConfigInvalid,
                  "split assignment lacks session " + ds.sessions[i].session_id);
    }
    ds.splits[i] = it->second;
  }
}

// Local hour of day for a UTC timestamp under a fixed offset.
inline int local_hour(std::int64_t timestamp_ms, int utc_offset_minutes) {
  constexpr std::int64_t kMsPerMinute = 60'000;
  constexpr std::int64_t kMinutesPerDay = 24 * 60;
  std::int64_t minutes = timestamp_ms / kMsPerMinute;
  if (timestamp_ms % kMsPerMinute < 0) --minutes;
  minutes += utc_offset_minutes;
  std::int64_t of_day = minutes % kMinutesPerDay;
  if (of_day < 0) of_day += kMinutesPerDay;
  return static_cast<int>(of_day / 60);
}

}  // namespace personaact
