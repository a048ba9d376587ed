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

// Behavior analyzer: aggregate statistics mined from a persona's sessions,
// plus representative exemplar videos used to ground interview questions.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "personaact/distribution.hpp"
#include "personaact/error.hpp"
#include "personaact/io.hpp"
#include "personaact/trace.hpp"

namespace personaact {

struct DurationStats {
  double mean = 0.0;
  double std = 0.0;  // population
  double median = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::size_t count = 0;

  bool operator==(const DurationStats&) const = default;
};

// Neumaier-compensated sum; keeps descriptive statistics independent of
// accumulation order to well below one ulp of the result.
inline double compensated_sum(const std::vector<double>& xs) {
  double sum = 0.0;
  double c = 0.0;
  for (double x : xs) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      c += (sum - t) + x;
    } else {
      c += (x - t) + sum;
    }
    sum = t;
  }
  return sum + c;
}

inline DurationStats describe(std::vector<double> xs) {
  DurationStats s;
  if (xs.empty()) return s;
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  s.count = n;
  s.min = xs.front();
  s.max = xs.back();
  s.median = (n % 2 == 1) ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
  s.mean = compensated_sum(xs) / static_cast<double>(n);
  std::vector<double> sq;
  sq.reserve(n);
  for (double x : xs) sq.push_back((x - s.mean) * (x - s.mean));
  s.std = std::sqrt(compensated_sum(sq) / static_cast<double>(n));
  return s;
}

struct ExemplarRef {
  std::string video_id;
  std::string session_id;
  std::int64_t timestamp_ms = 0;
  std::string category;
  double watch_duration_seconds = 0.0;
  double completion_ratio = 0.0;

  bool operator==(const ExemplarRef&) const = default;
};

struct Exemplars {
  std::vector<ExemplarRef> long_watched;
  std::vector<ExemplarRef> quick_skipped;
  std::vector<ExemplarRef> liked;

  bool operator==(const Exemplars&) const = default;
};

inline constexpr std::size_t kDefaultExemplarCount = 3;

struct BehavioralFeatures {
  std::string persona_id;
  CategoryDistribution category_distribution;        // full paths
  CategoryDistribution liked_category_distribution;  // empty() when no likes
  double like_rate = 0.0;
  double comment_rate = 0.0;
  double share_rate = 0.0;
  double mean_completion_ratio = 0.0;
  DurationStats duration_stats;
  std::map<std::string, DurationStats> duration_stats_by_top;
  std::map<std::string, std::size_t> creator_frequency;
  std::array<std::size_t, 24> temporal_histogram{};
  std::size_t total_samples = 0;
  Exemplars exemplars;

  bool operator==(const BehavioralFeatures&) const = default;
};

namespace detail {

struct FlatRecord {
  const Session* session;
  const TraceRecord* record;
};

inline std::vector<FlatRecord> persona_records(const Dataset& ds,
                                               const std::string& persona_id,
                                               const SplitSet& split_filter) {
  std::vector<FlatRecord> out;
  for (std::size_t i = 0; i < ds.sessions.size(); ++i) {
    const Session& s = ds.sessions[i];
    if (s.persona_id != persona_id) continue;
    const Split split = i < ds.splits.size() ? ds.splits[i] : Split::kTrain;
    if (!split_filter.contains(split)) continue;
    for (const auto& r : s.records) out.push_back({&s, &r});
  }
  // Canonical order so results never depend on how the caller arranged
  // sessions or records.
  std::sort(out.begin(), out.end(), [](const FlatRecord& a, const FlatRecord& b) {
    return std::tuple(a.record->action.timestamp_ms, a.session->session_id,
                      a.record->video.video_id) <
           std::tuple(b.record->action.timestamp_ms, b.session->session_id,
                      b.record->video.video_id);
  });
  return out;
}

inline double completion_ratio(const TraceRecord& r) {
  return r.action.watch_duration_seconds / r.video.length_seconds;
}

inline ExemplarRef to_exemplar(const FlatRecord& f) {
  return {f.record->video.video_id,
          f.session->session_id,
          f.record->action.timestamp_ms,
          f.record->video.category.full(),
          f.record->action.watch_duration_seconds,
          completion_ratio(*f.record)};
}

inline Exemplars pick_exemplars(const std::vector<FlatRecord>& recs, std::size_t k) {
  Exemplars ex;
  std::vector<FlatRecord> by_ratio = recs;
  // Highest ratio first; ties to the longer watch, then the earlier one.
  std::stable_sort(by_ratio.begin(), by_ratio.end(), [](const FlatRecord& a, const FlatRecord& b) {
    const double ra = completion_ratio(*a.record);
    const double rb = completion_ratio(*b.record);
    if (ra != rb) return ra > rb;
    const double da = a.record->action.watch_duration_seconds;
    const double db = b.record->action.watch_duration_seconds;
    if (da != db) return da > db;
    return a.record->action.timestamp_ms < b.record->action.timestamp_ms;
  });
  for (std::size_t i = 0; i < std::min(k, by_ratio.size()); ++i) {
    ex.long_watched.push_back(to_exemplar(by_ratio[i]));
  }
  // Lowest ratio first; ties to the shorter watch, then the earlier one.
  std::stable_sort(by_ratio.begin(), by_ratio.end(), [](const FlatRecord& a, const FlatRecord& b) {
    const double ra = completion_ratio(*a.record);
    const double rb = completion_ratio(*b.record);
    if (ra != rb) return ra < rb;
    const double da = a.record->action.watch_duration_seconds;
    const double db = b.record->action.watch_duration_seconds;
    if (da != db) return da < db;
    return a.record->action.timestamp_ms < b.record->action.timestamp_ms;
  });
  for (std::size_t i = 0; i < std::min(k, by_ratio.size()); ++i) {
    ex.quick_skipped.push_back(to_exemplar(by_ratio[i]));
  }
  // Most recent likes.
  for (auto it = recs.rbegin(); it != recs.rend() && ex.liked.size() < k; ++it) {
    if (it->record->action.liked) ex.liked.push_back(to_exemplar(*it));
  }
  return ex;
}

}  // namespace detail

inline Exemplars select_exemplars(const Dataset& ds, const std::string& persona_id,
                                  std::size_t k = kDefaultExemplarCount,
                                  const SplitSet& split_filter = all_splits()) {
  if (!ds.has_persona(persona_id)) {
    throw Error(ErrorCode::kUnknownPersona, "unknown persona " + persona_id);
  }
  return detail::pick_exemplars(detail::persona_records(ds, persona_id, split_filter), k);
}

inline BehavioralFeatures compute_features(const Dataset& ds, const std::string& persona_id,
                                           const SplitSet& split_filter = {Split::kTrain},
                                           std::size_t exemplar_k = kDefaultExemplarCount) {
  if (!ds.has_persona(persona_id)) {
    throw Error(ErrorCode::kUnknownPersona, "unknown persona " + persona_id);
  }
  const auto recs = detail::persona_records(ds, persona_id, split_filter);
  if (recs.empty()) {
    throw Error(ErrorCode::kNoRecordsInSplit,
                "persona " + persona_id + " has no records in the selected splits");
  }

  BehavioralFeatures f;
  f.persona_id = persona_id;
  f.total_samples = recs.size();

  std::vector<std::string> paths;
  std::vector<std::string> liked_paths;
  std::vector<double> durations;
  std::vector<double> ratios;
  std::map<std::string, std::vector<double>> by_top;
  std::size_t likes = 0, comments = 0, shares = 0;
  for (const auto& fr : recs) {
    const TraceRecord& r = *fr.record;
    paths.push_back(r.video.category.full());
    if (r.action.liked) {
      ++likes;
      liked_paths.push_back(r.video.category.full());
    }
    if (r.action.commented) ++comments;
    if (r.action.shared) ++shares;
    durations.push_back(r.action.watch_duration_seconds);
    ratios.push_back(detail::completion_ratio(r));
    by_top[r.video.category.top].push_back(r.action.watch_duration_seconds);
    ++f.creator_frequency[r.video.creator_id];
    ++f.temporal_histogram[static_cast<std::size_t>(
        local_hour(r.action.timestamp_ms, fr.session->utc_offset_minutes))];
  }
  const double n = static_cast<double>(recs.size());
  f.category_distribution = category_distribution(paths);
  if (!liked_paths.empty()) f.liked_category_distribution = category_distribution(liked_paths);
  f.like_rate = static_cast<double>(likes) / n;
  f.comment_rate = static_cast<double>(comments) / n;
  f.share_rate = static_cast<double>(shares) / n;
  f.mean_completion_ratio = compensated_sum(ratios) / n;
  f.duration_stats = describe(std::move(durations));
  for (auto& [top, ds_top] : by_top) f.duration_stats_by_top[top] = describe(std::move(ds_top));
  f.exemplars = detail::pick_exemplars(recs, exemplar_k);
  return f;
}

// ---- serialization ----

inline Json to_json(const DurationStats& s) {
  return Json{{"mean", s.mean}, {"std", s.std},   {"median", s.median},
              {"min", s.min},   {"max", s.max},   {"count", s.count}};
}

inline DurationStats duration_stats_from_json(const Json& j) {
  DurationStats s;
  s.mean = j.at("mean").get<double>();
  s.std = j.at("std").get<double>();
  s.median = j.at("median").get<double>();
  s.min = j.at("min").get<double>();
  s.max = j.at("max").get<double>();
  s.count = j.value("count", std::size_t{0});
  return s;
}

inline Json to_json(const ExemplarRef& e) {
  return Json{{"video_id", e.video_id},
              {"session_id", e.session_id},
              {"timestamp_ms", e.timestamp_ms},
              {"category", e.category},
              {"watch_duration_s", e.watch_duration_seconds},
              {"completion_ratio", e.completion_ratio}};
}

inline ExemplarRef exemplar_from_json(const Json& j) {
  return {j.at("video_id").get<std::string>(), j.at("session_id").get<std::string>(),
          j.at("timestamp_ms").get<std::int64_t>(), j.at("category").get<std::string>(),
          j.at("watch_duration_s").get<double>(), j.at("completion_ratio").get<double>()};
}

inline Json features_to_json(const BehavioralFeatures& f) {
  auto list = [](const std::vector<ExemplarRef>& v) {
    Json a = Json::array();
    for (const auto& e : v) a.push_back(to_json(e));
    return a;
  };
  Json by_top = Json::object();
  for (const auto& [top, s] : f.duration_stats_by_top) by_top[top] = to_json(s);
  Json creators = Json::object();
  for (const auto& [c, n] : f.creator_frequency) creators[c] = n;
  return Json{
      {"schema", kFeaturesSchema},
      {"persona_id", f.persona_id},
      {"total_samples", f.total_samples},
      {"category_distribution", to_json(f.category_distribution)},
      {"liked_category_distribution", to_json(f.liked_category_distribution)},
      {"liked_categories_empty", f.liked_category_distribution.empty()},
      {"like_rate", f.like_rate},
      {"comment_rate", f.comment_rate},
      {"share_rate", f.share_rate},
      {"mean_completion_ratio", f.mean_completion_ratio},
      {"duration_stats", to_json(f.duration_stats)},
      {"duration_stats_by_top", std::move(by_top)},
      {"creator_frequency", std::move(creators)},
      {"temporal_histogram", f.temporal_histogram},
      {"exemplars",
       {{"long_watched", list(f.exemplars.long_watched)},
        {"quick_skipped", list(f.exemplars.quick_skipped)},
        {"liked", list(f.exemplars.liked)}}},
  };
}

inline BehavioralFeatures features_from_json(const Json& j) {
  if (j.value("schema", std::string()) != kFeaturesSchema) {
    throw Error(ErrorCode::kSchemaMismatch, "expected a features document");
  }
  try {
    BehavioralFeatures f;
    f.persona_id = j.at("persona_id").get<std::string>();
    f.total_samples = j.at("total_samples").get<std::size_t>();
    f.category_distribution = distribution_from_json(j.at("category_distribution"));
    f.liked_category_distribution = distribution_from_json(j.at("liked_category_distribution"));
    f.like_rate = j.at("like_rate").get<double>();
    f.comment_rate = j.at("comment_rate").get<double>();
    f.share_rate = j.at("share_rate").get<double>();
    f.mean_completion_ratio = j.at("mean_completion_ratio").get<double>();
    f.duration_stats = duration_stats_from_json(j.at("duration_stats"));
    for (const auto& [top, s] : j.at("duration_stats_by_top").items()) {
      f.duration_stats_by_top[top] = duration_stats_from_json(s);
    }
    for (const auto& [c, n] : j.at("creator_frequency").items()) {
      f.creator_frequency[c] = n.get<std::size_t>();
    }
    f.temporal_histogram = j.at("temporal_histogram").get<std::array<std::size_t, 24>>();
    const Json& ex = j.at("exemplars");
    for (const auto& e : ex.at("long_watched")) f.exemplars.long_watched.push_back(exemplar_from_json(e));
    for (const auto& e : ex.at("quick_skipped")) f.exemplars.quick_skipped.push_back(exemplar_from_json(e));
    for (const auto& e : ex.at("liked")) f.exemplars.liked.push_back(exemplar_from_json(e));
    return f;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("features document: ") + e.what());
  }
}

// Stable fingerprint of a feature snapshot.
inline std::string features_hash(const BehavioralFeatures& f) {
  return fnv1a_hex(features_to_json(f).dump());
}

}  // namespace personaact
