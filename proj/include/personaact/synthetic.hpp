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

// Synthetic viewing traces drawn over a catalog. Each top-level category
// has its own duration mode and engagement rates; categories are visited
// in proportion to an exposure weight.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "personaact/error.hpp"
#include "personaact/random.hpp"
#include "personaact/recsim.hpp"
#include "personaact/trace.hpp"

namespace personaact {

struct CategoryBehavior {
  double duration_mode_seconds = 5.0;
  double duration_log_sd = 0.3;
  double like_rate = 0.0;
  double comment_rate = 0.0;
  double share_rate = 0.0;
  double exposure_weight = 1.0;
};

struct SyntheticTraceSpec {
  std::string persona_id = "synthetic";
  std::size_t sessions = 20;
  std::size_t records_per_session = 40;
  CategoryBehavior default_behavior;
  std::map<std::string, CategoryBehavior> by_category;  // top-level category
  std::int64_t start_ms = 1704110400000;  // 2024-01-01 12:00 UTC
  std::uint64_t seed = 0;

  const CategoryBehavior& behavior(const std::string& top) const {
    auto it = by_category.find(top);
    return it == by_category.end() ? default_behavior : it->second;
  }
};

inline Dataset synthesize_traces(const Catalog& catalog, const SyntheticTraceSpec& spec) {
  if (catalog.empty()) throw Error(ErrorCode::kEmptyCatalog, "catalog has no videos");
  Rng rng(derive_seed(spec.seed, 0x7ace));
  const auto& tops = catalog.top_categories();
  std::vector<double> cumulative;
  double total = 0.0;
  for (const auto& t : tops) {
    total += std::max(0.0, spec.behavior(t).exposure_weight);
    cumulative.push_back(total);
  }
  if (!(total > 0.0)) throw Error(ErrorCode::kConfigInvalid, "exposure weights sum to zero");

  constexpr std::int64_t kDayMs = 24LL * 3600 * 1000;
  Dataset ds;
  for (std::size_t s = 0; s < spec.sessions; ++s) {
    Session session;
    char id[64];
    std::snprintf(id, sizeof(id), "%s-s%03zu", spec.persona_id.c_str(), s);
    session.session_id = id;
    session.persona_id = spec.persona_id;
    // One evening session a day, starting on the hour plus a jitter.
    std::int64_t t = spec.start_ms + static_cast<std::int64_t>(s) * kDayMs +
                     static_cast<std::int64_t>(rng.uniform_index(3600)) * 1000;
    for (std::size_t i = 0; i < spec.records_per_session; ++i) {
      const double u = rng.uniform01() * total;
      const std::size_t k = static_cast<std::size_t>(
          std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
      const std::string& top = tops[std::min(k, tops.size() - 1)];
      const auto& members = catalog.videos_in(top);
      const VideoMeta& video = catalog.videos()[members[rng.uniform_index(members.size())]];
      const CategoryBehavior& b = spec.behavior(top);
      TraceRecord r;
      r.video = video;
      r.action.video_id = video.video_id;
      const double d = b.duration_mode_seconds * std::exp(rng.normal(0.0, b.duration_log_sd));
      r.action.watch_duration_seconds =
          std::max(kMinWatchDurationSeconds, std::round(d * 10.0) / 10.0);
      r.action.liked = rng.bernoulli(b.like_rate);
      r.action.commented = rng.bernoulli(b.comment_rate);
      r.action.shared = rng.bernoulli(b.share_rate);
      r.action.timestamp_ms = t;
      t += static_cast<std::int64_t>(r.action.watch_duration_seconds * 1000.0) + 2000;
      session.records.push_back(std::move(r));
    }
    ds.sessions.push_back(std::move(session));
    ds.splits.push_back(Split::kTrain);
  }
  canonicalize(ds);
  return ds;
}

// A persona that lingers on, likes and shares a few favourite categories
// and skips everything else within a couple of seconds.
inline SyntheticTraceSpec concentrated_persona_spec(const Catalog& catalog,
                                                    const std::vector<std::string>& favourites,
                                                    std::uint64_t seed,
                                                    std::string persona_id = "concentrated") {
  SyntheticTraceSpec spec;
  spec.persona_id = std::move(persona_id);
  spec.seed = seed;
  spec.default_behavior = {2.0, 0.3, 0.0, 0.0, 0.0, 1.0};
  for (const auto& f : favourites) {
    if (std::find(catalog.top_categories().begin(), catalog.top_categories().end(), f) ==
        catalog.top_categories().end()) {
      throw Error(ErrorCode::kConfigInvalid, "favourite category " + f + " not in catalog");
    }
    spec.by_category[f] = {45.0, 0.2, 0.9, 0.1, 0.6, 4.0};
  }
  return spec;
}

}  // namespace personaact
