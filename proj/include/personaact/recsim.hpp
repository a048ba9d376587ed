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

// Simulated short-video platform.
//
// The platform keeps one affinity score per top-level category. With
// probability epsilon it recommends a uniformly random catalog video;
// otherwise it draws a category from softmax(affinity / T) and a uniform
// video inside it. Feedback moves the watched category's affinity toward
// the engagement signal at rate eta, so a small eta means high inertia.
// This is a mechanism for exercising the audit protocols, not a model of
// any real recommender.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "personaact/error.hpp"
#include "personaact/io.hpp"
#include "personaact/policy.hpp"
#include "personaact/random.hpp"
#include "personaact/trace.hpp"

namespace personaact {

// ---------------------------------------------------------------------------
// Catalog

class Catalog {
 public:
  Catalog() = default;

  explicit Catalog(std::vector<VideoMeta> videos) : videos_(std::move(videos)) {
    if (videos_.empty()) throw Error(ErrorCode::kEmptyCatalog, "catalog has no videos");
    for (std::size_t i = 0; i < videos_.size(); ++i) {
      if (!(videos_[i].length_seconds > 0.0)) {
        throw Error(ErrorCode::kInvalidCatalog, "video " + videos_[i].video_id + " has no length");
      }
      by_top_[videos_[i].category.top].push_back(i);
    }
    if (by_top_.size() < 2) {
      throw Error(ErrorCode::kInvalidCatalog, "catalog needs at least two top-level categories");
    }
    for (const auto& [top, _] : by_top_) tops_.push_back(top);
  }

  const std::vector<VideoMeta>& videos() const { return videos_; }
  const std::vector<std::string>& top_categories() const { return tops_; }
  const std::vector<std::size_t>& videos_in(const std::string& top) const { return by_top_.at(top); }
  std::size_t size() const { return videos_.size(); }
  bool empty() const { return videos_.empty(); }

  // Exposure probability of each full path under uniform sampling of videos.
  std::map<std::string, double> uniform_path_distribution() const {
    std::map<std::string, double> out;
    for (const auto& v : videos_) out[v.category.full()] += 1.0;
    for (auto& [_, p] : out) p /= static_cast<double>(videos_.size());
    return out;
  }

 private:
  std::vector<VideoMeta> videos_;
  std::map<std::string, std::vector<std::size_t>> by_top_;
  std::vector<std::string> tops_;
};

struct CatalogSpec {
  std::size_t top_categories = 20;
  std::size_t subs_per_top = 3;
  std::size_t videos_per_top = 50;
  // Video lengths are log-normal, clipped to [min, max] seconds.
  double length_median_seconds = 30.0;
  double length_log_sd = 0.6;
  double min_length_seconds = 5.0;
  double max_length_seconds = 300.0;
  std::uint64_t seed = 0;
};

inline std::string top_category_name(std::size_t i) {
  static const char* const kNames[] = {
      "Entertainment", "Knowledge", "Gaming",  "Life",    "Music",   "Animation", "News",
      "Sports",        "Food",      "Travel",  "Fashion", "Tech",    "Cars",      "Pets",
      "Dance",         "Film",      "Fitness", "Beauty",  "Finance", "Comedy"};
  constexpr std::size_t kCount = sizeof(kNames) / sizeof(kNames[0]);
  if (i < kCount) return kNames[i];
  char buf[32];
  std::snprintf(buf, sizeof(buf), "Category%02zu", i + 1);
  return buf;
}

inline Catalog generate_catalog(const CatalogSpec& spec) {
  if (spec.top_categories < 2 || spec.subs_per_top < 1 ||
      spec.videos_per_top < spec.subs_per_top) {
    throw Error(ErrorCode::kInvalidCatalog,
                "catalog spec needs >= 2 categories and >= 1 video per sub-category");
  }
  if (!(spec.min_length_seconds > 0.0) || spec.max_length_seconds < spec.min_length_seconds) {
    throw Error(ErrorCode::kInvalidCatalog, "bad video length bounds");
  }
  Rng rng(derive_seed(spec.seed, 0xca7a));
  std::vector<VideoMeta> videos;
  videos.reserve(spec.top_categories * spec.videos_per_top);
  const double mu = std::log(spec.length_median_seconds);
  for (std::size_t t = 0; t < spec.top_categories; ++t) {
    const std::string top = top_category_name(t);
    for (std::size_t i = 0; i < spec.videos_per_top; ++i) {
      VideoMeta v;
      char id[48];
      std::snprintf(id, sizeof(id), "sim-%02zu-%04zu", t, i);
      v.video_id = id;
      v.platform = Platform::kSimulated;
      // Round-robin over sub-categories keeps them equally sized.
      v.category = {top, "Sub" + std::to_string(i % spec.subs_per_top + 1)};
      v.title = top + " clip " + std::to_string(i + 1);
      v.creator_id = "creator-" + std::to_string(t) + "-" + std::to_string(i % 7);
      const double len = std::exp(rng.normal(mu, spec.length_log_sd));
      v.length_seconds = std::round(std::clamp(len, spec.min_length_seconds,
                                               spec.max_length_seconds) * 10.0) / 10.0;
      videos.push_back(std::move(v));
    }
  }
  return Catalog(std::move(videos));
}

inline Json catalog_to_json(const Catalog& c) {
  Json videos = Json::array();
  for (const auto& v : c.videos()) {
    videos.push_back({{"video_id", v.video_id},
                      {"platform", to_string(v.platform)},
                      {"category_top", v.category.top},
                      {"category_sub", v.category.sub},
                      {"title", v.title},
                      {"creator_id", v.creator_id},
                      {"video_length_s", v.length_seconds},
                      {"descriptors", v.descriptors}});
  }
  return Json{{"schema", kCatalogSchema}, {"videos", std::move(videos)}};
}

inline Catalog catalog_from_json(const Json& j) {
  if (!j.is_object() || j.value("schema", std::string()) != kCatalogSchema) {
    throw Error(ErrorCode::kSchemaMismatch, "expected a catalog document");
  }
  std::vector<VideoMeta> videos;
  try {
    for (const auto& o : j.at("videos")) {
      VideoMeta v;
      v.video_id = o.at("video_id").get<std::string>();
      auto p = parse_platform(o.value("platform", std::string("simulated")));
      if (!p) throw Error(ErrorCode::kInvalidCatalog, "unknown platform");
      v.platform = *p;
      auto path = CategoryPath::parse(o.at("category_top").get<std::string>() + "/" +
                                      o.at("category_sub").get<std::string>());
      if (!path) throw Error(ErrorCode::kInvalidCatalog, "bad category for " + v.video_id);
      v.category = *path;
      v.title = o.value("title", std::string());
      v.creator_id = o.value("creator_id", std::string());
      v.length_seconds = o.at("video_length_s").get<double>();
      v.descriptors = o.value("descriptors", std::vector<std::string>{});
      videos.push_back(std::move(v));
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kInvalidCatalog, std::string("catalog document: ") + e.what());
  }
  return Catalog(std::move(videos));
}

// ---------------------------------------------------------------------------
// Platform

struct PlatformConfig {
  double eta = 0.2;          // affinity learning rate, (0, 1]; 0 only for null controls
  double epsilon = 0.1;      // uniform exploration rate
  double temperature = 1.0;  // softmax temperature
  double like_bonus = 1.5;
  double share_bonus = 1.5;
  double decay_coupling = 0.0;  // cross-category decay, 0 = none
  double initial_affinity = 0.5;
  std::uint64_t seed = 0;

  bool operator==(const PlatformConfig&) const = default;
};

inline void validate(const PlatformConfig& c) {
  auto bad = [](const std::string& what) {
    throw Error(ErrorCode::kInvalidPlatformConfig, what);
  };
  if (!(c.eta >= 0.0 && c.eta <= 1.0)) bad("eta must lie in [0, 1]");
  if (!(c.epsilon >= 0.0 && c.epsilon <= 1.0)) bad("epsilon must lie in [0, 1]");
  if (!(c.temperature > 0.0) || !std::isfinite(c.temperature)) bad("temperature must be positive");
  if (!(c.like_bonus >= 0.0) || !(c.share_bonus >= 0.0)) bad("bonuses must be non-negative");
  if (!(c.decay_coupling >= 0.0 && c.decay_coupling <= 1.0)) bad("decay_coupling must lie in [0, 1]");
  if (!(c.initial_affinity > 0.0) || !std::isfinite(c.initial_affinity)) {
    bad("initial_affinity must be positive");
  }
}

inline Json to_json(const PlatformConfig& c) {
  return Json{{"eta", c.eta},
              {"epsilon", c.epsilon},
              {"temperature", c.temperature},
              {"like_bonus", c.like_bonus},
              {"share_bonus", c.share_bonus},
              {"decay_coupling", c.decay_coupling},
              {"initial_affinity", c.initial_affinity},
              {"seed", c.seed}};
}

inline PlatformConfig platform_config_from_json(const Json& j, PlatformConfig c = {}) {
  c.eta = j.value("eta", c.eta);
  c.epsilon = j.value("epsilon", c.epsilon);
  c.temperature = j.value("temperature", c.temperature);
  c.like_bonus = j.value("like_bonus", c.like_bonus);
  c.share_bonus = j.value("share_bonus", c.share_bonus);
  c.decay_coupling = j.value("decay_coupling", c.decay_coupling);
  c.initial_affinity = j.value("initial_affinity", c.initial_affinity);
  c.seed = j.value("seed", c.seed);
  return c;
}

struct PlatformState {
  std::map<std::string, double> affinity;  // top-level category -> score
  std::size_t interaction_count = 0;
  Rng rng;
  std::optional<std::size_t> pending;  // catalog index of the last recommendation
};

// A fresh account: every category starts at the same affinity.
inline PlatformState fresh_state(const Catalog& catalog, const PlatformConfig& config) {
  validate(config);
  if (catalog.empty()) throw Error(ErrorCode::kEmptyCatalog, "catalog has no videos");
  PlatformState s;
  for (const auto& top : catalog.top_categories()) s.affinity[top] = config.initial_affinity;
  s.rng = Rng(derive_seed(config.seed, 0x9e7));
  return s;
}

// Softmax over affinities, in the catalog's category order.
inline std::vector<double> category_weights(const PlatformState& s, const PlatformConfig& c,
                                            const Catalog& catalog) {
  std::vector<double> w;
  double hi = -INFINITY;
  for (const auto& top : catalog.top_categories()) hi = std::max(hi, s.affinity.at(top));
  for (const auto& top : catalog.top_categories()) {
    w.push_back(std::exp((s.affinity.at(top) - hi) / c.temperature));
  }
  return w;
}

inline const VideoMeta& recommend(PlatformState& s, const PlatformConfig& c, const Catalog& catalog) {
  if (catalog.empty()) throw Error(ErrorCode::kEmptyCatalog, "catalog has no videos");
  std::size_t index = 0;
  if (s.rng.bernoulli(c.epsilon)) {
    index = s.rng.uniform_index(catalog.size());
  } else {
    const auto w = category_weights(s, c, catalog);
    double total = 0.0;
    for (double x : w) total += x;
    const double u = s.rng.uniform01() * total;
    std::size_t k = 0;
    double acc = w[0];
    while (k + 1 < w.size() && u >= acc) acc += w[++k];
    const auto& members = catalog.videos_in(catalog.top_categories()[k]);
    index = members[s.rng.uniform_index(members.size())];
  }
  s.pending = index;
  return catalog.videos()[index];
}

// Engagement signal: completion ratio clipped to [0, 1] plus bonuses.
inline double engagement_signal(const PlatformConfig& c, const VideoMeta& video,
                                const ActionPrediction& action) {
  const double ratio = std::clamp(action.watch_duration_seconds / video.length_seconds, 0.0, 1.0);
  return ratio + (action.liked ? c.like_bonus : 0.0) + (action.shared ? c.share_bonus : 0.0);
}

inline void submit_feedback(PlatformState& s, const PlatformConfig& c, const Catalog& catalog,
                            const VideoMeta& video, const ActionPrediction& action) {
  if (!s.pending || catalog.videos()[*s.pending].video_id != video.video_id) {
    throw Error(ErrorCode::kFeedbackMismatch,
                "feedback for " + video.video_id + " does not match the pending recommendation");
  }
  const double signal = engagement_signal(c, video, action);
  for (auto& [top, a] : s.affinity) {
    if (top == video.category.top) {
      a = (1.0 - c.eta) * a + c.eta * signal;
    } else {
      a *= 1.0 - c.eta * c.decay_coupling;
    }
  }
  s.pending.reset();
  ++s.interaction_count;
}

// Boundary the audit engine talks to. A real-platform driver implements
// the same two calls; failures must be thrown, never swallowed.
class PlatformAdapter {
 public:
  virtual ~PlatformAdapter() = default;
  virtual VideoMeta recommend() = 0;
  virtual void submit_feedback(const ActionPrediction& action) = 0;
  // Configuration snapshot embedded in audit reports.
  virtual Json describe() const = 0;
};

class SimulatedPlatform final : public PlatformAdapter {
 public:
  SimulatedPlatform(std::shared_ptr<const Catalog> catalog, PlatformConfig config)
      : catalog_(std::move(catalog)), config_(config), state_(fresh_state(*catalog_, config_)) {}

  VideoMeta recommend() override { return personaact::recommend(state_, config_, *catalog_); }

  void submit_feedback(const ActionPrediction& action) override {
    if (!state_.pending) {
      throw Error(ErrorCode::kFeedbackMismatch, "feedback without a pending recommendation");
    }
    personaact::submit_feedback(state_, config_, *catalog_, catalog_->videos()[*state_.pending],
                                action);
  }

  Json describe() const override {
    return Json{{"kind", "simulated"},
                {"catalog_videos", catalog_->size()},
                {"catalog_categories", catalog_->top_categories().size()},
                {"catalog_hash", fnv1a_hex(catalog_to_json(*catalog_).dump())},
                {"config", to_json(config_)}};
  }
  const PlatformState& state() const { return state_; }
  const PlatformConfig& config() const { return config_; }

 private:
  std::shared_ptr<const Catalog> catalog_;
  PlatformConfig config_;
  PlatformState state_;
};

}  // namespace personaact
