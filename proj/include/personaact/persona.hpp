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

#pragma once

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "personaact/features.hpp"
#include "personaact/io.hpp"

namespace personaact {

inline constexpr double kNeutralTrait = 0.5;
inline constexpr std::size_t kPersonaTopCategories = 5;

struct PersonaTraits {
  double emotion_regulation = kNeutralTrait;
  double novelty_tolerance = kNeutralTrait;

  bool operator==(const PersonaTraits&) const = default;
};

// The slice of BehavioralFeatures a persona carries around.
struct BehavioralSnapshot {
  double like_rate = 0.0;
  double comment_rate = 0.0;
  double share_rate = 0.0;
  DurationStats duration_stats;
  std::vector<std::pair<std::string, double>> top_categories;

  bool operator==(const BehavioralSnapshot&) const = default;
};

struct NarrativeSection {
  std::string section_id;
  std::string summary;

  bool operator==(const NarrativeSection&) const = default;
};

struct PersonaProfile {
  std::string persona_id;
  std::string version = "1";
  std::vector<NarrativeSection> narrative;  // outline order
  PersonaTraits traits;
  BehavioralSnapshot behavioral_stats;
  std::string interview_id;
  std::string features_hash;

  bool operator==(const PersonaProfile&) const = default;
};

inline BehavioralSnapshot snapshot_of(const BehavioralFeatures& f) {
  BehavioralSnapshot s;
  s.like_rate = f.like_rate;
  s.comment_rate = f.comment_rate;
  s.share_rate = f.share_rate;
  s.duration_stats = f.duration_stats;
  auto ranked = f.category_distribution.ranked();
  if (ranked.size() > kPersonaTopCategories) ranked.resize(kPersonaTopCategories);
  s.top_categories = std::move(ranked);
  return s;
}

// A persona with neutral traits and no narrative, for pipelines that skip
// the interview.
inline PersonaProfile neutral_persona(const BehavioralFeatures& f) {
  PersonaProfile p;
  p.persona_id = f.persona_id;
  p.behavioral_stats = snapshot_of(f);
  p.features_hash = features_hash(f);
  return p;
}

inline Json persona_to_json(const PersonaProfile& p) {
  Json narrative = Json::array();
  for (const auto& n : p.narrative) {
    narrative.push_back({{"section_id", n.section_id}, {"summary", n.summary}});
  }
  Json top = Json::array();
  for (const auto& [path, share] : p.behavioral_stats.top_categories) {
    top.push_back({{"category", path}, {"share", share}});
  }
  return Json{
      {"schema", kPersonaSchema},
      {"persona_id", p.persona_id},
      {"version", p.version},
      {"narrative", std::move(narrative)},
      {"traits",
       {{"emotion_regulation", p.traits.emotion_regulation},
        {"novelty_tolerance", p.traits.novelty_tolerance}}},
      {"behavioral_stats",
       {{"like_rate", p.behavioral_stats.like_rate},
        {"comment_rate", p.behavioral_stats.comment_rate},
        {"share_rate", p.behavioral_stats.share_rate},
        {"duration_stats", to_json(p.behavioral_stats.duration_stats)},
        {"top_categories", std::move(top)}}},
      {"provenance", {{"interview_id", p.interview_id}, {"features_hash", p.features_hash}}},
  };
}

inline PersonaProfile persona_from_json(const Json& j) {
  if (!j.is_object() || j.value("schema", std::string()) != kPersonaSchema) {
    throw Error(ErrorCode::kSchemaMismatch, "expected a persona document");
  }
  try {
    PersonaProfile p;
    p.persona_id = j.at("persona_id").get<std::string>();
    p.version = j.at("version").get<std::string>();
    for (const auto& n : j.at("narrative")) {
      p.narrative.push_back({n.at("section_id").get<std::string>(),
                             n.at("summary").get<std::string>()});
    }
    const Json& t = j.at("traits");
    p.traits.emotion_regulation = t.at("emotion_regulation").get<double>();
    p.traits.novelty_tolerance = t.at("novelty_tolerance").get<double>();
    const Json& b = j.at("behavioral_stats");
    p.behavioral_stats.like_rate = b.at("like_rate").get<double>();
    p.behavioral_stats.comment_rate = b.at("comment_rate").get<double>();
    p.behavioral_stats.share_rate = b.at("share_rate").get<double>();
    p.behavioral_stats.duration_stats = duration_stats_from_json(b.at("duration_stats"));
    for (const auto& c : b.at("top_categories")) {
      p.behavioral_stats.top_categories.emplace_back(c.at("category").get<std::string>(),
                                                     c.at("share").get<double>());
    }
    const Json& prov = j.at("provenance");
    p.interview_id = prov.at("interview_id").get<std::string>();
    p.features_hash = prov.at("features_hash").get<std::string>();
    if (p.traits.emotion_regulation < 0.0 || p.traits.emotion_regulation > 1.0 ||
        p.traits.novelty_tolerance < 0.0 || p.traits.novelty_tolerance > 1.0) {
      throw Error(ErrorCode::kParseError, "persona traits must lie in [0, 1]");
    }
    return p;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("persona document: ") + e.what());
  }
}

}  // namespace personaact
