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

// Wire format spoken with externally hosted policies.

#pragma once

#include <cmath>
#include <optional>
#include <string_view>

#include "personaact/io.hpp"
#include "personaact/persona.hpp"
#include "personaact/policy.hpp"

namespace personaact {

inline Json observation_to_json(const Observation& obs) {
  return Json{{"video_id", obs.video.video_id},
              {"platform", to_string(obs.video.platform)},
              {"category_top", obs.video.category.top},
              {"category_sub", obs.video.category.sub},
              {"title", obs.video.title},
              {"creator_id", obs.video.creator_id},
              {"video_length_s", obs.video.length_seconds},
              {"descriptors", obs.video.descriptors},
              {"feed_position", obs.feed_position},
              {"local_hour", obs.local_hour}};
}

inline Json policy_request(const PersonaProfile& persona, const Observation& obs) {
  return Json{{"schema", kPolicyWireSchema},
              {"persona", persona_to_json(persona)},
              {"observation", observation_to_json(obs)}};
}

// Strict reply parse: an object holding a finite non-negative
// watch_duration_s and boolean liked / commented / shared.
inline std::optional<ActionPrediction> parse_policy_reply(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error&) {
    return std::nullopt;
  }
  if (!j.is_object()) return std::nullopt;
  auto d = j.find("watch_duration_s");
  auto l = j.find("liked");
  auto c = j.find("commented");
  auto s = j.find("shared");
  if (d == j.end() || l == j.end() || c == j.end() || s == j.end()) return std::nullopt;
  if (!d->is_number() || !l->is_boolean() || !c->is_boolean() || !s->is_boolean()) {
    return std::nullopt;
  }
  const double duration = d->get<double>();
  if (!std::isfinite(duration) || duration < 0.0) return std::nullopt;
  return ActionPrediction{duration, l->get<bool>(), c->get<bool>(), s->get<bool>()};
}

inline Json policy_reply_to_json(const ActionPrediction& a) {
  return Json{{"watch_duration_s", a.watch_duration_seconds},
              {"liked", a.liked},
              {"commented", a.commented},
              {"shared", a.shared}};
}

}  // namespace personaact
