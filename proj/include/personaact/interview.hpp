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

// Outline-driven persona interview.
//
// The interview walks the outline section by section. Each question is
// grounded in the behavioral features (top categories, exemplar videos,
// engagement rates) and in which of the section's required topics the user
// has not yet talked about. A section closes when its question budget is
// spent or, after at least one answer, when every required topic has been
// mentioned. Closing the last section finalizes the session; the finalized
// transcript plus the feature snapshot synthesize a PersonaProfile.
//
// Question text comes from a seeded template bank unless an external
// generator is configured, in which case the template is only a fallback.

#pragma once

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "personaact/error.hpp"
#include "personaact/features.hpp"
#include "personaact/io.hpp"
#include "personaact/persona.hpp"
#include "personaact/random.hpp"

namespace personaact {

// ---------------------------------------------------------------------------
// Outline

struct TopicTag {
  std::string tag;
  std::vector<std::string> synonyms;  // empty: the tag itself is the keyword

  bool operator==(const TopicTag&) const = default;
};

struct OutlineSection {
  std::string section_id;
  std::string title;
  std::string goal;
  std::vector<std::string> question_directions;
  std::size_t max_questions = 1;
  std::vector<TopicTag> required_topics;

  bool operator==(const OutlineSection&) const = default;
};

struct InterviewOutline {
  std::vector<OutlineSection> sections;

  std::size_t total_budget() const {
    std::size_t n = 0;
    for (const auto& s : sections) n += s.max_questions;
    return n;
  }

  const OutlineSection* find(std::string_view id) const {
    for (const auto& s : sections) {
      if (s.section_id == id) return &s;
    }
    return nullptr;
  }

  bool operator==(const InterviewOutline&) const = default;
};

inline void validate_outline(const InterviewOutline& outline) {
  if (outline.sections.empty()) {
    throw Error(ErrorCode::kEmptyOutline, "interview outline has no sections");
  }
  std::set<std::string> ids;
  for (const auto& s : outline.sections) {
    if (s.section_id.empty()) throw Error(ErrorCode::kInvalidOutline, "empty section_id");
    if (!ids.insert(s.section_id).second) {
      throw Error(ErrorCode::kInvalidOutline, "duplicate section_id " + s.section_id);
    }
    if (s.max_questions < 1) {
      throw Error(ErrorCode::kInvalidOutline, "max_questions must be >= 1 in " + s.section_id);
    }
  }
}

inline InterviewOutline default_outline() {
  InterviewOutline o;
  o.sections = {
      {"usage_context",
       "Usage context",
       "Understand when, where and why the user opens short-video apps.",
       {"typical times of day and settings", "what starts and ends a session"},
       3,
       {{"timing", {"morning", "afternoon", "evening", "night", "bedtime", "before bed",
                    "lunch", "commute", "weekend", "break"}},
        {"purpose", {"relax", "unwind", "kill time", "bored", "boredom", "learn",
                     "entertainment", "fun", "procrastinate"}}}},
      {"content_preferences",
       "Content preferences",
       "Explain the categories the user gravitates to and what they get from them.",
       {"favorite categories and why", "categories the user avoids"},
       3,
       {{"genres", {"comedy", "music", "game", "games", "gaming", "news", "science",
                    "knowledge", "food", "sports", "travel", "anime", "vlog", "lifestyle",
                    "animation", "dance"}},
        {"reasons", {"because", "funny", "interesting", "useful", "enjoy", "relaxing",
                     "informative", "laugh"}}}},
      {"creator_affinity",
       "Creator affinity",
       "Learn whether the user follows specific creators or lets the feed decide.",
       {"followed creators", "trust in unknown creators"},
       3,
       {{"creator_loyalty", {"follow", "following", "subscribe", "subscribed", "creator",
                             "creators", "uploader", "channel", "favorite"}}}},
      {"attention_mechanisms",
       "Attention mechanisms",
       "Find out what keeps the user watching and what makes them swipe away.",
       {"what hooks attention in the first seconds", "what triggers a skip"},
       3,
       {{"hook", {"first seconds", "opening", "thumbnail", "title", "hook", "music",
                  "visual", "visuals", "beginning", "story"}},
        {"skip_trigger", {"boring", "skip", "swipe", "slow", "ads", "ad", "clickbait",
                          "repetitive", "long"}}}},
      {"engagement_logic",
       "Engagement logic",
       "Understand when the user likes, comments on, or shares a video.",
       {"what earns a like", "when a video is worth sharing or commenting"},
       3,
       {{"like_trigger", {"like", "likes", "liked", "resonate", "agree", "impressed",
                          "support", "appreciate"}},
        {"share_trigger", {"share", "shared", "send", "friends", "friend", "family",
                           "comment", "comments"}}}},
      {"exploration_tendencies",
       "Exploration tendencies",
       "Gauge how open the user is to unfamiliar content.",
       {"reaction to unfamiliar categories", "deliberate searching for new content"},
       3,
       {{"novelty", {"new", "explore", "exploring", "variety", "different", "discover",
                     "unfamiliar", "try", "curious"}},
        {"routine", {"familiar", "same", "usual", "routine", "comfort", "habit",
                     "stick", "predictable"}}}},
  };
  return o;
}

inline Json outline_to_json(const InterviewOutline& o) {
  Json sections = Json::array();
  for (const auto& s : o.sections) {
    Json topics = Json::array();
    for (const auto& t : s.required_topics) {
      topics.push_back({{"tag", t.tag}, {"synonyms", t.synonyms}});
    }
    sections.push_back({{"section_id", s.section_id},
                        {"title", s.title},
                        {"goal", s.goal},
                        {"question_directions", s.question_directions},
                        {"max_questions", s.max_questions},
                        {"required_topics", std::move(topics)}});
  }
  return Json{{"schema", kOutlineSchema}, {"sections", std::move(sections)}};
}

// Accepts topics either as {"tag", "synonyms"} objects or as bare strings.
inline InterviewOutline outline_from_json(const Json& j) {
  if (!j.is_object() || j.value("schema", std::string()) != kOutlineSchema) {
    throw Error(ErrorCode::kSchemaMismatch, "expected an outline document");
  }
  InterviewOutline o;
  try {
    for (const auto& s : j.at("sections")) {
      OutlineSection sec;
      sec.section_id = s.at("section_id").get<std::string>();
      sec.title = s.value("title", sec.section_id);
      sec.goal = s.value("goal", std::string());
      sec.question_directions =
          s.value("question_directions", std::vector<std::string>{});
      const Json& mq = s.at("max_questions");
      if (!mq.is_number_integer() || mq.get<long long>() < 1) {
        throw Error(ErrorCode::kInvalidOutline, "max_questions must be >= 1");
      }
      sec.max_questions = mq.get<std::size_t>();
      for (const auto& t : s.value("required_topics", Json::array())) {
        if (t.is_string()) {
          sec.required_topics.push_back({t.get<std::string>(), {}});
        } else {
          sec.required_topics.push_back(
              {t.at("tag").get<std::string>(),
               t.value("synonyms", std::vector<std::string>{})});
        }
      }
      o.sections.push_back(std::move(sec));
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kInvalidOutline, std::string("outline document: ") + e.what());
  }
  validate_outline(o);
  return o;
}

// ---------------------------------------------------------------------------
// Keyword matching

namespace detail {

// Lowercase, every non-alphanumeric byte becomes a space, runs collapsed,
// padded with one space on each side so " word " lookups respect word
// boundaries. Non-ASCII bytes are kept so CJK answers still match CJK
// synonyms.
inline std::string normalize_words(std::string_view text) {
  std::string out = " ";
  for (unsigned char c : text) {
    const bool keep = std::isalnum(c) || c >= 0x80;
    if (keep) {
      out += static_cast<char>(std::tolower(c));
    } else if (out.back() != ' ') {
      out += ' ';
    }
  }
  if (out.back() != ' ') out += ' ';
  return out;
}

inline bool contains_keyword(const std::string& normalized_text, std::string_view keyword) {
  const std::string needle = normalize_words(keyword);
  if (needle == " ") return false;
  return normalized_text.find(needle) != std::string::npos;
}

inline bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

}  // namespace detail

inline bool topic_mentioned(const TopicTag& topic, std::string_view answer) {
  const std::string text = detail::normalize_words(answer);
  if (topic.synonyms.empty()) return detail::contains_keyword(text, topic.tag);
  return std::any_of(topic.synonyms.begin(), topic.synonyms.end(),
                     [&](const std::string& s) { return detail::contains_keyword(text, s); });
}

// ---------------------------------------------------------------------------
// Session state

struct TranscriptEntry {
  std::string section_id;
  std::string question_text;
  std::string answer_text;
  std::int64_t asked_at_ms = 0;

  bool operator==(const TranscriptEntry&) const = default;
};

struct GroundedQuestion {
  std::string text;
  std::string section_id;
  std::vector<std::string> feature_fields;  // features the question cites
  std::vector<std::string> video_ids;       // exemplar videos it cites
  std::string source = "template";          // "template" | "external"
  bool fallback = false;                    // external generator failed
  std::int64_t asked_at_ms = 0;

  bool operator==(const GroundedQuestion&) const = default;
};

struct InterviewCursor {
  std::size_t section_index = 0;
  std::size_t questions_asked_in_section = 0;
  std::set<std::string> covered_topics;

  bool operator==(const InterviewCursor&) const = default;
};

enum class InterviewStatus { kActive, kFinalized, kAbandoned };

inline std::string_view to_string(InterviewStatus s) {
  switch (s) {
    case InterviewStatus::kActive: return "active";
    case InterviewStatus::kFinalized: return "finalized";
    case InterviewStatus::kAbandoned: return "abandoned";
  }
  return "active";
}

struct InterviewState {
  std::string interview_id;
  std::string persona_id;
  std::uint64_t seed = 0;
  BehavioralFeatures features;
  InterviewOutline outline;
  std::vector<TranscriptEntry> transcript;
  InterviewCursor cursor;
  InterviewStatus status = InterviewStatus::kActive;
  std::optional<GroundedQuestion> pending;

  const OutlineSection& current_section() const {
    return outline.sections.at(cursor.section_index);
  }

  bool operator==(const InterviewState&) const = default;
};

enum class NextAction { kAsk, kAdvanceSection, kComplete };

inline std::string_view to_string(NextAction a) {
  switch (a) {
    case NextAction::kAsk: return "ask";
    case NextAction::kAdvanceSection: return "advance_section";
    case NextAction::kComplete: return "complete";
  }
  return "ask";
}

struct AnswerOutcome {
  NextAction next = NextAction::kAsk;
  std::optional<GroundedQuestion> question;
  std::optional<std::string> section_id;
};

// Pluggable text services. Implementations throw on any failure; callers
// fall back to the deterministic path.
class QuestionGenerator {
 public:
  virtual ~QuestionGenerator() = default;
  // request: {features_summary, transcript, section}
  virtual std::string generate(const Json& request) = 0;
};

class Summarizer {
 public:
  virtual ~Summarizer() = default;
  // request: {section, entries}
  virtual std::string summarize(const Json& request) = 0;
};

struct InterviewOptions {
  QuestionGenerator* generator = nullptr;
  Summarizer* summarizer = nullptr;
  // Timestamp source for asked_at; wall clock when empty.
  std::function<std::int64_t()> clock;

  std::int64_t now() const {
    if (clock) return clock();
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
  }
};

// ---------------------------------------------------------------------------
// Template question bank

namespace detail {

struct QuestionTemplate {
  std::string_view section_id;  // empty: usable in any section
  std::string_view text;
};

// Every content_preferences template names the top category.
inline const std::vector<QuestionTemplate>& template_bank() {
  static const std::vector<QuestionTemplate> kBank = {
      {"usage_context",
       "Your viewing history peaks around {peak_hour}:00. When and where do you usually "
       "open short-video apps?"},
      {"usage_context",
       "A typical watch of yours lasts about {median_duration} seconds. What usually "
       "starts a browsing session for you, and what ends it?"},
      {"usage_context",
       "Thinking about {topic}: how would you describe your usual short-video routine?"},
      {"content_preferences",
       "{top_category} makes up {top_share} of what you watched. What draws you to it?"},
      {"content_preferences",
       "You watch a lot of {top_category} ({top_share}), followed by {second_category}. "
       "How do these fit together for you?"},
      {"content_preferences",
       "{top_category} is your most-watched category at {top_share}. Regarding {topic}, "
       "what matters most to you in these videos?"},
      {"creator_affinity",
       "You watched videos from {top_creator} {top_creator_count} times. Do you follow "
       "particular creators, or does the feed decide for you?"},
      {"creator_affinity",
       "How much does knowing who made a {top_category} video affect whether you keep "
       "watching it?"},
      {"creator_affinity",
       "Thinking about {topic}: how do you feel about creators you have never seen before?"},
      {"attention_mechanisms",
       "You stayed with a {long_category} video ({long_video}) for {long_duration} seconds, "
       "about {long_ratio} of its length. What held your attention?"},
      {"attention_mechanisms",
       "You swiped away from a {skip_category} video ({skip_video}) after {skip_duration} "
       "seconds. What made you move on?"},
      {"attention_mechanisms",
       "Regarding {topic}: what in the first seconds of a video decides whether you stay?"},
      {"engagement_logic",
       "You like about {like_rate_pct} of the videos you watch, which is {like_rate_band}. "
       "What makes a video worth a like?"},
      {"engagement_logic",
       "You liked a {liked_category} video ({liked_video}). What made you react to that one?"},
      {"engagement_logic",
       "Regarding {topic}: when do you comment on or share a video, and when do you hold "
       "back?"},
      {"exploration_tendencies",
       "Most of your viewing sits in {top_category}. How often do you deliberately look "
       "for something new?"},
      {"exploration_tendencies",
       "When the feed shows you a category you rarely watch, do you give it a chance or "
       "move on?"},
      {"exploration_tendencies",
       "Thinking about {topic}: would you rather see more of the same or be surprised?"},
      // Generic fallbacks for custom outline sections.
      {"", "{section_title}: {direction}. Could you tell me about that?"},
      {"", "{section_title}: {section_goal} Regarding {topic}, what comes to mind?"},
  };
  return kBank;
}

struct Slot {
  std::string value;
  std::vector<std::string> fields;
  std::vector<std::string> videos;
};

inline std::string format_number(double x, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, x);
  return buf;
}

inline std::string percent(double share) {
  // 0.175 -> "17.5%", 0.2 -> "20%"
  std::string s = format_number(share * 100.0, 1);
  if (s.size() > 2 && s.compare(s.size() - 2, 2, ".0") == 0) s.resize(s.size() - 2);
  return s + "%";
}

inline std::string rate_band(double rate) {
  if (rate <= 0.0) return "never";
  if (rate < 0.05) return "rarely";
  if (rate < 0.15) return "occasionally";
  if (rate < 0.35) return "fairly often";
  return "very often";
}

inline std::map<std::string, Slot> feature_slots(const BehavioralFeatures& f) {
  std::map<std::string, Slot> slots;
  const auto ranked = f.category_distribution.ranked();
  if (!ranked.empty()) {
    slots["top_category"] = {ranked[0].first, {"category_distribution"}, {}};
    slots["top_share"] = {percent(ranked[0].second), {"category_distribution"}, {}};
  }
  if (ranked.size() > 1) {
    slots["second_category"] = {ranked[1].first, {"category_distribution"}, {}};
  }
  if (!f.creator_frequency.empty()) {
    auto best = f.creator_frequency.begin();
    for (auto it = f.creator_frequency.begin(); it != f.creator_frequency.end(); ++it) {
      if (it->second > best->second) best = it;
    }
    slots["top_creator"] = {best->first, {"creator_frequency"}, {}};
    slots["top_creator_count"] = {std::to_string(best->second), {"creator_frequency"}, {}};
  }
  if (f.total_samples > 0) {
    std::size_t peak = 0;
    for (std::size_t h = 1; h < 24; ++h) {
      if (f.temporal_histogram[h] > f.temporal_histogram[peak]) peak = h;
    }
    slots["peak_hour"] = {std::to_string(peak), {"temporal_histogram"}, {}};
    slots["median_duration"] = {format_number(f.duration_stats.median, 1), {"duration_stats"}, {}};
    slots["like_rate_pct"] = {percent(f.like_rate), {"like_rate"}, {}};
    slots["like_rate_band"] = {rate_band(f.like_rate), {"like_rate"}, {}};
  }
  if (!f.exemplars.long_watched.empty()) {
    const auto& e = f.exemplars.long_watched.front();
    const std::vector<std::string> field{"exemplars.long_watched"};
    slots["long_category"] = {e.category, field, {e.video_id}};
    slots["long_video"] = {e.video_id, field, {e.video_id}};
    slots["long_duration"] = {format_number(e.watch_duration_seconds, 1), field, {e.video_id}};
    slots["long_ratio"] = {percent(e.completion_ratio), field, {e.video_id}};
  }
  if (!f.exemplars.quick_skipped.empty()) {
    const auto& e = f.exemplars.quick_skipped.front();
    const std::vector<std::string> field{"exemplars.quick_skipped"};
    slots["skip_category"] = {e.category, field, {e.video_id}};
    slots["skip_video"] = {e.video_id, field, {e.video_id}};
    slots["skip_duration"] = {format_number(e.watch_duration_seconds, 1), field, {e.video_id}};
  }
  if (!f.exemplars.liked.empty()) {
    const auto& e = f.exemplars.liked.front();
    const std::vector<std::string> field{"exemplars.liked"};
    slots["liked_category"] = {e.category, field, {e.video_id}};
    slots["liked_video"] = {e.video_id, field, {e.video_id}};
  }
  return slots;
}

inline std::vector<std::string> placeholders(std::string_view text) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while ((pos = text.find('{', pos)) != std::string_view::npos) {
    const std::size_t end = text.find('}', pos);
    if (end == std::string_view::npos) break;
    out.emplace_back(text.substr(pos + 1, end - pos - 1));
    pos = end + 1;
  }
  return out;
}

inline bool section_exhausted(const InterviewState& st) {
  const OutlineSection& sec = st.current_section();
  const std::size_t asked = st.cursor.questions_asked_in_section;
  if (asked >= sec.max_questions) return true;
  if (asked == 0) return false;
  return std::all_of(sec.required_topics.begin(), sec.required_topics.end(),
                     [&](const TopicTag& t) { return st.cursor.covered_topics.contains(t.tag); });
}

inline GroundedQuestion template_question(const InterviewState& st) {
  const OutlineSection& sec = st.current_section();
  auto slots = feature_slots(st.features);
  slots["section_title"] = {sec.title, {}, {}};
  slots["section_goal"] = {sec.goal, {}, {}};
  for (const auto& t : sec.required_topics) {
    if (!st.cursor.covered_topics.contains(t.tag)) {
      slots["topic"] = {t.tag, {}, {}};
      break;
    }
  }
  if (!sec.question_directions.empty()) {
    slots["direction"] = {
        sec.question_directions[st.cursor.questions_asked_in_section %
                                sec.question_directions.size()],
        {},
        {}};
  }

  const auto& bank = template_bank();
  bool has_specific = std::any_of(bank.begin(), bank.end(), [&](const QuestionTemplate& t) {
    return t.section_id == sec.section_id;
  });
  std::vector<const QuestionTemplate*> eligible;
  for (const auto& t : bank) {
    if (has_specific ? t.section_id != sec.section_id : !t.section_id.empty()) continue;
    const auto keys = placeholders(t.text);
    if (std::all_of(keys.begin(), keys.end(), [&](const std::string& k) { return slots.contains(k); })) {
      eligible.push_back(&t);
    }
  }

  auto render = [&](const QuestionTemplate& t) {
    GroundedQuestion q;
    q.section_id = sec.section_id;
    std::string text(t.text);
    for (const auto& key : placeholders(t.text)) {
      const Slot& slot = slots.at(key);
      const std::string token = "{" + key + "}";
      for (std::size_t p = text.find(token); p != std::string::npos; p = text.find(token, p)) {
        text.replace(p, token.size(), slot.value);
        p += slot.value.size();
      }
      for (const auto& f : slot.fields) {
        if (std::find(q.feature_fields.begin(), q.feature_fields.end(), f) == q.feature_fields.end()) {
          q.feature_fields.push_back(f);
        }
      }
      for (const auto& v : slot.videos) {
        if (std::find(q.video_ids.begin(), q.video_ids.end(), v) == q.video_ids.end()) {
          q.video_ids.push_back(v);
        }
      }
    }
    q.text = std::move(text);
    return q;
  };

  if (eligible.empty()) {
    GroundedQuestion q;
    q.section_id = sec.section_id;
    q.text = sec.title + ": " + (sec.goal.empty() ? std::string("could you tell me more?") : sec.goal);
    return q;
  }

  // Prefer templates whose text has not been asked yet in this interview.
  std::vector<GroundedQuestion> fresh;
  std::vector<GroundedQuestion> all;
  for (const auto* t : eligible) {
    GroundedQuestion q = render(*t);
    const bool asked = std::any_of(st.transcript.begin(), st.transcript.end(),
                                   [&](const TranscriptEntry& e) { return e.question_text == q.text; });
    if (!asked) fresh.push_back(q);
    all.push_back(std::move(q));
  }
  const auto& pool = fresh.empty() ? all : fresh;
  // One independent draw per question ordinal keeps choices stable under
  // replay and across service restarts.
  Rng rng(derive_seed(st.seed, st.transcript.size()));
  return pool[rng.uniform_index(pool.size())];
}

inline Json transcript_to_json(const std::vector<TranscriptEntry>& t) {
  Json a = Json::array();
  for (const auto& e : t) {
    a.push_back({{"section_id", e.section_id},
                 {"question_text", e.question_text},
                 {"answer_text", e.answer_text},
                 {"asked_at_ms", e.asked_at_ms}});
  }
  return a;
}

inline Json features_summary(const BehavioralFeatures& f) {
  const BehavioralSnapshot s = snapshot_of(f);
  Json top = Json::array();
  for (const auto& [path, share] : s.top_categories) top.push_back({{"category", path}, {"share", share}});
  return Json{{"persona_id", f.persona_id},
              {"like_rate", s.like_rate},
              {"comment_rate", s.comment_rate},
              {"share_rate", s.share_rate},
              {"duration_stats", to_json(s.duration_stats)},
              {"top_categories", std::move(top)}};
}

inline Json section_json(const OutlineSection& s) {
  return Json{{"section_id", s.section_id},
              {"title", s.title},
              {"goal", s.goal},
              {"question_directions", s.question_directions}};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Operations

inline GroundedQuestion generate_question(const InterviewState& st,
                                          const InterviewOptions& options = {}) {
  if (st.status != InterviewStatus::kActive) {
    throw Error(ErrorCode::kSessionNotActive, "interview is not active");
  }
  if (detail::section_exhausted(st)) {
    throw Error(ErrorCode::kSectionExhausted,
                "section " + st.current_section().section_id + " has no remaining questions");
  }
  GroundedQuestion q = detail::template_question(st);
  if (options.generator != nullptr) {
    Json request{{"features_summary", detail::features_summary(st.features)},
                 {"transcript", detail::transcript_to_json(st.transcript)},
                 {"section", detail::section_json(st.current_section())}};
    try {
      std::string text = options.generator->generate(request);
      if (detail::is_blank(text)) throw std::runtime_error("blank question");
      q.text = std::move(text);
      q.source = "external";
      q.feature_fields = {"category_distribution", "like_rate", "comment_rate", "share_rate",
                          "duration_stats"};
      q.video_ids.clear();
    } catch (const std::exception&) {
      q.fallback = true;
    }
  }
  q.asked_at_ms = options.now();
  return q;
}

inline std::pair<InterviewState, GroundedQuestion> start_interview(
    const BehavioralFeatures& features, const InterviewOutline& outline, std::uint64_t seed,
    const InterviewOptions& options = {}, std::string interview_id = {}) {
  validate_outline(outline);
  InterviewState st;
  st.interview_id = std::move(interview_id);
  st.persona_id = features.persona_id;
  st.seed = seed;
  st.features = features;
  st.outline = outline;
  GroundedQuestion q = generate_question(st, options);
  st.pending = q;
  return {std::move(st), std::move(q)};
}

// Records the answer to the pending question and moves the cursor. On any
// error the state is left untouched.
inline AnswerOutcome submit_answer(InterviewState& st, std::string_view answer,
                                   const InterviewOptions& options = {}) {
  if (st.status != InterviewStatus::kActive) {
    throw Error(ErrorCode::kSessionNotActive, "interview is not active");
  }
  if (!st.pending) throw Error(ErrorCode::kNoPendingQuestion, "no question is pending");
  if (detail::is_blank(answer)) throw Error(ErrorCode::kEmptyAnswer, "answer is empty");

  InterviewState next = st;
  const OutlineSection& sec = next.current_section();
  next.transcript.push_back({sec.section_id, next.pending->text, std::string(answer),
                             next.pending->asked_at_ms});
  next.pending.reset();
  ++next.cursor.questions_asked_in_section;
  for (const auto& t : sec.required_topics) {
    if (topic_mentioned(t, answer)) next.cursor.covered_topics.insert(t.tag);
  }

  AnswerOutcome out;
  if (!detail::section_exhausted(next)) {
    GroundedQuestion q = generate_question(next, options);
    next.pending = q;
    out.next = NextAction::kAsk;
    out.question = std::move(q);
    out.section_id = sec.section_id;
  } else if (next.cursor.section_index + 1 < next.outline.sections.size()) {
    ++next.cursor.section_index;
    next.cursor.questions_asked_in_section = 0;
    next.cursor.covered_topics.clear();
    GroundedQuestion q = generate_question(next, options);
    next.pending = q;
    out.next = NextAction::kAdvanceSection;
    out.question = std::move(q);
    out.section_id = next.current_section().section_id;
  } else {
    next.status = InterviewStatus::kFinalized;
    out.next = NextAction::kComplete;
  }
  st = std::move(next);
  return out;
}

inline void abandon_interview(InterviewState& st) {
  if (st.status != InterviewStatus::kActive) {
    throw Error(ErrorCode::kSessionNotActive, "interview is not active");
  }
  st.status = InterviewStatus::kAbandoned;
  st.pending.reset();
}

// ---------------------------------------------------------------------------
// Persona synthesis

struct TraitRubric {
  std::string section_id;
  std::vector<std::string> raise;
  std::vector<std::string> lower;
};

inline const TraitRubric& novelty_rubric() {
  static const TraitRubric kRubric{
      "exploration_tendencies",
      {"explore", "exploring", "new", "variety", "novel", "different", "discover",
       "unfamiliar", "curious", "surprise"},
      {"comfort", "comfortable", "familiar", "same", "usual", "routine", "habit",
       "predictable"}};
  return kRubric;
}

inline const TraitRubric& emotion_rubric() {
  static const TraitRubric kRubric{
      "attention_mechanisms",
      {"calm", "patient", "deliberate", "mindful", "in control", "relaxed", "moderate",
       "stop when"},
      {"impulse", "impulsive", "binge", "can't stop", "cannot stop", "addicted",
       "compulsive", "restless", "anxious"}};
  return kRubric;
}

inline constexpr double kTraitStep = 0.1;

// 0.5 plus one step per distinct raising keyword found in the section's
// answers, minus one step per distinct lowering keyword, clamped to [0, 1].
inline double score_trait(const TraitRubric& rubric, const std::vector<TranscriptEntry>& transcript) {
  std::string text;
  for (const auto& e : transcript) {
    if (e.section_id == rubric.section_id) text += " " + e.answer_text;
  }
  const std::string norm = detail::normalize_words(text);
  int raise = 0;
  int lower = 0;
  for (const auto& k : rubric.raise) raise += detail::contains_keyword(norm, k) ? 1 : 0;
  for (const auto& k : rubric.lower) lower += detail::contains_keyword(norm, k) ? 1 : 0;
  return std::clamp(kNeutralTrait + kTraitStep * (raise - lower), 0.0, 1.0);
}

inline std::string verbatim_section(const std::vector<TranscriptEntry>& transcript,
                                    const std::string& section_id) {
  std::string out;
  for (const auto& e : transcript) {
    if (e.section_id != section_id) continue;
    if (!out.empty()) out += "\n";
    out += "Q: " + e.question_text + "\nA: " + e.answer_text;
  }
  return out;
}

inline PersonaProfile synthesize_persona(const InterviewState& st,
                                         const InterviewOptions& options = {}) {
  if (st.status != InterviewStatus::kFinalized) {
    throw Error(ErrorCode::kSessionNotFinalized, "interview has not been completed");
  }
  PersonaProfile p;
  p.persona_id = st.persona_id;
  p.interview_id = st.interview_id;
  p.features_hash = features_hash(st.features);
  p.behavioral_stats = snapshot_of(st.features);
  for (const auto& sec : st.outline.sections) {
    std::string summary = verbatim_section(st.transcript, sec.section_id);
    if (options.summarizer != nullptr) {
      std::vector<TranscriptEntry> entries;
      for (const auto& e : st.transcript) {
        if (e.section_id == sec.section_id) entries.push_back(e);
      }
      try {
        std::string s = options.summarizer->summarize(
            Json{{"section", detail::section_json(sec)},
                 {"entries", detail::transcript_to_json(entries)}});
        if (!detail::is_blank(s)) summary = std::move(s);
      } catch (const std::exception&) {
        // verbatim summary stays
      }
    }
    p.narrative.push_back({sec.section_id, std::move(summary)});
  }
  p.traits.novelty_tolerance = score_trait(novelty_rubric(), st.transcript);
  p.traits.emotion_regulation = score_trait(emotion_rubric(), st.transcript);
  return p;
}

// ---------------------------------------------------------------------------
// Persistence

inline Json question_to_json(const GroundedQuestion& q) {
  return Json{{"text", q.text},
              {"section_id", q.section_id},
              {"grounding", {{"feature_fields", q.feature_fields},
                             {"video_ids", q.video_ids},
                             {"source", q.source},
                             {"fallback", q.fallback}}},
              {"asked_at_ms", q.asked_at_ms}};
}

inline GroundedQuestion question_from_json(const Json& j) {
  GroundedQuestion q;
  q.text = j.at("text").get<std::string>();
  q.section_id = j.at("section_id").get<std::string>();
  const Json& g = j.at("grounding");
  q.feature_fields = g.at("feature_fields").get<std::vector<std::string>>();
  q.video_ids = g.at("video_ids").get<std::vector<std::string>>();
  q.source = g.at("source").get<std::string>();
  q.fallback = g.at("fallback").get<bool>();
  q.asked_at_ms = j.at("asked_at_ms").get<std::int64_t>();
  return q;
}

inline Json state_to_json(const InterviewState& st) {
  return Json{
      {"schema", kInterviewStateSchema},
      {"interview_id", st.interview_id},
      {"persona_id", st.persona_id},
      {"seed", st.seed},
      {"status", to_string(st.status)},
      {"features", features_to_json(st.features)},
      {"outline", outline_to_json(st.outline)},
      {"transcript", detail::transcript_to_json(st.transcript)},
      {"cursor",
       {{"section_index", st.cursor.section_index},
        {"section_id", st.outline.sections.at(st.cursor.section_index).section_id},
        {"questions_asked_in_section", st.cursor.questions_asked_in_section},
        {"covered_topics", st.cursor.covered_topics}}},
      {"pending_question", st.pending ? question_to_json(*st.pending) : Json(nullptr)},
  };
}

inline InterviewState state_from_json(const Json& j) {
  if (!j.is_object() || j.value("schema", std::string()) != kInterviewStateSchema) {
    throw Error(ErrorCode::kSchemaMismatch, "expected an interview state document");
  }
  try {
    InterviewState st;
    st.interview_id = j.at("interview_id").get<std::string>();
    st.persona_id = j.at("persona_id").get<std::string>();
    st.seed = j.at("seed").get<std::uint64_t>();
    const std::string status = j.at("status").get<std::string>();
    st.status = status == "finalized" ? InterviewStatus::kFinalized
                : status == "abandoned" ? InterviewStatus::kAbandoned
                                        : InterviewStatus::kActive;
    st.features = features_from_json(j.at("features"));
    st.outline = outline_from_json(j.at("outline"));
    for (const auto& e : j.at("transcript")) {
      st.transcript.push_back({e.at("section_id").get<std::string>(),
                               e.at("question_text").get<std::string>(),
                               e.at("answer_text").get<std::string>(),
                               e.at("asked_at_ms").get<std::int64_t>()});
    }
    const Json& c = j.at("cursor");
    st.cursor.section_index = c.at("section_index").get<std::size_t>();
    st.cursor.questions_asked_in_section = c.at("questions_asked_in_section").get<std::size_t>();
    st.cursor.covered_topics = c.at("covered_topics").get<std::set<std::string>>();
    if (st.cursor.section_index >= st.outline.sections.size()) {
      throw Error(ErrorCode::kParseError, "cursor outside the outline");
    }
    if (const Json& pq = j.at("pending_question"); !pq.is_null()) st.pending = question_from_json(pq);
    return st;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("interview state: ") + e.what());
  }
}

}  // namespace personaact
