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

#include <gtest/gtest.h>

#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "personaact/features.hpp"
#include "personaact/interview.hpp"
#include "test_support.hpp"

namespace personaact {
namespace {

BehavioralFeatures sample_features() {
  return compute_features(fixtures::dataset_of(fixtures::persona_a_rows()), "A");
}

InterviewOptions fixed_clock(std::int64_t t = 42) {
  InterviewOptions o;
  o.clock = [t] { return t; };
  return o;
}

// One answer per section that covers every required topic.
const std::vector<std::string>& covering_answers() {
  static const std::vector<std::string> kAnswers = {
      "Mostly in the evening, to relax after work.",
      "Comedy, because it is funny.",
      "I follow a few creators I trust.",
      "A strong hook in the first seconds; I skip anything boring.",
      "I like clips that resonate and share them with friends.",
      "I like to explore new things but also enjoy familiar routine stuff.",
  };
  return kAnswers;
}

TEST(OutlineTest, DefaultHasSixSections) {
  const auto o = default_outline();
  ASSERT_EQ(o.sections.size(), 6u);
  EXPECT_EQ(o.sections.front().section_id, "usage_context");
  EXPECT_EQ(o.sections.back().section_id, "exploration_tendencies");
  EXPECT_EQ(o.total_budget(), 18u);
  const auto back = outline_from_json(outline_to_json(o));
  EXPECT_EQ(outline_to_json(back), outline_to_json(o));
}

TEST(OutlineTest, Validation) {
  InterviewOutline empty;
  try {
    validate_outline(empty);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyOutline);
  }
  auto dup = default_outline();
  dup.sections[1].section_id = dup.sections[0].section_id;
  try {
    validate_outline(dup);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidOutline);
  }
  Json j = outline_to_json(default_outline());
  j["sections"][0]["max_questions"] = 0;
  try {
    outline_from_json(j);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidOutline);
  }
}

TEST(OutlineTest, PlainStringTopics) {
  const Json j = {{"schema", kOutlineSchema},
                  {"sections",
                   {{{"section_id", "only"}, {"max_questions", 2}, {"required_topics", {"cats"}}}}}};
  const auto o = outline_from_json(j);
  ASSERT_EQ(o.sections.size(), 1u);
  EXPECT_TRUE(topic_mentioned(o.sections[0].required_topics[0], "I love Cats!"));
  EXPECT_FALSE(topic_mentioned(o.sections[0].required_topics[0], "concatenate"));
}

TEST(InterviewTest, FirstQuestionIsGrounded) {
  auto [st, q] = start_interview(sample_features(), default_outline(), 1, fixed_clock(), "iv-1");
  EXPECT_EQ(q.section_id, "usage_context");
  EXPECT_EQ(q.source, "template");
  EXPECT_FALSE(q.feature_fields.empty());
  EXPECT_EQ(q.asked_at_ms, 42);
  ASSERT_TRUE(st.pending.has_value());
  EXPECT_EQ(*st.pending, q);
  EXPECT_EQ(st.persona_id, "A");
  // No unresolved placeholders.
  EXPECT_EQ(q.text.find('{'), std::string::npos);
}

TEST(InterviewTest, CoveringAnswersWalkEverySection) {
  auto [st, q] = start_interview(sample_features(), default_outline(), 3, fixed_clock());
  const auto& answers = covering_answers();
  for (std::size_t i = 0; i < answers.size(); ++i) {
    EXPECT_EQ(st.current_section().section_id, default_outline().sections[i].section_id);
    const AnswerOutcome out = submit_answer(st, answers[i], fixed_clock());
    if (i + 1 < answers.size()) {
      EXPECT_EQ(out.next, NextAction::kAdvanceSection) << i;
      ASSERT_TRUE(out.question.has_value());
      EXPECT_EQ(out.question->section_id, default_outline().sections[i + 1].section_id);
    } else {
      EXPECT_EQ(out.next, NextAction::kComplete);
      EXPECT_FALSE(out.question.has_value());
    }
  }
  EXPECT_EQ(st.status, InterviewStatus::kFinalized);
  EXPECT_EQ(st.transcript.size(), 6u);
  EXPECT_FALSE(st.pending.has_value());
}

TEST(InterviewTest, UncoveredTopicsUseTheBudget) {
  auto [st, q] = start_interview(sample_features(), default_outline(), 3, fixed_clock());
  EXPECT_EQ(submit_answer(st, "hmm", fixed_clock()).next, NextAction::kAsk);
  EXPECT_EQ(submit_answer(st, "in the evening", fixed_clock()).next, NextAction::kAsk);
  // Third answer hits max_questions regardless of coverage.
  const auto out = submit_answer(st, "not sure", fixed_clock());
  EXPECT_EQ(out.next, NextAction::kAdvanceSection);
  EXPECT_EQ(out.section_id, "content_preferences");
  EXPECT_EQ(st.cursor.questions_asked_in_section, 0u);
  EXPECT_TRUE(st.cursor.covered_topics.empty());
}

TEST(InterviewTest, QuestionsInASectionDiffer) {
  auto [st, q] = start_interview(sample_features(), default_outline(), 5, fixed_clock());
  const auto a = submit_answer(st, "hmm", fixed_clock());
  ASSERT_TRUE(a.question.has_value());
  EXPECT_NE(a.question->text, q.text);
}

TEST(InterviewTest, EmptyAnswerLeavesStateUntouched) {
  auto [st, q] = start_interview(sample_features(), default_outline(), 1, fixed_clock());
  const InterviewState before = st;
  try {
    submit_answer(st, "   \n\t", fixed_clock());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyAnswer);
  }
  EXPECT_EQ(st, before);
}

TEST(InterviewTest, SectionExhaustedAndInactive) {
  auto [st, q] = start_interview(sample_features(), default_outline(), 1, fixed_clock());
  InterviewState spent = st;
  spent.cursor.questions_asked_in_section = 3;
  try {
    generate_question(spent);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSectionExhausted);
  }
  InterviewState nopending = st;
  nopending.pending.reset();
  try {
    submit_answer(nopending, "evening");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNoPendingQuestion);
  }
  abandon_interview(st);
  EXPECT_EQ(st.status, InterviewStatus::kAbandoned);
  try {
    submit_answer(st, "evening");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSessionNotActive);
  }
  try {
    synthesize_persona(st);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSessionNotFinalized);
  }
}

TEST(InterviewTest, DeterministicUnderSeedAndClock) {
  auto run = [](std::uint64_t seed) {
    auto [st, q] = start_interview(sample_features(), default_outline(), seed, fixed_clock());
    for (const char* a : {"hmm", "ok", "sure", "fine"}) submit_answer(st, a, fixed_clock());
    return state_to_json(st).dump();
  };
  EXPECT_EQ(run(9), run(9));
}

TEST(InterviewTest, StateJsonRoundTrip) {
  auto [st, q] = start_interview(sample_features(), default_outline(), 2, fixed_clock(), "iv-7");
  submit_answer(st, "evening, to relax", fixed_clock());
  submit_answer(st, "comedy", fixed_clock());
  const InterviewState back = state_from_json(parse_json(state_to_json(st).dump(), "state"));
  EXPECT_EQ(state_to_json(back).dump(), state_to_json(st).dump());
  EXPECT_EQ(back.transcript, st.transcript);
  EXPECT_EQ(back.pending, st.pending);
  // The restored state carries on exactly like the original.
  InterviewState a = st, b = back;
  submit_answer(a, "because it is funny", fixed_clock());
  submit_answer(b, "because it is funny", fixed_clock());
  EXPECT_EQ(state_to_json(a).dump(), state_to_json(b).dump());
}

TEST(TraitTest, RubricCountsDistinctKeywords) {
  std::vector<TranscriptEntry> t = {
      {"exploration_tendencies", "q", "I explore a lot, always new stuff, new new new", 0},
      {"usage_context", "q", "familiar routine", 0},
  };
  EXPECT_DOUBLE_EQ(score_trait(novelty_rubric(), t), 0.7);
  t.push_back({"exploration_tendencies", "q", "but mostly the usual comfort", 0});
  EXPECT_DOUBLE_EQ(score_trait(novelty_rubric(), t), 0.5);
  std::vector<TranscriptEntry> impulsive = {
      {"attention_mechanisms", "q", "I binge, I can't stop, it's compulsive and I'm restless", 0}};
  EXPECT_NEAR(score_trait(emotion_rubric(), impulsive), 0.1, 1e-12);
  EXPECT_DOUBLE_EQ(score_trait(emotion_rubric(), {}), 0.5);
}

class FixedSummarizer : public Summarizer {
 public:
  std::string summarize(const Json& request) override {
    const std::string id = request.at("section").at("section_id").get<std::string>();
    if (id == "creator_affinity") throw std::runtime_error("down");
    return "summary of " + id;
  }
};

TEST(SynthesisTest, NarrativeTraitsAndProvenance) {
  const auto features = sample_features();
  auto [st, q] = start_interview(features, default_outline(), 3, fixed_clock(), "iv-9");
  for (const auto& a : covering_answers()) submit_answer(st, a, fixed_clock());
  const PersonaProfile p = synthesize_persona(st);
  ASSERT_EQ(p.narrative.size(), 6u);
  EXPECT_EQ(p.narrative[0].section_id, "usage_context");
  EXPECT_NE(p.narrative[0].summary.find("A: Mostly in the evening"), std::string::npos);
  // explore + new raise, familiar + routine lower.
  EXPECT_DOUBLE_EQ(p.traits.novelty_tolerance, 0.5);
  EXPECT_EQ(p.interview_id, "iv-9");
  EXPECT_EQ(p.features_hash, features_hash(features));
  EXPECT_DOUBLE_EQ(p.behavioral_stats.duration_stats.mean, features.duration_stats.mean);

  FixedSummarizer summarizer;
  InterviewOptions opts;
  opts.summarizer = &summarizer;
  const PersonaProfile s = synthesize_persona(st, opts);
  EXPECT_EQ(s.narrative[0].summary, "summary of usage_context");
  // Failed summarizer call keeps the verbatim text.
  EXPECT_EQ(s.narrative[2].summary, p.narrative[2].summary);
}

class ScriptedGenerator : public QuestionGenerator {
 public:
  explicit ScriptedGenerator(bool fail) : fail_(fail) {}
  std::string generate(const Json& request) override {
    if (fail_) throw std::runtime_error("unreachable");
    seen.push_back(request.at("section").at("section_id").get<std::string>());
    return "external question";
  }
  std::vector<std::string> seen;

 private:
  bool fail_;
};

TEST(InterviewTest, ExternalGeneratorAndFallback) {
  ScriptedGenerator ok(false);
  InterviewOptions opts = fixed_clock();
  opts.generator = &ok;
  auto [st, q] = start_interview(sample_features(), default_outline(), 1, opts);
  EXPECT_EQ(q.text, "external question");
  EXPECT_EQ(q.source, "external");
  EXPECT_FALSE(q.fallback);
  EXPECT_EQ(ok.seen, std::vector<std::string>{"usage_context"});

  ScriptedGenerator bad(true);
  opts.generator = &bad;
  auto [st2, q2] = start_interview(sample_features(), default_outline(), 1, opts);
  auto [st3, q3] = start_interview(sample_features(), default_outline(), 1, fixed_clock());
  EXPECT_TRUE(q2.fallback);
  EXPECT_EQ(q2.text, q3.text);
}

}  // namespace
}  // namespace personaact
