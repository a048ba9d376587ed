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

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "personaact/distribution.hpp"
#include "personaact/features.hpp"
#include "personaact/persona.hpp"
#include "personaact/trace.hpp"
#include "test_support.hpp"

namespace personaact {
namespace {

using fixtures::Row;

std::vector<Row> three_session_rows() {
  std::vector<Row> rows;
  auto add = [&](std::string s, std::int64_t ts, std::string v, std::string top, double len,
                 double watch, bool liked) {
    Row r;
    r.session_id = std::move(s);
    r.persona_id = "p1";
    r.timestamp_ms = ts;
    r.video_id = std::move(v);
    r.top = std::move(top);
    r.length_s = len;
    r.watch_s = watch;
    r.liked = liked;
    rows.push_back(r);
  };
  add("s2", 2'000'000, "v4", "Music", 100.0, 50.0, true);
  add("s1", 1'000'000, "v1", "Entertainment", 10.0, 10.0, false);
  add("s1", 1'005'000, "v2", "Entertainment", 20.0, 2.0, false);
  add("s3", 3'000'000, "v5", "Knowledge", 40.0, 4.0, false);
  add("s1", 1'002'000, "v3", "Life", 30.0, 15.0, true);
  add("s3", 3'001'000, "v6", "Knowledge", 40.0, 40.0, false);
  return rows;
}

TEST(TraceTest, IngestGroupsAndOrdersSessions) {
  auto rows = three_session_rows();
  Row bad = rows[0];
  bad.session_id = "s9";
  bad.watch_s = 0.2;
  rows.push_back(bad);
  std::string text = fixtures::trace_text(rows);
  text += "{not json\n";
  const Dataset ds = parse_traces(text);
  ASSERT_EQ(ds.sessions.size(), 3u);
  EXPECT_EQ(ds.sessions[0].session_id, "s1");
  EXPECT_EQ(ds.sessions[2].session_id, "s3");
  ASSERT_EQ(ds.sessions[0].records.size(), 3u);
  EXPECT_EQ(ds.sessions[0].records[1].video.video_id, "v3");
  EXPECT_EQ(ds.record_count(), 6u);
  ASSERT_EQ(ds.rejections.size(), 2u);
  EXPECT_EQ(ds.rejections[0].line, 8u);
  EXPECT_EQ(ds.rejections[0].reason, "below duration floor");
  EXPECT_EQ(ds.rejections[1].reason, "malformed record");
  EXPECT_EQ(ds.count_in(Split::kTrain), 3u);
}

TEST(TraceTest, EmptyAndMismatchedFilesFail) {
  try {
    parse_traces("");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyDataset);
  }
  try {
    parse_traces("{\"schema\":\"other/9\"}\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSchemaMismatch);
  }
  try {
    parse_traces(fixtures::trace_text({}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyDataset);
  }
  try {
    ingest_traces("/nonexistent/traces.jsonl");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kFileNotFound);
  }
}

TEST(TraceTest, CategoryPathParsing) {
  auto p = CategoryPath::parse("Knowledge/Science/Physics");
  ASSERT_TRUE(p.has_value());
  EXPECT_EQ(p->top, "Knowledge");
  EXPECT_EQ(p->sub, "Science/Physics");
  EXPECT_FALSE(CategoryPath::parse("Knowledge").has_value());
  EXPECT_FALSE(CategoryPath::parse("/Science").has_value());
  EXPECT_FALSE(CategoryPath::parse("A//B").has_value());
}

TEST(TraceTest, SerializeRoundTrip) {
  auto rows = three_session_rows();
  rows[0].timestamp_ms = 2'000'000;
  const Dataset ds = fixtures::dataset_of(rows);
  const Dataset again = parse_traces(serialize_traces(ds));
  EXPECT_EQ(ds, again);
  EXPECT_EQ(serialize_traces(ds), serialize_traces(again));
}

TEST(TraceTest, UtcOffsetIsPerSession) {
  auto rows = three_session_rows();
  std::string text = fixtures::trace_text(rows);
  Json extra = fixtures::row_json(rows[1]);
  extra["utc_offset_minutes"] = 0;
  text += extra.dump() + "\n";
  const Dataset ds = parse_traces(text);
  ASSERT_EQ(ds.rejections.size(), 1u);
  EXPECT_EQ(ds.rejections[0].reason, "utc_offset_minutes differs within session");
}

TEST(SplitTest, WorkedCounts) {
  struct Case {
    std::size_t n, train, val, test;
  };
  for (const Case c : {Case{10, 8, 1, 1}, Case{1, 1, 0, 0}, Case{19, 15, 2, 2},
                       Case{20, 16, 2, 2}, Case{5, 4, 0, 1}}) {
    const Dataset ds = split_sessions(fixtures::dataset_of(fixtures::daily_sessions("p", c.n)));
    EXPECT_EQ(ds.count_in(Split::kTrain), c.train) << c.n;
    EXPECT_EQ(ds.count_in(Split::kValidation), c.val) << c.n;
    EXPECT_EQ(ds.count_in(Split::kTest), c.test) << c.n;
  }
}

TEST(SplitTest, ChronologicalPerPersona) {
  auto rows = fixtures::daily_sessions("a", 10);
  auto more = fixtures::daily_sessions("b", 19);
  rows.insert(rows.end(), more.begin(), more.end());
  std::reverse(rows.begin(), rows.end());
  const Dataset ds = split_sessions(fixtures::dataset_of(rows));
  std::int64_t last_train = 0;
  std::int64_t first_test = INT64_MAX;
  for (std::size_t i = 0; i < ds.sessions.size(); ++i) {
    if (ds.sessions[i].persona_id != "b") continue;
    if (ds.splits[i] == Split::kTrain) last_train = std::max(last_train, ds.sessions[i].start_time_ms());
    if (ds.splits[i] == Split::kTest) first_test = std::min(first_test, ds.sessions[i].start_time_ms());
  }
  EXPECT_LT(last_train, first_test);
  EXPECT_EQ(ds.count_in(Split::kTrain), 8u + 15u);
}

TEST(SplitTest, RejectsBadRatios) {
  const Dataset ds = fixtures::dataset_of(fixtures::daily_sessions("p", 4));
  try {
    split_sessions(ds, {0.8, 0.3, 0.1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidRatios);
  }
  EXPECT_THROW(split_sessions(ds, {1.0, 0.0, 0.0}), Error);
}

TEST(SplitTest, AssignmentDocumentRoundTrip) {
  Dataset ds = split_sessions(fixtures::dataset_of(fixtures::daily_sessions("p", 10)));
  const Json doc = split_assignment_json(ds);
  Dataset fresh = fixtures::dataset_of(fixtures::daily_sessions("p", 10));
  apply_split_assignment(fresh, doc);
  EXPECT_EQ(fresh.splits, ds.splits);
}

TEST(TraceTest, LocalHour) {
  EXPECT_EQ(local_hour(0, 0), 0);
  EXPECT_EQ(local_hour(0, 480), 8);
  EXPECT_EQ(local_hour(-1, 0), 23);
  EXPECT_EQ(local_hour(3'600'000 * 23, 120), 1);
}

// ---------------------------------------------------------------------------

// Reference JS in bits from the definition.
double reference_js(const std::map<std::string, double>& p, const std::map<std::string, double>& q) {
  std::set<std::string> keys;
  for (const auto& [k, _] : p) keys.insert(k);
  for (const auto& [k, _] : q) keys.insert(k);
  double kl_p = 0.0, kl_q = 0.0;
  for (const auto& k : keys) {
    const double a = p.count(k) ? p.at(k) : 0.0;
    const double b = q.count(k) ? q.at(k) : 0.0;
    const double m = 0.5 * (a + b);
    if (a > 0) kl_p += a * std::log2(a / m);
    if (b > 0) kl_q += b * std::log2(b / m);
  }
  return 0.5 * kl_p + 0.5 * kl_q;
}

CategoryDistribution dist(std::map<std::string, double> p) {
  CategoryDistribution d;
  d.probabilities = std::move(p);
  return d;
}

TEST(DistributionTest, JsWorkedValues) {
  const auto p = dist({{"a", 0.5}, {"b", 0.5}});
  const auto q = dist({{"a", 1.0}});
  EXPECT_NEAR(js_divergence(p, q), 0.311278, 1e-6);
  EXPECT_NEAR(js_divergence(p, q), reference_js(p.probabilities, q.probabilities), 1e-12);
  EXPECT_EQ(js_divergence(p, p), 0.0);
  EXPECT_DOUBLE_EQ(js_divergence(dist({{"a", 1.0}}), dist({{"b", 1.0}})), 1.0);
}

TEST(DistributionTest, JsSymmetricAndBounded) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::map<std::string, double> a, b;
    double sa = 0, sb = 0;
    for (int k = 0; k < 6; ++k) {
      const std::string key(1, static_cast<char>('a' + k));
      if (u(gen) < 0.7) sa += a[key] = u(gen) + 1e-3;
      if (u(gen) < 0.7) sb += b[key] = u(gen) + 1e-3;
    }
    if (a.empty() || b.empty()) continue;
    for (auto& [_, v] : a) v /= sa;
    for (auto& [_, v] : b) v /= sb;
    const double pq = js_divergence(dist(a), dist(b));
    EXPECT_LE(std::abs(pq - js_divergence(dist(b), dist(a))), 1e-15);
    EXPECT_GE(pq, 0.0);
    EXPECT_LE(pq, 1.0);
    EXPECT_NEAR(pq, reference_js(a, b), 1e-12);
  }
}

TEST(DistributionTest, RejectsUnnormalized) {
  try {
    js_divergence(dist({{"a", 0.5}}), dist({{"a", 1.0}}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnnormalizedInput);
  }
}

TEST(DistributionTest, CountsAndEntropy) {
  const std::vector<std::string> xs = {"A/x", "A/x", "B/y", "C/z"};
  const auto d = category_distribution(xs);
  EXPECT_DOUBLE_EQ(d.probability("A/x"), 0.5);
  EXPECT_DOUBLE_EQ(d.probability("Q/q"), 0.0);
  EXPECT_EQ(d.count_basis, 4u);
  EXPECT_DOUBLE_EQ(entropy_bits(d), 1.5);
  EXPECT_THROW(category_distribution(std::vector<std::string>{}), Error);
  const std::vector<double> w = {1.0, 1.0, 2.0, 0.0};
  const auto wd = weighted_category_distribution(xs, w);
  EXPECT_DOUBLE_EQ(wd.probability("A/x"), 0.5);
  EXPECT_DOUBLE_EQ(wd.probability("B/y"), 0.5);
  EXPECT_EQ(distribution_from_json(to_json(d)), d);
}

// ---------------------------------------------------------------------------

TEST(FeaturesTest, PersonaAFixtureStatistics) {
  const Dataset ds = fixtures::dataset_of(fixtures::persona_a_rows());
  const auto f = compute_features(ds, "A");
  EXPECT_EQ(f.total_samples, 939u);
  EXPECT_NEAR(f.duration_stats.mean, 7.8, 1e-12);
  EXPECT_EQ(f.duration_stats.median, 5.0);
  EXPECT_EQ(f.duration_stats.min, 0.5);
  EXPECT_EQ(f.duration_stats.max, 120.6);
  EXPECT_NEAR(f.duration_stats.std, 10.3, 0.1);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", f.duration_stats.mean);
  EXPECT_STREQ(buf, "7.8");
}

TEST(FeaturesTest, RatesDistributionAndHistogram) {
  const Dataset ds = fixtures::dataset_of(three_session_rows());
  const auto f = compute_features(ds, "p1");
  EXPECT_EQ(f.total_samples, 6u);
  EXPECT_DOUBLE_EQ(f.like_rate, 2.0 / 6.0);
  EXPECT_DOUBLE_EQ(f.comment_rate, 0.0);
  EXPECT_DOUBLE_EQ(f.category_distribution.probability("Entertainment/Comedy"), 2.0 / 6.0);
  EXPECT_DOUBLE_EQ(f.liked_category_distribution.probability("Music/Comedy"), 0.5);
  EXPECT_DOUBLE_EQ(f.duration_stats.median, (10.0 + 15.0) / 2.0);
  EXPECT_EQ(f.duration_stats_by_top.at("Knowledge").count, 2u);
  EXPECT_EQ(f.temporal_histogram[8], 6u);  // all within an hour of the epoch, UTC+8
  EXPECT_EQ(f.creator_frequency.at("c1"), 6u);
  // completion: 1, .1, .5, .5, .1, 1
  EXPECT_DOUBLE_EQ(f.mean_completion_ratio, 3.2 / 6.0);
}

TEST(FeaturesTest, ExemplarTieBreaks) {
  const Dataset ds = fixtures::dataset_of(three_session_rows());
  const auto ex = select_exemplars(ds, "p1", 2);
  ASSERT_EQ(ex.long_watched.size(), 2u);
  // v1 and v6 both complete; v6 watched longer.
  EXPECT_EQ(ex.long_watched[0].video_id, "v6");
  EXPECT_EQ(ex.long_watched[1].video_id, "v1");
  // v2 and v5 both at 0.1; v2 is shorter.
  EXPECT_EQ(ex.quick_skipped[0].video_id, "v2");
  EXPECT_EQ(ex.quick_skipped[1].video_id, "v5");
  ASSERT_EQ(ex.liked.size(), 2u);
  EXPECT_EQ(ex.liked[0].video_id, "v4");
  EXPECT_EQ(ex.liked[1].video_id, "v3");
}

TEST(FeaturesTest, PermutationInvariant) {
  auto rows = fixtures::persona_a_rows();
  const auto base = compute_features(fixtures::dataset_of(rows), "A");
  std::mt19937 gen(11);
  std::shuffle(rows.begin(), rows.end(), gen);
  const auto shuffled = compute_features(fixtures::dataset_of(rows), "A");
  EXPECT_EQ(base, shuffled);
  EXPECT_EQ(features_hash(base), features_hash(shuffled));
}

TEST(FeaturesTest, ErrorsAndSplitFilter) {
  Dataset ds = split_sessions(fixtures::dataset_of(fixtures::daily_sessions("p", 3)));
  try {
    compute_features(ds, "nobody");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnknownPersona);
  }
  try {
    compute_features(ds, "p", {Split::kValidation});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNoRecordsInSplit);
  }
  EXPECT_EQ(compute_features(ds, "p").total_samples, 2u);
  EXPECT_EQ(compute_features(ds, "p", all_splits()).total_samples, 3u);
}

TEST(FeaturesTest, JsonRoundTrip) {
  const auto f = compute_features(fixtures::dataset_of(three_session_rows()), "p1");
  const auto back = features_from_json(parse_json(features_to_json(f).dump(), "features"));
  EXPECT_EQ(features_to_json(back).dump(), features_to_json(f).dump());
  EXPECT_THROW(features_from_json(Json{{"schema", "x"}}), Error);
}

TEST(PersonaTest, NeutralPersonaAndJson) {
  const auto f = compute_features(fixtures::dataset_of(three_session_rows()), "p1");
  PersonaProfile p = neutral_persona(f);
  EXPECT_EQ(p.persona_id, "p1");
  EXPECT_EQ(p.traits.novelty_tolerance, kNeutralTrait);
  EXPECT_LE(p.behavioral_stats.top_categories.size(), kPersonaTopCategories);
  p.narrative.push_back({"usage_context", "evenings"});
  const PersonaProfile back = persona_from_json(persona_to_json(p));
  EXPECT_EQ(persona_to_json(back), persona_to_json(p));
  Json bad = persona_to_json(p);
  bad["traits"]["novelty_tolerance"] = 1.5;
  try {
    persona_from_json(bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParseError);
  }
}

}  // namespace
}  // namespace personaact
