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

#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "personaact/audit.hpp"
#include "personaact/features.hpp"
#include "personaact/recsim.hpp"
#include "personaact/synthetic.hpp"

namespace personaact {
namespace {

VideoMeta video(std::string id, std::string top, double len = 10.0) {
  VideoMeta v;
  v.video_id = std::move(id);
  v.category = {std::move(top), "S"};
  v.length_seconds = len;
  return v;
}

Catalog two_top_catalog() { return Catalog({video("a1", "A"), video("a2", "A"), video("b1", "B")}); }

TEST(CatalogTest, GeneratedShape) {
  const Catalog c = generate_catalog({});
  EXPECT_EQ(c.size(), 1000u);
  ASSERT_EQ(c.top_categories().size(), 20u);
  for (const auto& top : c.top_categories()) EXPECT_EQ(c.videos_in(top).size(), 50u);
  for (const auto& v : c.videos()) {
    EXPECT_GE(v.length_seconds, 5.0);
    EXPECT_LE(v.length_seconds, 300.0);
  }
  EXPECT_EQ(c.uniform_path_distribution().size(), 60u);
  EXPECT_EQ(catalog_to_json(generate_catalog({})), catalog_to_json(c));
  CatalogSpec other;
  other.seed = 1;
  EXPECT_NE(catalog_to_json(generate_catalog(other)), catalog_to_json(c));
  const Catalog back = catalog_from_json(catalog_to_json(c));
  EXPECT_EQ(catalog_to_json(back), catalog_to_json(c));
}

TEST(CatalogTest, Validation) {
  try {
    Catalog(std::vector<VideoMeta>{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyCatalog);
  }
  try {
    Catalog({video("a", "A"), video("b", "A")});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidCatalog);
  }
  EXPECT_THROW(Catalog({video("a", "A", 0.0), video("b", "B")}), Error);
  EXPECT_EQ(top_category_name(0), "Entertainment");
  EXPECT_EQ(top_category_name(24), "Category25");
}

TEST(PlatformTest, ConfigValidation) {
  PlatformConfig c;
  EXPECT_NO_THROW(validate(c));
  c.eta = 0.0;
  EXPECT_NO_THROW(validate(c));
  for (auto mutate : std::vector<void (*)(PlatformConfig&)>{
           [](PlatformConfig& x) { x.eta = 1.5; }, [](PlatformConfig& x) { x.epsilon = -0.1; },
           [](PlatformConfig& x) { x.temperature = 0.0; },
           [](PlatformConfig& x) { x.initial_affinity = 0.0; }}) {
    PlatformConfig bad;
    mutate(bad);
    try {
      validate(bad);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kInvalidPlatformConfig);
    }
  }
  PlatformConfig d;
  d.eta = 0.3;
  d.seed = 99;
  EXPECT_EQ(platform_config_from_json(to_json(d)), d);
}

TEST(PlatformTest, FullLearningRateWithZeroSignal) {
  const Catalog cat = two_top_catalog();
  PlatformConfig c;
  c.eta = 1.0;
  PlatformState s = fresh_state(cat, c);
  s.pending = 2;
  submit_feedback(s, c, cat, cat.videos()[2], ActionPrediction{0.0, false, false, false});
  EXPECT_EQ(s.affinity.at("B"), 0.0);
  EXPECT_EQ(s.affinity.at("A"), 0.5);
  EXPECT_EQ(s.interaction_count, 1u);
  EXPECT_FALSE(s.pending.has_value());
}

TEST(PlatformTest, AffinityUpdate) {
  const Catalog cat = two_top_catalog();
  PlatformConfig c;
  c.eta = 0.1;
  PlatformState s = fresh_state(cat, c);
  s.pending = 0;
  // Signal: no watch, a like worth 1.5.
  submit_feedback(s, c, cat, cat.videos()[0], ActionPrediction{0.0, true, false, false});
  EXPECT_NEAR(s.affinity.at("A"), 0.9 * 0.5 + 0.1 * 1.5, 1e-15);
  EXPECT_NEAR(s.affinity.at("A"), 0.6, 1e-12);
  EXPECT_DOUBLE_EQ(engagement_signal(c, cat.videos()[0], {25.0, true, false, true}), 4.0);
  EXPECT_DOUBLE_EQ(engagement_signal(c, cat.videos()[0], {5.0, false, false, false}), 0.5);
}

TEST(PlatformTest, DecayCoupling) {
  const Catalog cat = two_top_catalog();
  PlatformConfig c;
  c.eta = 0.5;
  c.decay_coupling = 0.5;
  PlatformState s = fresh_state(cat, c);
  s.pending = 0;
  submit_feedback(s, c, cat, cat.videos()[0], ActionPrediction{10.0, false, false, false});
  EXPECT_DOUBLE_EQ(s.affinity.at("A"), 0.75);
  EXPECT_DOUBLE_EQ(s.affinity.at("B"), 0.5 * 0.75);
}

TEST(PlatformTest, EqualAffinityIsUniform) {
  const Catalog cat = two_top_catalog();
  PlatformConfig c;
  c.epsilon = 0.0;
  c.seed = 5;
  PlatformState s = fresh_state(cat, c);
  const int n = 20000;
  int a = 0;
  for (int i = 0; i < n; ++i) a += recommend(s, c, cat).category.top == "A";
  EXPECT_NEAR(static_cast<double>(a) / n, 0.5, 3.0 * std::sqrt(0.25 / n));
}

TEST(PlatformTest, FeedbackMustMatchPending) {
  const Catalog cat = two_top_catalog();
  PlatformConfig c;
  PlatformState s = fresh_state(cat, c);
  try {
    submit_feedback(s, c, cat, cat.videos()[0], {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kFeedbackMismatch);
  }
  s.pending = 1;
  EXPECT_THROW(submit_feedback(s, c, cat, cat.videos()[2], {}), Error);
  auto shared = std::make_shared<const Catalog>(cat);
  SimulatedPlatform p(shared, c);
  EXPECT_THROW(p.submit_feedback({}), Error);
  EXPECT_EQ(p.describe()["kind"], "simulated");
  EXPECT_EQ(p.describe()["catalog_categories"], 2);
}

// ---------------------------------------------------------------------------

TEST(WindowTest, DistinctCounts) {
  const std::vector<std::string> seq = {"A", "A", "B", "C"};
  const auto c = sliding_window_curve(seq, 2);
  EXPECT_EQ(c.distinct_count, (std::vector<std::size_t>{1, 2, 2}));
  EXPECT_EQ(c.step_index, (std::vector<std::size_t>{1, 2, 3}));
  EXPECT_DOUBLE_EQ(c.entropy[0], 0.0);
  EXPECT_DOUBLE_EQ(c.entropy[1], 1.0);
  const auto s = sliding_window_curve(seq, 2, 2);
  EXPECT_EQ(s.distinct_count, (std::vector<std::size_t>{1, 2}));
  try {
    sliding_window_curve(seq, 5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kStepsBelowWindow);
  }
  EXPECT_EQ(head_mean({1, 2, 3, 4}, 2), 1.5);
  EXPECT_EQ(tail_mean({1, 2, 3, 4}, 2), 3.5);
}

// Serves category A for the first `switch_at` recommendations, then B.
class ScriptedAdapter : public PlatformAdapter {
 public:
  ScriptedAdapter(std::size_t switch_at, std::size_t fail_at = SIZE_MAX)
      : switch_at_(switch_at), fail_at_(fail_at) {}

  VideoMeta recommend() override {
    const std::size_t k = calls_++;
    if (k == fail_at_) throw std::runtime_error("platform timed out");
    return k < switch_at_ ? video("a" + std::to_string(k), "A") : video("b" + std::to_string(k), "B");
  }
  void submit_feedback(const ActionPrediction&) override { ++feedback_; }
  Json describe() const override { return Json{{"kind", "scripted"}}; }

  std::size_t feedback() const { return feedback_; }

 private:
  std::size_t switch_at_;
  std::size_t fail_at_;
  std::size_t calls_ = 0;
  std::size_t feedback_ = 0;
};

PersonaProfile persona(const std::string& id = "p") {
  PersonaProfile p;
  p.persona_id = id;
  return p;
}

TEST(DepthTest, DisjointPhasesGiveOne) {
  ScriptedAdapter adapter(10);
  ConstantPolicy base("p", 5.0), rev("p", 1.0);
  AuditConfig c;
  c.phase_steps = 10;
  const auto r = run_depth(adapter, base, rev, persona(), c);
  ASSERT_TRUE(r.depth.has_value());
  EXPECT_DOUBLE_EQ(r.depth->bep, 1.0);
  EXPECT_EQ(r.exposures.size(), 20u);
  EXPECT_EQ(r.config["reversed_policy"], "constant");
}

TEST(DepthTest, IdenticalPhasesGiveZero) {
  ScriptedAdapter adapter(1000);
  ConstantPolicy base("p", 5.0);
  AuditConfig c;
  c.phase_steps = 10;
  EXPECT_EQ(run_depth(adapter, base, base, persona(), c).depth->bep, 0.0);
}

TEST(DepthTest, WatchedOnlyWithNothingWatchedFails) {
  ScriptedAdapter adapter(10);
  ConstantPolicy base("p", 1.0);  // 10% of every 10 s clip
  AuditConfig c;
  c.phase_steps = 10;
  c.weighting = ExposureWeighting::kWatchedOnly;
  const auto r = run_depth(adapter, base, base, persona(), c);
  EXPECT_TRUE(r.failed);
  EXPECT_FALSE(r.depth.has_value());
  c.weighting = ExposureWeighting::kWatchTime;
  ScriptedAdapter again(10);
  EXPECT_DOUBLE_EQ(run_depth(again, base, base, persona(), c).depth->bep, 1.0);
}

TEST(AuditTest, AdapterFailureBecomesIncident) {
  ScriptedAdapter adapter(1000, 100);
  ConstantPolicy base("p", 5.0);
  AuditConfig c;
  c.steps = 200;
  const auto r = run_breadth(adapter, base, persona(), c);
  ASSERT_EQ(r.incidents.size(), 1u);
  EXPECT_EQ(r.incidents[0].rfind("step 100: recommend failed", 0), 0u) << r.incidents[0];
  EXPECT_NE(r.incidents[0].find("platform timed out"), std::string::npos);
  EXPECT_EQ(r.exposures.size(), 199u);
  EXPECT_FALSE(r.failed);
  EXPECT_EQ(incidents_log(r), r.incidents[0] + "\n");
}

TEST(AuditTest, PersonaMismatchIsFatal) {
  ScriptedAdapter adapter(1000);
  ConstantPolicy base("someone-else", 5.0);
  AuditConfig c;
  c.steps = 60;
  try {
    run_breadth(adapter, base, persona(), c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kPersonaMismatch);
  }
}

TEST(AuditTest, StepsBelowWindow) {
  ScriptedAdapter adapter(1000);
  ConstantPolicy base("p", 5.0);
  AuditConfig c;
  c.steps = 49;
  try {
    run_breadth(adapter, base, persona(), c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kStepsBelowWindow);
  }
}

// With eta = 1 the platform's view of a category is the last signal it
// saw, so phase B starting on phase A's account shows up immediately.
class CountingPlatform : public PlatformAdapter {
 public:
  explicit CountingPlatform(SimulatedPlatform inner) : inner_(std::move(inner)) {}
  VideoMeta recommend() override { return inner_.recommend(); }
  void submit_feedback(const ActionPrediction& a) override { inner_.submit_feedback(a); }
  Json describe() const override { return inner_.describe(); }
  const SimulatedPlatform& inner() const { return inner_; }

 private:
  SimulatedPlatform inner_;
};

struct Subject {
  std::shared_ptr<const Catalog> catalog;
  std::shared_ptr<const EmpiricalPolicy> policy;
  PersonaProfile persona;
};

Subject concentrated_subject(std::uint64_t seed) {
  Subject s;
  s.catalog = std::make_shared<const Catalog>(generate_catalog({}));
  const auto spec = concentrated_persona_spec(*s.catalog, {"Music", "Gaming", "Food"}, seed);
  const Dataset ds = synthesize_traces(*s.catalog, spec);
  const auto f = compute_features(ds, spec.persona_id);
  s.policy = fit_empirical_policy(f, ds, seed);
  s.persona = neutral_persona(f);
  return s;
}

TEST(AuditTest, DepthPhasesShareOneAccount) {
  const Subject s = concentrated_subject(1);
  PlatformConfig pc;
  pc.eta = 1.0;
  AuditConfig c;
  c.phase_steps = 100;
  c.seed = 4;
  CountingPlatform platform(make_simulated_platform(s.catalog, pc, c.seed));
  const auto r = run_depth(platform, s.policy, s.persona, c);
  EXPECT_EQ(platform.inner().state().interaction_count, 200u);
  EXPECT_TRUE(r.incidents.empty());
  EXPECT_GT(r.depth->bep, 0.0);
}

TEST(AuditTest, ConcentratedPersonaNarrowsExposure) {
  const Subject s = concentrated_subject(0);
  AuditConfig c;
  c.seed = 0;
  auto platform = make_simulated_platform(s.catalog, PlatformConfig{}, c.seed);
  const auto r = run_breadth(platform, *s.policy, s.persona, c);
  ASSERT_TRUE(r.breadth.has_value());
  EXPECT_EQ(r.breadth->size(), 751u);
  EXPECT_LT(tail_mean(r.breadth->distinct_count, 5), head_mean(r.breadth->distinct_count, 5));
}

TEST(AuditTest, ReportsAreReproducibleAndRoundTrip) {
  const Subject s = concentrated_subject(2);
  AuditConfig c;
  c.seed = 11;
  c.phase_steps = 120;
  c.reversal.reverse_discrete = true;
  auto run = [&] {
    auto platform = make_simulated_platform(s.catalog, PlatformConfig{}, c.seed);
    return report_to_json(run_depth(platform, s.policy, s.persona, c)).dump();
  };
  const std::string a = run();
  EXPECT_EQ(a, run());
  const Json j = Json::parse(a);
  EXPECT_EQ(j["config"]["reverse_discrete"], true);
  EXPECT_EQ(report_to_json(report_from_json(j)).dump(), a);
  c.seed = 12;
  EXPECT_NE(run(), a);

  AuditConfig b;
  b.steps = 60;
  auto platform = make_simulated_platform(s.catalog, PlatformConfig{}, 0);
  const auto breadth = run_breadth(platform, *s.policy, s.persona, b);
  const std::string csv = breadth_csv(*breadth.breadth);
  EXPECT_EQ(csv.rfind("step_index,distinct_count,entropy\n49,", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 12);
  EXPECT_EQ(report_to_json(report_from_json(report_to_json(breadth))), report_to_json(breadth));
}

// ---------------------------------------------------------------------------

TEST(SyntheticTest, ShapeAndDeterminism) {
  const Catalog cat = generate_catalog({});
  const auto spec = concentrated_persona_spec(cat, {"Music"}, 3, "m");
  const Dataset a = synthesize_traces(cat, spec);
  EXPECT_EQ(a.sessions.size(), 20u);
  EXPECT_EQ(a.record_count(), 800u);
  EXPECT_EQ(serialize_traces(a), serialize_traces(synthesize_traces(cat, spec)));
  EXPECT_EQ(parse_traces(serialize_traces(a)), a);
  const auto f = compute_features(a, "m");
  // Favourite weight 4 against 19 others at 1.
  double music = 0.0;
  for (const auto& [path, p] : f.category_distribution.probabilities) {
    if (path.rfind("Music/", 0) == 0) music += p;
  }
  EXPECT_NEAR(music, 4.0 / 23.0, 0.05);
  EXPECT_GT(f.duration_stats_by_top.at("Music").median, 30.0);
  EXPECT_THROW(concentrated_persona_spec(cat, {"Nope"}, 0), Error);
}

}  // namespace
}  // namespace personaact
