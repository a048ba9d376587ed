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

// Persona-conditioned behavior policies: given what the user is shown,
// predict how long they watch and whether they like, comment or share.

#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "personaact/error.hpp"
#include "personaact/features.hpp"
#include "personaact/io.hpp"
#include "personaact/persona.hpp"
#include "personaact/quantile.hpp"
#include "personaact/random.hpp"
#include "personaact/trace.hpp"

namespace personaact {

struct Observation {
  VideoMeta video;
  std::size_t feed_position = 1;  // 1-based within the session
  int local_hour = 0;
  std::int64_t timestamp_ms = 0;  // 0 when unknown (simulation)
};

// Watching is implied by every prediction.
struct ActionPrediction {
  double watch_duration_seconds = 0.0;
  bool liked = false;
  bool commented = false;
  bool shared = false;

  bool operator==(const ActionPrediction&) const = default;
};

// A prediction plus how it was produced.
struct Prediction {
  ActionPrediction action;
  int format_reward = 1;     // 0 when an external reply failed validation
  bool fallback = false;     // category unseen in training, or external fallback
  bool exploration = false;  // novelty-driven exploration watch
  std::string incident;      // non-empty when a per-call failure was absorbed
};

class Policy {
 public:
  virtual ~Policy() = default;
  virtual const std::string& persona_id() const = 0;
  virtual std::string kind() const = 0;
  // Callers own the random stream; a policy never keeps mutable state
  // between calls (external adapters serialize their transport only).
  virtual Prediction predict(const PersonaProfile& persona, const Observation& obs,
                             Rng& rng) const = 0;
};

inline void check_persona(const Policy& policy, const PersonaProfile& persona) {
  if (policy.persona_id() != persona.persona_id) {
    throw Error(ErrorCode::kPersonaMismatch, "policy fitted for persona " + policy.persona_id() +
                                                 " but asked to act as " + persona.persona_id);
  }
}

struct EngagementRates {
  double like = 0.0;
  double comment = 0.0;
  double share = 0.0;
  std::size_t count = 0;

  bool operator==(const EngagementRates&) const = default;
};

struct RateTable {
  EngagementRates global;
  std::map<std::string, EngagementRates> by_category;

  const EngagementRates& lookup(const std::string& key) const {
    auto it = by_category.find(key);
    return it == by_category.end() ? global : it->second;
  }

  bool operator==(const RateTable&) const = default;
};

// Multiplicative duration jitter half-width.
inline constexpr double kDurationJitter = 0.05;
// Ceiling on the novelty-driven exploration probability.
inline constexpr double kMaxExplorationProbability = 0.25;

inline double exploration_probability(double novelty_tolerance) {
  return std::clamp(novelty_tolerance - kNeutralTrait, 0.0, kMaxExplorationProbability);
}

// Desk-scale stand-in for a trained model: resamples the persona's own
// training durations and engagement rates per top-level category.
class EmpiricalPolicy final : public Policy {
 public:
  EmpiricalPolicy(std::string persona_id, EmpiricalDurationDistribution durations, RateTable rates,
                  std::uint64_t seed = 0)
      : persona_id_(std::move(persona_id)),
        durations_(std::move(durations)),
        rates_(std::move(rates)),
        seed_(seed) {}

  const std::string& persona_id() const override { return persona_id_; }
  std::string kind() const override { return "empirical"; }
  const EmpiricalDurationDistribution& durations() const { return durations_; }
  const RateTable& rates() const { return rates_; }
  std::uint64_t seed() const { return seed_; }

  Prediction predict(const PersonaProfile& persona, const Observation& obs,
                     Rng& rng) const override {
    check_persona(*this, persona);
    Prediction out;
    const std::string& key = obs.video.category.top;
    double base = 0.0;
    const EngagementRates* rates = &rates_.global;
    if (durations_.has_key(key)) {
      const auto xs = durations_.lookup(key).samples();
      base = xs[rng.uniform_index(xs.size())];
      rates = &rates_.lookup(key);
    } else {
      out.fallback = true;
      const auto xs = durations_.global().samples();
      if (rng.bernoulli(exploration_probability(persona.traits.novelty_tolerance))) {
        out.exploration = true;
        const std::size_t half = xs.size() / 2;
        base = xs[half + rng.uniform_index(xs.size() - half)];
      } else {
        base = xs[rng.uniform_index(xs.size())];
      }
    }
    const double jitter = 1.0 + kDurationJitter * (2.0 * rng.uniform01() - 1.0);
    out.action.watch_duration_seconds = std::max(0.0, base * jitter);
    out.action.liked = rng.bernoulli(rates->like);
    out.action.commented = rng.bernoulli(rates->comment);
    out.action.shared = rng.bernoulli(rates->share);
    return out;
  }

  bool operator==(const EmpiricalPolicy& o) const {
    return std::tie(persona_id_, durations_, rates_, seed_) ==
           std::tie(o.persona_id_, o.durations_, o.rates_, o.seed_);
  }

 private:
  std::string persona_id_;
  EmpiricalDurationDistribution durations_;
  RateTable rates_;
  std::uint64_t seed_ = 0;
};

namespace detail {

inline EngagementRates rates_of(std::size_t n, std::size_t likes, std::size_t comments,
                                std::size_t shares) {
  const double d = static_cast<double>(n);
  return {static_cast<double>(likes) / d, static_cast<double>(comments) / d,
          static_cast<double>(shares) / d, n};
}

}  // namespace detail

// Fits on the persona's train-split records.
inline std::shared_ptr<const EmpiricalPolicy> fit_empirical_policy(
    const BehavioralFeatures& features, const Dataset& ds, std::uint64_t seed = 0,
    const SplitSet& splits = {Split::kTrain}) {
  const auto recs = detail::persona_records(ds, features.persona_id, splits);
  if (recs.empty()) {
    throw Error(ErrorCode::kNoRecordsInSplit,
                "no training records for persona " + features.persona_id);
  }
  std::vector<double> global;
  std::map<std::string, std::vector<double>> by_top;
  struct Counts {
    std::size_t n = 0, likes = 0, comments = 0, shares = 0;
  };
  Counts total;
  std::map<std::string, Counts> per_top;
  for (const auto& fr : recs) {
    const TraceRecord& r = *fr.record;
    global.push_back(r.action.watch_duration_seconds);
    by_top[r.video.category.top].push_back(r.action.watch_duration_seconds);
    for (Counts* c : {&total, &per_top[r.video.category.top]}) {
      ++c->n;
      c->likes += r.action.liked ? 1 : 0;
      c->comments += r.action.commented ? 1 : 0;
      c->shares += r.action.shared ? 1 : 0;
    }
  }
  RateTable rates;
  rates.global = detail::rates_of(total.n, total.likes, total.comments, total.shares);
  for (const auto& [top, c] : per_top) {
    rates.by_category[top] = detail::rates_of(c.n, c.likes, c.comments, c.shares);
  }
  return std::make_shared<const EmpiricalPolicy>(
      features.persona_id, EmpiricalDurationDistribution(std::move(global), std::move(by_top)),
      std::move(rates), seed);
}

// ---------------------------------------------------------------------------
// Quantile reversal

struct ReversalConfig {
  enum class Key { kGlobal, kPerCategory };
  bool reverse_discrete = false;
  Key key = Key::kGlobal;
};

// Calibrated complement of an action probability: keeps the persona's
// global rate as the pivot.
inline double reversed_rate(double rate, double global_rate) {
  if (global_rate >= 1.0) return 1.0;
  return std::min(1.0, global_rate * (1.0 - rate) / (1.0 - global_rate));
}

// Wraps a base policy; every predicted duration at training quantile q is
// replaced by the training duration at quantile 1 - q.
class ReversedPolicy final : public Policy {
 public:
  ReversedPolicy(std::shared_ptr<const Policy> base, EmpiricalDurationDistribution training,
                 RateTable rates, ReversalConfig config = {})
      : base_(std::move(base)),
        training_(std::move(training)),
        rates_(std::move(rates)),
        config_(config) {}

  const std::string& persona_id() const override { return base_->persona_id(); }
  std::string kind() const override { return "reversed(" + base_->kind() + ")"; }
  const ReversalConfig& config() const { return config_; }

  const HazenCdf& cdf_for(const std::string& top_category) const {
    return config_.key == ReversalConfig::Key::kPerCategory
               ? training_.lookup(top_category)
               : training_.global();
  }

  double reverse_duration(const std::string& top_category, double predicted) const {
    const HazenCdf& cdf = cdf_for(top_category);
    // A zero-length watch sits below every training sample.
    const double q = predicted > 0.0 ? cdf.quantile_of(predicted) : 0.0;
    return cdf.inverse_quantile(1.0 - q);
  }

  Prediction predict(const PersonaProfile& persona, const Observation& obs,
                     Rng& rng) const override {
    Prediction out = base_->predict(persona, obs, rng);
    out.action.watch_duration_seconds =
        reverse_duration(obs.video.category.top, out.action.watch_duration_seconds);
    if (config_.reverse_discrete) {
      const EngagementRates& r = rates_.lookup(obs.video.category.top);
      const EngagementRates& g = rates_.global;
      out.action.liked = rng.bernoulli(reversed_rate(r.like, g.like));
      out.action.commented = rng.bernoulli(reversed_rate(r.comment, g.comment));
      out.action.shared = rng.bernoulli(reversed_rate(r.share, g.share));
    }
    return out;
  }

 private:
  std::shared_ptr<const Policy> base_;
  EmpiricalDurationDistribution training_;
  RateTable rates_;
  ReversalConfig config_;
};

inline std::shared_ptr<const ReversedPolicy> reverse_persona(
    std::shared_ptr<const Policy> base, EmpiricalDurationDistribution training, RateTable rates,
    ReversalConfig config = {}) {
  return std::make_shared<const ReversedPolicy>(std::move(base), std::move(training),
                                                std::move(rates), config);
}

inline std::shared_ptr<const ReversedPolicy> reverse_persona(
    const std::shared_ptr<const EmpiricalPolicy>& base, ReversalConfig config = {}) {
  return reverse_persona(base, base->durations(), base->rates(), config);
}

// ---------------------------------------------------------------------------
// Baselines

// Always predicts one duration and no discrete actions.
class ConstantPolicy final : public Policy {
 public:
  ConstantPolicy(std::string persona_id, double duration, std::string kind = "constant")
      : persona_id_(std::move(persona_id)), duration_(duration), kind_(std::move(kind)) {}

  const std::string& persona_id() const override { return persona_id_; }
  std::string kind() const override { return kind_; }
  double duration() const { return duration_; }

  Prediction predict(const PersonaProfile& persona, const Observation&, Rng&) const override {
    check_persona(*this, persona);
    Prediction out;
    out.action.watch_duration_seconds = duration_;
    return out;
  }

 private:
  std::string persona_id_;
  double duration_;
  std::string kind_;
};

// Interpolated median of the persona's global training durations.
inline std::shared_ptr<const ConstantPolicy> global_median_policy(const EmpiricalPolicy& fitted) {
  return std::make_shared<const ConstantPolicy>(
      fitted.persona_id(), fitted.durations().global().inverse_quantile(0.5), "global-median");
}

// Replays logged actions, looked up by (video_id, timestamp). Unknown
// observations get an empty prediction flagged as fallback.
class ReplayPolicy final : public Policy {
 public:
  ReplayPolicy(const Dataset& ds, std::string persona_id, const SplitSet& splits = all_splits())
      : persona_id_(std::move(persona_id)) {
    for (std::size_t i = 0; i < ds.sessions.size(); ++i) {
      const Session& s = ds.sessions[i];
      if (s.persona_id != persona_id_ || !splits.contains(ds.splits[i])) continue;
      for (const auto& r : s.records) {
        log_[{r.video.video_id, r.action.timestamp_ms}] = {
            r.action.watch_duration_seconds, r.action.liked, r.action.commented, r.action.shared};
      }
    }
  }

  const std::string& persona_id() const override { return persona_id_; }
  std::string kind() const override { return "replay"; }

  Prediction predict(const PersonaProfile& persona, const Observation& obs, Rng&) const override {
    check_persona(*this, persona);
    Prediction out;
    auto it = log_.find({obs.video.video_id, obs.timestamp_ms});
    if (it == log_.end()) {
      out.fallback = true;
      out.incident = "no logged action for " + obs.video.video_id;
      return out;
    }
    out.action = it->second;
    return out;
  }

 private:
  std::string persona_id_;
  std::map<std::pair<std::string, std::int64_t>, ActionPrediction> log_;
};

// ---------------------------------------------------------------------------
// Serialization of fitted empirical policies

inline Json to_json(const EngagementRates& r) {
  return Json{{"like", r.like}, {"comment", r.comment}, {"share", r.share}, {"count", r.count}};
}

inline EngagementRates rates_from_json(const Json& j) {
  return {j.at("like").get<double>(), j.at("comment").get<double>(), j.at("share").get<double>(),
          j.at("count").get<std::size_t>()};
}

inline Json policy_to_json(const EmpiricalPolicy& p) {
  Json by_cat = Json::object();
  for (const auto& [k, r] : p.rates().by_category) by_cat[k] = to_json(r);
  return Json{{"schema", kPolicyModelSchema},
              {"kind", p.kind()},
              {"persona_id", p.persona_id()},
              {"seed", p.seed()},
              {"durations", to_json(p.durations())},
              {"rates", {{"global", to_json(p.rates().global)}, {"by_category", std::move(by_cat)}}}};
}

inline std::shared_ptr<const EmpiricalPolicy> policy_from_json(const Json& j) {
  if (!j.is_object() || j.value("schema", std::string()) != kPolicyModelSchema) {
    throw Error(ErrorCode::kSchemaMismatch, "expected a policy model document");
  }
  try {
    RateTable rates;
    rates.global = rates_from_json(j.at("rates").at("global"));
    for (const auto& [k, r] : j.at("rates").at("by_category").items()) {
      rates.by_category[k] = rates_from_json(r);
    }
    return std::make_shared<const EmpiricalPolicy>(
        j.at("persona_id").get<std::string>(), duration_distribution_from_json(j.at("durations")),
        std::move(rates), j.at("seed").get<std::uint64_t>());
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("policy document: ") + e.what());
  }
}

}  // namespace personaact
