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

// Fidelity metrics and the reward decomposition
// R = R_action + R_duration + R_format.

#pragma once

#include <cmath>
#include <cstdio>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "personaact/error.hpp"
#include "personaact/features.hpp"
#include "personaact/io.hpp"
#include "personaact/persona.hpp"
#include "personaact/policy.hpp"
#include "personaact/policy_wire.hpp"
#include "personaact/trace.hpp"

namespace personaact {

namespace detail {

inline void check_pairs(std::span<const double> y, std::span<const double> y_hat) {
  if (y.size() != y_hat.size()) {
    throw Error(ErrorCode::kLengthMismatch, "truth has " + std::to_string(y.size()) +
                                                " values, prediction " +
                                                std::to_string(y_hat.size()));
  }
  if (y.empty()) throw Error(ErrorCode::kEmptyInput, "metrics need at least one pair");
}

// Fixed-order Neumaier sum over per-pair terms.
template <typename F>
double mean_of_terms(std::size_t n, F term) {
  std::vector<double> xs(n);
  for (std::size_t i = 0; i < n; ++i) xs[i] = term(i);
  return compensated_sum(xs) / static_cast<double>(n);
}

}  // namespace detail

// (1/n) sum |y - y^| / ((|y| + |y^|) / 2); a 0/0 term counts as 0.
inline double smape(std::span<const double> y, std::span<const double> y_hat) {
  detail::check_pairs(y, y_hat);
  return detail::mean_of_terms(y.size(), [&](std::size_t i) {
    const double denom = (std::abs(y[i]) + std::abs(y_hat[i])) / 2.0;
    return denom == 0.0 ? 0.0 : std::abs(y[i] - y_hat[i]) / denom;
  });
}

inline double mae(std::span<const double> y, std::span<const double> y_hat) {
  detail::check_pairs(y, y_hat);
  return detail::mean_of_terms(y.size(), [&](std::size_t i) { return std::abs(y[i] - y_hat[i]); });
}

// 1 - min(1, |d - d^| / d).
inline double reward_watch(double d, double d_hat) {
  if (!(d > 0.0)) throw Error(ErrorCode::kNonPositiveTruth, "true duration must be positive");
  return 1.0 - std::min(1.0, std::abs(d - d_hat) / d);
}

enum class DiscreteAction { kLike, kComment, kShare };
using ActionSet = std::set<DiscreteAction>;

inline ActionSet action_set(bool liked, bool commented, bool shared) {
  ActionSet s;
  if (liked) s.insert(DiscreteAction::kLike);
  if (commented) s.insert(DiscreteAction::kComment);
  if (shared) s.insert(DiscreteAction::kShare);
  return s;
}

inline ActionSet action_set(const ActionPrediction& a) {
  return action_set(a.liked, a.commented, a.shared);
}

inline ActionSet action_set(const ActionRecord& a) {
  return action_set(a.liked, a.commented, a.shared);
}

// Set F1; two empty sets agree perfectly.
inline double reward_action(const ActionSet& truth, const ActionSet& predicted) {
  if (truth.empty() && predicted.empty()) return 1.0;
  std::size_t hits = 0;
  for (auto a : predicted) hits += truth.count(a);
  if (hits == 0) return 0.0;
  const double precision = static_cast<double>(hits) / static_cast<double>(predicted.size());
  const double recall = static_cast<double>(hits) / static_cast<double>(truth.size());
  return 2.0 * precision * recall / (precision + recall);
}

inline int reward_format(std::string_view raw_reply) {
  return parse_policy_reply(raw_reply).has_value() ? 1 : 0;
}

struct RewardBreakdown {
  double r_action = 0.0;
  double r_duration = 0.0;
  double r_format = 0.0;

  double total() const { return r_action + r_duration + r_format; }
};

inline RewardBreakdown score_prediction(const ActionRecord& truth, const Prediction& pred) {
  return {reward_action(action_set(truth), action_set(pred.action)),
          reward_watch(truth.watch_duration_seconds, pred.action.watch_duration_seconds),
          static_cast<double>(pred.format_reward)};
}

struct EvaluationRow {
  std::string session_id;
  std::string video_id;
  std::string category;
  double true_duration = 0.0;
  double predicted_duration = 0.0;
  RewardBreakdown reward;
  bool fallback = false;
};

struct EvaluationResult {
  std::string persona_id;
  std::string policy_kind;
  std::string split;
  std::uint64_t seed = 0;
  std::size_t n = 0;
  double smape = 0.0;
  double mae = 0.0;
  RewardBreakdown mean_reward;
  std::size_t fallback_count = 0;
  std::vector<EvaluationRow> rows;
  std::vector<std::string> incidents;
};

// Scores `policy` on every record of the persona in `splits`, in canonical
// order. The observation carries the record's feed position within its
// session and its local hour.
inline EvaluationResult evaluate_policy(const Policy& policy, const PersonaProfile& persona,
                                        const Dataset& ds, const SplitSet& splits,
                                        std::uint64_t seed) {
  const auto recs = detail::persona_records(ds, persona.persona_id, splits);
  if (recs.empty()) {
    throw Error(ErrorCode::kNoRecordsInSplit,
                "no records for persona " + persona.persona_id + " in the requested split");
  }
  EvaluationResult out;
  out.persona_id = persona.persona_id;
  out.policy_kind = policy.kind();
  out.seed = seed;
  std::string split_names;
  for (Split s : splits) {
    if (!split_names.empty()) split_names += "+";
    split_names += to_string(s);
  }
  out.split = split_names;
  Rng rng(derive_seed(seed, 3));
  std::vector<double> y, y_hat, ra, rd, rf;
  for (const auto& fr : recs) {
    const TraceRecord& r = *fr.record;
    const auto feed_position = static_cast<std::size_t>(fr.record - fr.session->records.data()) + 1;
    Observation obs{r.video, feed_position,
                    local_hour(r.action.timestamp_ms, fr.session->utc_offset_minutes),
                    r.action.timestamp_ms};
    const Prediction pred = policy.predict(persona, obs, rng);
    EvaluationRow row{fr.session->session_id,
                      r.video.video_id,
                      r.video.category.full(),
                      r.action.watch_duration_seconds,
                      pred.action.watch_duration_seconds,
                      score_prediction(r.action, pred),
                      pred.fallback};
    if (pred.fallback) ++out.fallback_count;
    if (!pred.incident.empty()) out.incidents.push_back(r.video.video_id + ": " + pred.incident);
    y.push_back(row.true_duration);
    y_hat.push_back(row.predicted_duration);
    ra.push_back(row.reward.r_action);
    rd.push_back(row.reward.r_duration);
    rf.push_back(row.reward.r_format);
    out.rows.push_back(std::move(row));
  }
  out.n = out.rows.size();
  out.smape = smape(y, y_hat);
  out.mae = mae(y, y_hat);
  const double n = static_cast<double>(out.n);
  out.mean_reward = {compensated_sum(ra) / n, compensated_sum(rd) / n, compensated_sum(rf) / n};
  return out;
}

inline Json evaluation_summary_json(const EvaluationResult& r) {
  return Json{{"schema", kEvalSchema},
              {"persona_id", r.persona_id},
              {"policy", r.policy_kind},
              {"split", r.split},
              {"seed", r.seed},
              {"n", r.n},
              {"smape", r.smape},
              {"mae", r.mae},
              {"mean_reward",
               {{"r_action", r.mean_reward.r_action},
                {"r_duration", r.mean_reward.r_duration},
                {"r_format", r.mean_reward.r_format},
                {"total", r.mean_reward.total()}}},
              {"fallback_count", r.fallback_count},
              {"incidents", r.incidents}};
}

inline std::string evaluation_csv(const EvaluationResult& r) {
  std::ostringstream out;
  out << "session_id,video_id,category,true_duration_s,predicted_duration_s,r_action,r_duration,"
         "r_format,total,fallback\n";
  char buf[256];
  for (const auto& row : r.rows) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d", row.true_duration,
                  row.predicted_duration, row.reward.r_action, row.reward.r_duration,
                  row.reward.r_format, row.reward.total(), row.fallback ? 1 : 0);
    out << row.session_id << ',' << row.video_id << ',' << row.category << ',' << buf << '\n';
  }
  return out.str();
}

}  // namespace personaact
