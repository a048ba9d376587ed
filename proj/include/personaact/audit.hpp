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

// Filter-bubble audits.
//
// Breadth: drive the platform for N steps and track the number of distinct
// category paths (and their entropy) in sliding windows over the exposure
// sequence. Depth: cultivate the account with a persona, then keep going
// on the same account with the reversed persona; the Jensen-Shannon
// divergence between the two phases' exposure distributions is the bubble
// escape potential (BEP).

#pragma once

#include <cstdio>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "personaact/distribution.hpp"
#include "personaact/error.hpp"
#include "personaact/io.hpp"
#include "personaact/persona.hpp"
#include "personaact/policy.hpp"
#include "personaact/random.hpp"
#include "personaact/recsim.hpp"
#include "personaact/trace.hpp"

namespace personaact {

enum class ExposureWeighting { kCount, kWatchTime, kWatchedOnly };

inline std::string_view to_string(ExposureWeighting w) {
  switch (w) {
    case ExposureWeighting::kCount: return "count";
    case ExposureWeighting::kWatchTime: return "watch_time";
    case ExposureWeighting::kWatchedOnly: return "watched_only";
  }
  return "count";
}

inline std::optional<ExposureWeighting> parse_weighting(std::string_view s) {
  if (s == "count") return ExposureWeighting::kCount;
  if (s == "watch_time") return ExposureWeighting::kWatchTime;
  if (s == "watched_only") return ExposureWeighting::kWatchedOnly;
  return std::nullopt;
}

// Completion ratio at which an exposure with no discrete action still
// counts as watched for the watched-only weighting.
inline constexpr double kWatchedCompletionRatio = 0.5;

// Simulated wall clock: 2024-01-01 12:00 UTC (20:00 local at UTC+8).
inline constexpr std::int64_t kSimulationEpochMs = 1704110400000;
// Gap between the end of one video and the next recommendation.
inline constexpr std::int64_t kSwipeGapMs = 1000;

struct AuditConfig {
  std::size_t steps = 800;  // breadth
  std::size_t window = 50;
  std::size_t stride = 1;
  std::size_t phase_steps = 400;  // depth, per phase
  std::uint64_t seed = 0;
  ExposureWeighting weighting = ExposureWeighting::kCount;
  ReversalConfig reversal;
};

struct BreadthCurve {
  std::vector<std::size_t> step_index;  // index of the last exposure in each window
  std::vector<std::size_t> distinct_count;
  std::vector<double> entropy;

  std::size_t size() const { return distinct_count.size(); }
};

struct DepthResult {
  CategoryDistribution phase_a;
  CategoryDistribution phase_b;
  double bep = 0.0;
};

struct AuditReport {
  std::string run_id;
  std::string mode;  // "breadth" or "depth"
  Json config;
  std::vector<std::string> exposures;  // full category paths, in order
  std::optional<BreadthCurve> breadth;
  std::optional<DepthResult> depth;
  std::vector<std::string> incidents;
  bool failed = false;
};

// Sliding-window distinct counts and entropies over an exposure sequence.
inline BreadthCurve sliding_window_curve(std::span<const std::string> seq, std::size_t window,
                                         std::size_t stride = 1) {
  if (window == 0 || stride == 0) {
    throw Error(ErrorCode::kConfigInvalid, "window and stride must be positive");
  }
  if (seq.size() < window) {
    throw Error(ErrorCode::kStepsBelowWindow, "exposure sequence of " + std::to_string(seq.size()) +
                                                  " is shorter than window " +
                                                  std::to_string(window));
  }
  BreadthCurve curve;
  for (std::size_t start = 0; start + window <= seq.size(); start += stride) {
    const auto d = category_distribution(seq.subspan(start, window));
    curve.step_index.push_back(start + window - 1);
    curve.distinct_count.push_back(d.probabilities.size());
    curve.entropy.push_back(entropy_bits(d));
  }
  return curve;
}

namespace detail {

struct Exposure {
  std::string path;
  double watch_seconds = 0.0;
  bool engaged = false;
};

// One user driving one platform account. The policy stream and the clock
// persist across phases so the depth protocol sees one continuous session.
class AuditDriver {
 public:
  AuditDriver(PlatformAdapter& platform, const PersonaProfile& persona, std::uint64_t seed,
              AuditReport& report)
      : platform_(platform),
        persona_(persona),
        rng_(derive_seed(seed, 2)),
        clock_ms_(kSimulationEpochMs),
        report_(report) {}

  std::vector<Exposure> run(const Policy& policy, std::size_t steps) {
    std::vector<Exposure> out;
    out.reserve(steps);
    for (std::size_t i = 0; i < steps; ++i, ++step_) {
      VideoMeta video;
      try {
        video = platform_.recommend();
      } catch (const std::exception& e) {
        incident("recommend failed: " + std::string(e.what()));
        continue;
      }
      Observation obs{video, step_ + 1, local_hour(clock_ms_, kDefaultUtcOffsetMinutes), clock_ms_};
      Prediction pred;
      try {
        pred = policy.predict(persona_, obs, rng_);
      } catch (const Error& e) {
        // Persona mismatches and similar are configuration errors.
        if (e.code() == ErrorCode::kPersonaMismatch) throw;
        incident("policy failed: " + std::string(e.what()));
      }
      if (!pred.incident.empty()) incident("policy: " + pred.incident);
      try {
        platform_.submit_feedback(pred.action);
      } catch (const std::exception& e) {
        incident("submit_feedback failed: " + std::string(e.what()));
      }
      const double ratio = video.length_seconds > 0.0
                               ? pred.action.watch_duration_seconds / video.length_seconds
                               : 0.0;
      const bool engaged = pred.action.liked || pred.action.commented || pred.action.shared ||
                           ratio >= kWatchedCompletionRatio;
      out.push_back({video.category.full(), pred.action.watch_duration_seconds, engaged});
      report_.exposures.push_back(out.back().path);
      clock_ms_ += static_cast<std::int64_t>(pred.action.watch_duration_seconds * 1000.0) +
                   kSwipeGapMs;
    }
    return out;
  }

 private:
  void incident(const std::string& what) {
    report_.incidents.push_back("step " + std::to_string(step_) + ": " + what);
  }

  PlatformAdapter& platform_;
  const PersonaProfile& persona_;
  Rng rng_;
  std::int64_t clock_ms_;
  std::size_t step_ = 0;
  AuditReport& report_;
};

inline CategoryDistribution exposure_distribution(const std::vector<Exposure>& xs,
                                                  ExposureWeighting w) {
  std::vector<std::string> paths;
  std::vector<double> weights;
  for (const auto& x : xs) {
    if (w == ExposureWeighting::kWatchedOnly && !x.engaged) continue;
    paths.push_back(x.path);
    weights.push_back(w == ExposureWeighting::kWatchTime ? x.watch_seconds : 1.0);
  }
  if (w == ExposureWeighting::kCount) return category_distribution(paths);
  return weighted_category_distribution(paths, weights);
}

inline std::string run_id(std::string_view mode, const Json& config) {
  return std::string(mode) + "-" + fnv1a_hex(config.dump());
}

inline Json base_config(std::string_view mode, const PlatformAdapter& platform,
                        const Policy& policy, const PersonaProfile& persona,
                        const AuditConfig& c) {
  Json j{{"mode", mode},
         {"seed", c.seed},
         {"platform", platform.describe()},
         {"policy", policy.kind()},
         {"persona_id", persona.persona_id},
         {"persona_hash", fnv1a_hex(persona_to_json(persona).dump())},
         {"weighting", to_string(c.weighting)}};
  return j;
}

}  // namespace detail

// The platform must be fresh. Exposures are recommended videos, all of them.
inline AuditReport run_breadth(PlatformAdapter& platform, const Policy& policy,
                               const PersonaProfile& persona, const AuditConfig& c) {
  if (c.window == 0 || c.stride == 0) {
    throw Error(ErrorCode::kConfigInvalid, "window and stride must be positive");
  }
  if (c.steps < c.window) {
    throw Error(ErrorCode::kStepsBelowWindow, "steps " + std::to_string(c.steps) +
                                                  " below window " + std::to_string(c.window));
  }
  AuditReport report;
  report.mode = "breadth";
  report.config = detail::base_config(report.mode, platform, policy, persona, c);
  report.config["steps"] = c.steps;
  report.config["window"] = c.window;
  report.config["stride"] = c.stride;
  report.run_id = detail::run_id(report.mode, report.config);
  detail::AuditDriver driver(platform, persona, c.seed, report);
  driver.run(policy, c.steps);
  try {
    report.breadth = sliding_window_curve(report.exposures, c.window, c.stride);
  } catch (const Error& e) {
    report.incidents.push_back(std::string("breadth curve unavailable: ") + e.what());
    report.failed = true;
  }
  return report;
}

// Phase A under `base`, then phase B under `reversed` on the same account.
inline AuditReport run_depth(PlatformAdapter& platform, const Policy& base,
                             const Policy& reversed, const PersonaProfile& persona,
                             const AuditConfig& c) {
  if (c.phase_steps == 0) throw Error(ErrorCode::kConfigInvalid, "phase_steps must be positive");
  AuditReport report;
  report.mode = "depth";
  report.config = detail::base_config(report.mode, platform, base, persona, c);
  report.config["phase_steps"] = c.phase_steps;
  report.config["reversed_policy"] = reversed.kind();
  report.config["reverse_discrete"] = c.reversal.reverse_discrete;
  report.config["reversal_key"] =
      c.reversal.key == ReversalConfig::Key::kGlobal ? "global" : "per_category";
  report.run_id = detail::run_id(report.mode, report.config);
  detail::AuditDriver driver(platform, persona, c.seed, report);
  const auto a = driver.run(base, c.phase_steps);
  const auto b = driver.run(reversed, c.phase_steps);
  try {
    DepthResult r;
    r.phase_a = detail::exposure_distribution(a, c.weighting);
    r.phase_b = detail::exposure_distribution(b, c.weighting);
    r.bep = js_divergence(r.phase_a, r.phase_b);
    report.depth = std::move(r);
  } catch (const Error& e) {
    report.incidents.push_back(std::string("BEP unavailable: ") + e.what());
    report.failed = true;
  }
  return report;
}

// Convenience for the common case: a reversed empirical policy built with
// the configured reversal options.
inline AuditReport run_depth(PlatformAdapter& platform,
                             const std::shared_ptr<const EmpiricalPolicy>& base,
                             const PersonaProfile& persona, const AuditConfig& c) {
  const auto reversed = reverse_persona(base, c.reversal);
  return run_depth(platform, *base, *reversed, persona, c);
}

// The platform stream is derived from the audit seed so one seed pins the
// whole run.
inline SimulatedPlatform make_simulated_platform(std::shared_ptr<const Catalog> catalog,
                                                 PlatformConfig config, std::uint64_t seed) {
  config.seed = derive_seed(seed, 1);
  return SimulatedPlatform(std::move(catalog), config);
}

// ---------------------------------------------------------------------------
// Serialization

inline Json report_to_json(const AuditReport& r) {
  Json j{{"schema", kAuditSchema},
         {"run_id", r.run_id},
         {"mode", r.mode},
         {"config", r.config},
         {"failed", r.failed},
         {"incidents", r.incidents}};
  if (r.breadth) {
    j["breadth"] = {{"step_index", r.breadth->step_index},
                    {"distinct_count", r.breadth->distinct_count},
                    {"entropy", r.breadth->entropy}};
  }
  if (r.depth) {
    j["depth"] = {{"phase_a", to_json(r.depth->phase_a)},
                  {"phase_b", to_json(r.depth->phase_b)},
                  {"bep", r.depth->bep}};
  }
  j["exposures"] = r.exposures;
  return j;
}

inline AuditReport report_from_json(const Json& j) {
  if (!j.is_object() || j.value("schema", std::string()) != kAuditSchema) {
    throw Error(ErrorCode::kSchemaMismatch, "expected an audit report document");
  }
  try {
    AuditReport r;
    r.run_id = j.at("run_id").get<std::string>();
    r.mode = j.at("mode").get<std::string>();
    r.config = j.at("config");
    r.failed = j.at("failed").get<bool>();
    r.incidents = j.at("incidents").get<std::vector<std::string>>();
    r.exposures = j.value("exposures", std::vector<std::string>{});
    if (auto it = j.find("breadth"); it != j.end()) {
      BreadthCurve c;
      c.step_index = it->at("step_index").get<std::vector<std::size_t>>();
      c.distinct_count = it->at("distinct_count").get<std::vector<std::size_t>>();
      c.entropy = it->at("entropy").get<std::vector<double>>();
      r.breadth = std::move(c);
    }
    if (auto it = j.find("depth"); it != j.end()) {
      DepthResult d;
      d.phase_a = distribution_from_json(it->at("phase_a"));
      d.phase_b = distribution_from_json(it->at("phase_b"));
      d.bep = it->at("bep").get<double>();
      r.depth = std::move(d);
    }
    return r;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("audit report: ") + e.what());
  }
}

// step_index,distinct_count,entropy
inline std::string breadth_csv(const BreadthCurve& c) {
  std::ostringstream out;
  out << "step_index,distinct_count,entropy\n";
  char buf[64];
  for (std::size_t i = 0; i < c.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", c.entropy[i]);
    out << c.step_index[i] << ',' << c.distinct_count[i] << ',' << buf << '\n';
  }
  return out.str();
}

inline std::string incidents_log(const AuditReport& r) {
  std::string out;
  for (const auto& s : r.incidents) out += s + "\n";
  return out;
}

// Mean over the first / last k curve points.
inline double head_mean(const std::vector<std::size_t>& xs, std::size_t k) {
  k = std::min(k, xs.size());
  double s = 0.0;
  for (std::size_t i = 0; i < k; ++i) s += static_cast<double>(xs[i]);
  return k ? s / static_cast<double>(k) : 0.0;
}

inline double tail_mean(const std::vector<std::size_t>& xs, std::size_t k) {
  k = std::min(k, xs.size());
  double s = 0.0;
  for (std::size_t i = xs.size() - k; i < xs.size(); ++i) s += static_cast<double>(xs[i]);
  return k ? s / static_cast<double>(k) : 0.0;
}

}  // namespace personaact
