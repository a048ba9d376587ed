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

// Empirical watch-duration distributions with a Hazen plotting-position CDF
// and its inverse. The i-th of n sorted samples sits at (i - 0.5) / n;
// between samples the CDF is linear. Tied samples share one knot at the
// mean of their positions, so the interpolant stays strictly increasing and
// invertible on [x_1, x_n].

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "personaact/error.hpp"
#include "personaact/io.hpp"

namespace personaact {

class HazenCdf {
 public:
  HazenCdf() = default;

  // `samples` need not be sorted; values must be positive and finite.
  explicit HazenCdf(std::vector<double> samples) : sorted_(std::move(samples)) {
    std::sort(sorted_.begin(), sorted_.end());
    if (sorted_.empty()) {
      throw Error(ErrorCode::kEmptyInput, "empirical distribution needs at least one sample");
    }
    if (!(sorted_.front() > 0.0) || !std::isfinite(sorted_.back())) {
      throw Error(ErrorCode::kNonPositiveDuration, "duration samples must be positive and finite");
    }
    const double n = static_cast<double>(sorted_.size());
    std::size_t i = 0;
    while (i < sorted_.size()) {
      std::size_t j = i;
      while (j + 1 < sorted_.size() && sorted_[j + 1] == sorted_[i]) ++j;
      // Mean of (k + 0.5) / n over 0-based k in [i, j].
      const double mid = 0.5 * static_cast<double>(i + j) + 0.5;
      knot_x_.push_back(sorted_[i]);
      knot_p_.push_back(mid / n);
      i = j + 1;
    }
    median_ = interpolate_inverse(0.5);
  }

  std::span<const double> samples() const { return sorted_; }
  std::size_t size() const { return sorted_.size(); }
  double min() const { return sorted_.front(); }
  double max() const { return sorted_.back(); }

  // Plotting-position quantile of a duration.
  double quantile_of(double d) const {
    if (!(d > 0.0)) throw Error(ErrorCode::kNonPositiveDuration, "duration must be positive");
    const double x0 = knot_x_.front();
    const double p0 = knot_p_.front();
    const double xn = knot_x_.back();
    const double pn = knot_p_.back();
    if (d < x0) return std::max(0.0, p0 * (d / x0));
    // Mirror of the lower tail: the gap to 1 shrinks like x_n / d.
    if (d > xn) return std::min(1.0, 1.0 - (1.0 - pn) * (xn / d));
    // Pinned so the median is an exact fixed point of reverse().
    if (d == median_) return 0.5;
    const auto it = std::lower_bound(knot_x_.begin(), knot_x_.end(), d);
    const std::size_t k = static_cast<std::size_t>(it - knot_x_.begin());
    if (knot_x_[k] == d) return knot_p_[k];
    const double xa = knot_x_[k - 1], xb = knot_x_[k];
    const double pa = knot_p_[k - 1], pb = knot_p_[k];
    return pa + (pb - pa) * ((d - xa) / (xb - xa));
  }

  // Inverse of the interpolated CDF, clamped to [x_1, x_n].
  double inverse_quantile(double q) const {
    if (!(q >= 0.0 && q <= 1.0)) {
      throw Error(ErrorCode::kInvalidQuantile, "quantile must lie in [0, 1]");
    }
    if (q == 0.5) return median_;
    return interpolate_inverse(q);
  }

  // F^{-1}(1 - F(d)): the duration at the mirrored quantile.
  double reverse(double d) const { return inverse_quantile(1.0 - quantile_of(d)); }

  bool operator==(const HazenCdf& o) const { return sorted_ == o.sorted_; }

 private:
  double interpolate_inverse(double q) const {
    if (q <= knot_p_.front()) return knot_x_.front();
    if (q >= knot_p_.back()) return knot_x_.back();
    const auto it = std::lower_bound(knot_p_.begin(), knot_p_.end(), q);
    const std::size_t k = static_cast<std::size_t>(it - knot_p_.begin());
    if (knot_p_[k] == q) return knot_x_[k];
    const double xa = knot_x_[k - 1], xb = knot_x_[k];
    const double pa = knot_p_[k - 1], pb = knot_p_[k];
    return xa + (xb - xa) * ((q - pa) / (pb - pa));
  }

  std::vector<double> sorted_;
  std::vector<double> knot_x_;
  std::vector<double> knot_p_;
  double median_ = 0.0;
};

// Watch-duration samples globally and per top-level category.
class EmpiricalDurationDistribution {
 public:
  EmpiricalDurationDistribution() = default;

  EmpiricalDurationDistribution(std::vector<double> global,
                                std::map<std::string, std::vector<double>> by_key)
      : global_(std::move(global)) {
    for (auto& [key, xs] : by_key) by_key_.emplace(key, HazenCdf(std::move(xs)));
  }

  const HazenCdf& global() const { return global_; }
  bool has_key(const std::string& key) const { return by_key_.contains(key); }
  const std::map<std::string, HazenCdf>& by_key() const { return by_key_; }

  // Per-key distribution, or the global one when the key was never seen.
  const HazenCdf& lookup(const std::optional<std::string>& key) const {
    if (key) {
      if (auto it = by_key_.find(*key); it != by_key_.end()) return it->second;
    }
    return global_;
  }

  std::size_t sample_count(const std::optional<std::string>& key) const {
    return lookup(key).size();
  }

  bool operator==(const EmpiricalDurationDistribution&) const = default;

 private:
  HazenCdf global_;
  std::map<std::string, HazenCdf> by_key_;
};

inline double quantile_of(const EmpiricalDurationDistribution& f,
                          const std::optional<std::string>& key, double d) {
  return f.lookup(key).quantile_of(d);
}

inline double inverse_quantile(const EmpiricalDurationDistribution& f,
                               const std::optional<std::string>& key, double q) {
  return f.lookup(key).inverse_quantile(q);
}

inline Json to_json(const EmpiricalDurationDistribution& f) {
  Json by_key = Json::object();
  for (const auto& [k, cdf] : f.by_key()) {
    by_key[k] = std::vector<double>(cdf.samples().begin(), cdf.samples().end());
  }
  return Json{{"global", std::vector<double>(f.global().samples().begin(), f.global().samples().end())},
              {"by_category", std::move(by_key)}};
}

inline EmpiricalDurationDistribution duration_distribution_from_json(const Json& j) {
  std::map<std::string, std::vector<double>> by_key;
  for (const auto& [k, xs] : j.at("by_category").items()) by_key[k] = xs.get<std::vector<double>>();
  return EmpiricalDurationDistribution(j.at("global").get<std::vector<double>>(), std::move(by_key));
}

}  // namespace personaact
