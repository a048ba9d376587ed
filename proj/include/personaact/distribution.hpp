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
#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "personaact/error.hpp"
#include "personaact/io.hpp"

namespace personaact {

inline constexpr double kNormalizationTolerance = 1e-9;

// Empirical distribution over category paths. A default-constructed value
// is the "empty" distribution (no observations); every other value is
// normalized and only holds strictly positive probabilities.
struct CategoryDistribution {
  std::map<std::string, double> probabilities;
  std::size_t count_basis = 0;

  bool empty() const { return probabilities.empty(); }

  double probability(const std::string& path) const {
    auto it = probabilities.find(path);
    return it == probabilities.end() ? 0.0 : it->second;
  }

  double total() const {
    double s = 0.0;
    for (const auto& [_, p] : probabilities) s += p;
    return s;
  }

  bool normalized() const {
    if (empty()) return false;
    for (const auto& [_, p] : probabilities) {
      if (!(p >= 0.0) || p > 1.0) return false;
    }
    return std::abs(total() - 1.0) <= kNormalizationTolerance;
  }

  // Entries sorted by descending probability, ties by path.
  std::vector<std::pair<std::string, double>> ranked() const {
    std::vector<std::pair<std::string, double>> out(probabilities.begin(),
                                                    probabilities.end());
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
      return a.second > b.second;
    });
    return out;
  }

  bool operator==(const CategoryDistribution&) const = default;
};

// Relative frequencies of the given paths.
inline CategoryDistribution category_distribution(std::span<const std::string> exposures) {
  if (exposures.empty()) {
    throw Error(ErrorCode::kEmptyExposureList, "cannot build a distribution from no exposures");
  }
  std::map<std::string, std::size_t> counts;
  for (const auto& e : exposures) ++counts[e];
  CategoryDistribution d;
  d.count_basis = exposures.size();
  const double n = static_cast<double>(exposures.size());
  for (const auto& [path, c] : counts) d.probabilities[path] = static_cast<double>(c) / n;
  return d;
}

// Weighted variant; weights must be non-negative with a positive total.
// count_basis is still the number of exposures.
inline CategoryDistribution weighted_category_distribution(
    std::span<const std::string> exposures, std::span<const double> weights) {
  if (exposures.empty()) {
    throw Error(ErrorCode::kEmptyExposureList, "cannot build a distribution from no exposures");
  }
  if (weights.size() != exposures.size()) {
    throw Error(ErrorCode::kLengthMismatch, "one weight per exposure required");
  }
  std::map<std::string, double> mass;
  double total = 0.0;
  for (std::size_t i = 0; i < exposures.size(); ++i) {
    if (!(weights[i] >= 0.0)) {
      throw Error(ErrorCode::kUnnormalizedInput, "negative exposure weight");
    }
    mass[exposures[i]] += weights[i];
    total += weights[i];
  }
  if (!(total > 0.0)) {
    throw Error(ErrorCode::kUnnormalizedInput, "exposure weights sum to zero");
  }
  CategoryDistribution d;
  d.count_basis = exposures.size();
  for (const auto& [path, m] : mass) {
    if (m > 0.0) d.probabilities[path] = m / total;
  }
  return d;
}

// Shannon entropy in bits.
inline double entropy_bits(const CategoryDistribution& d) {
  double h = 0.0;
  for (const auto& [_, p] : d.probabilities) {
    if (p > 0.0) h -= p * std::log2(p);
  }
  return h;
}

// Jensen-Shannon divergence with base-2 logarithms, so the result lies in
// [0, 1]. The two KL terms are accumulated per support element in a fixed
// key order and combined symmetrically, which makes js(P, Q) and js(Q, P)
// bit-identical.
inline double js_divergence(const CategoryDistribution& p, const CategoryDistribution& q) {
  if (!p.normalized() || !q.normalized()) {
    throw Error(ErrorCode::kUnnormalizedInput, "js_divergence needs normalized inputs");
  }
  auto term = [](double a, double m) { return a > 0.0 ? a * std::log2(a / m) : 0.0; };
  double sum = 0.0;
  auto ip = p.probabilities.begin();
  auto iq = q.probabilities.begin();
  while (ip != p.probabilities.end() || iq != q.probabilities.end()) {
    double a = 0.0;
    double b = 0.0;
    if (iq == q.probabilities.end() ||
        (ip != p.probabilities.end() && ip->first < iq->first)) {
      a = (ip++)->second;
    } else if (ip == p.probabilities.end() || iq->first < ip->first) {
      b = (iq++)->second;
    } else {
      a = (ip++)->second;
      b = (iq++)->second;
    }
    const double m = 0.5 * (a + b);
    // Ordering the pair makes the per-element contribution operand-order
    // independent.
    const double lo = std::min(a, b);
    const double hi = std::max(a, b);
    sum += term(lo, m) + term(hi, m);
  }
  return std::clamp(0.5 * sum, 0.0, 1.0);
}

inline Json to_json(const CategoryDistribution& d) {
  Json probs = Json::object();
  for (const auto& [path, p] : d.probabilities) probs[path] = p;
  return Json{{"count_basis", d.count_basis}, {"probabilities", std::move(probs)}};
}

inline CategoryDistribution distribution_from_json(const Json& j) {
  CategoryDistribution d;
  d.count_basis = j.at("count_basis").get<std::size_t>();
  for (const auto& [path, p] : j.at("probabilities").items()) {
    d.probabilities[path] = p.get<double>();
  }
  return d;
}

}  // namespace personaact
