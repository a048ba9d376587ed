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

// Acceptance suite: one line per criterion, nonzero exit on any failure.
// Audits and the replay checks go through the CLI binary.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "personaact/personaact.hpp"
#include "test_support.hpp"

namespace personaact {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, a);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct CliRun {
  int code = -1;
  std::string out;
};

// Runs the CLI; stderr is folded into the captured output.
CliRun cli(const std::string& args) {
  const std::string cmd = std::string(PERSONAACT_CLI_PATH) + " " + args + " 2>&1";
  CliRun r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof(buf), pipe)) > 0) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

// Reference JS divergence in bits.
double js_bits(const std::map<std::string, double>& p, const std::map<std::string, double>& r) {
  std::set<std::string> keys;
  for (const auto& [k, _] : p) keys.insert(k);
  for (const auto& [k, _] : r) keys.insert(k);
  double a = 0.0, b = 0.0;
  for (const auto& k : keys) {
    const double x = p.count(k) ? p.at(k) : 0.0;
    const double y = r.count(k) ? r.at(k) : 0.0;
    const double m = 0.5 * (x + y);
    if (x > 0) a += x * std::log2(x / m);
    if (y > 0) b += y * std::log2(y / m);
  }
  return 0.5 * (a + b);
}

CategoryDistribution dist(std::map<std::string, double> p) {
  CategoryDistribution d;
  d.probabilities = std::move(p);
  return d;
}

// Exact one-sided rank-sum p-value P(W >= w_obs) for sample `x` against `y`.
// Mid-ranks for ties; the null distribution enumerates rank subsets.
double rank_sum_p_greater(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<std::pair<double, int>> all;
  for (double v : x) all.push_back({v, 0});
  for (double v : y) all.push_back({v, 1});
  std::sort(all.begin(), all.end());
  const std::size_t n = all.size();
  std::vector<int> twice_rank(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && all[j + 1].first == all[i].first) ++j;
    for (std::size_t k = i; k <= j; ++k) twice_rank[k] = static_cast<int>(i + j + 2);
    i = j + 1;
  }
  int w_obs = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (all[i].second == 0) w_obs += twice_rank[i];
  }
  // ways[k][s]: subsets of size k with doubled rank sum s.
  const int max_sum = 2 * static_cast<int>(n * (n + 1));
  const std::size_t m = x.size();
  std::vector<std::vector<double>> ways(m + 1, std::vector<double>(max_sum + 1, 0.0));
  ways[0][0] = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = std::min(m, i + 1); k >= 1; --k) {
      for (int s = max_sum; s >= twice_rank[i]; --s) ways[k][s] += ways[k - 1][s - twice_rank[i]];
    }
  }
  double total = 0.0, tail = 0.0;
  for (int s = 0; s <= max_sum; ++s) {
    total += ways[m][s];
    if (s >= w_obs) tail += ways[m][s];
  }
  return tail / total;
}

// ---------------------------------------------------------------------------

Outcome metric_oracles() {
  const auto t0 = Clock::now();
  std::vector<std::string> bad;
  auto check = [&](bool ok, const std::string& what) {
    if (!ok) bad.push_back(what);
  };
  const std::vector<double> ten = {10.0}, five = {5.0};
  check(std::abs(smape(ten, five) - 0.666667) <= 1e-6, "smape([10],[5]) vs 0.666667");
  check(std::abs(smape(ten, five) - 5.0 / 7.5) <= 1e-9, "smape([10],[5]) vs 2*5/15");
  const std::vector<double> ys = {1.0, 7.5, 30.0, 120.6};
  check(smape(ys, ys) == 0.0, "smape identity");
  check(smape(ys, std::vector<double>(ys.size(), 0.0)) == 2.0, "smape zero policy");
  check(reward_watch(10, 10) == 1.0, "reward_watch(10,10)");
  check(reward_watch(10, 5) == 0.5, "reward_watch(10,5)");
  check(reward_watch(10, 25) == 0.0, "reward_watch(10,25)");
  const auto p = dist({{"a", 0.5}, {"b", 0.5}});
  const auto r = dist({{"a", 1.0}});
  check(js_divergence(p, p) == 0.0, "js(P,P)");
  check(js_divergence(dist({{"a", 1.0}}), dist({{"b", 1.0}})) == 1.0, "js disjoint");
  check(std::abs(js_divergence(p, r) - 0.311278) <= 1e-6, "js worked value");
  check(std::abs(js_divergence(p, r) - js_bits(p.probabilities, r.probabilities)) <= 1e-12,
        "js vs reference");
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    std::map<std::string, double> a, b;
    double sa = 0, sb = 0;
    for (int k = 0; k < 8; ++k) {
      const std::string key(1, static_cast<char>('a' + k));
      if (u(gen) < 0.7) sa += a[key] = u(gen);
      if (u(gen) < 0.7) sb += b[key] = u(gen);
    }
    if (a.empty() || b.empty()) continue;
    for (auto& [_, v] : a) v /= sa;
    for (auto& [_, v] : b) v /= sb;
    worst = std::max(worst, std::abs(js_divergence(dist(a), dist(b)) - js_divergence(dist(b), dist(a))));
  }
  check(worst <= 1e-15, "js symmetry");
  const double secs = seconds_since(t0);
  check(secs < 1.0, "runtime");
  std::string detail = bad.empty() ? "all exact values hold" : "failed:";
  for (const auto& b : bad) detail += " " + b + ";";
  return {bad.empty(), detail + " (" + fmt("%.3f", secs) + " s)"};
}

Outcome quantile_reversal() {
  const auto t0 = Clock::now();
  std::mt19937_64 gen(20260101);
  std::uniform_int_distribution<int> size(5, 500);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_sum = 0.0, worst_round = 0.0;
  int median_misses = 0;
  for (int t = 0; t < 1000; ++t) {
    const int n = size(gen);
    // A mix of shapes: log-normal, uniform, and a two-mode mixture.
    std::vector<double> xs(n);
    const int shape = t % 3;
    std::lognormal_distribution<double> ln(std::log(5.0 + 50.0 * u(gen)), 0.2 + 1.2 * u(gen));
    for (auto& x : xs) {
      if (shape == 0) {
        x = 0.5 + ln(gen);
      } else if (shape == 1) {
        x = 0.5 + 300.0 * u(gen);
      } else {
        x = u(gen) < 0.6 ? 1.0 + 4.0 * u(gen) : 40.0 + 80.0 * u(gen);
      }
    }
    const HazenCdf cdf(xs);
    const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
    const double range = *hi - *lo;
    for (double d : xs) {
      const double rev = cdf.reverse(d);
      worst_sum = std::max(worst_sum, std::abs(cdf.quantile_of(d) + cdf.quantile_of(rev) - 1.0));
      worst_round = std::max(worst_round, std::abs(cdf.reverse(rev) - d) / range);
    }
    const double median = cdf.inverse_quantile(0.5);
    if (cdf.reverse(median) != median) ++median_misses;
  }
  const double secs = seconds_since(t0);
  const bool pass = worst_sum <= 1e-9 && worst_round <= 1e-6 && median_misses == 0 && secs < 10.0;
  return {pass, "max |q(d)+q(rev(d))-1| = " + fmt("%.3g", worst_sum) +
                    ", max |rev(rev(d))-d|/range = " + fmt("%.3g", worst_round) +
                    ", median misses = " + std::to_string(median_misses) + " (" +
                    fmt("%.2f", secs) + " s)"};
}

Outcome breadth(const fs::path& work) {
  const auto t0 = Clock::now();
  const fs::path out = work / "breadth";
  const auto r = cli("audit-breadth --eta 0.2 --epsilon 0.1 --temperature 1 --catalog-tops 20 "
                     "--catalog-videos-per-top 50 --favourites Gaming,Music,Food --steps 800 "
                     "--window 50 --seeds 0-9 --out " + q(out));
  const double secs = seconds_since(t0);
  if (r.code != 0) return {false, "audit-breadth exited " + std::to_string(r.code) + ": " + r.out};
  const Json sweep = Json::parse(slurp(out / "sweep.json"));
  int declines = 0;
  std::string per_seed;
  for (const auto& cell : sweep.at("cells")) {
    const double first = cell.at("first_windows_mean").get<double>();
    const double last = cell.at("last_windows_mean").get<double>();
    const double drop = 1.0 - last / first;
    if (drop >= 0.15) ++declines;
    per_seed += " " + fmt("%.0f%%", 100.0 * drop);
  }
  const bool pass = declines >= 8 && secs < 120.0;
  return {pass, std::to_string(declines) + "/10 seeds decline >= 15% (drops:" + per_seed + ") (" +
                    fmt("%.1f", secs) + " s)"};
}

Outcome depth(const fs::path& work) {
  const auto t0 = Clock::now();
  const fs::path out = work / "depth";
  const auto r = cli("audit-depth --epsilon 0.1 --temperature 1 --catalog-tops 20 "
                     "--catalog-videos-per-top 50 --favourites Gaming,Music,Food "
                     "--phase-steps 400 --reverse-discrete --seeds 0-9 --sweep-eta 0.05,0.3,0 "
                     "--out " + q(out));
  if (r.code != 0) return {false, "audit-depth exited " + std::to_string(r.code) + ": " + r.out};
  std::map<double, std::vector<double>> bep;
  const Json sweep = Json::parse(slurp(out / "sweep.json"));
  for (const auto& cell : sweep.at("cells")) {
    const Json cfg = Json::parse(slurp(out / cell.at("dir").get<std::string>() / "config.json"));
    bep[cfg.at("params").at("eta").get<double>()].push_back(cell.at("bep").get<double>());
  }
  const auto mean = [](const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
  };
  const double p_value = rank_sum_p_greater(bep[0.3], bep[0.05]);

  // Null band: JS between two independent 400-draw samples of the exposure
  // distribution a non-adapting platform produces (uniform over videos).
  CatalogSpec spec;
  spec.top_categories = 20;
  spec.subs_per_top = 3;
  spec.videos_per_top = 50;
  spec.seed = 0;
  const Catalog catalog = generate_catalog(spec);
  std::vector<std::string> paths;
  std::vector<double> weights;
  for (const auto& v : catalog.videos()) {
    paths.push_back(v.category.full());
    weights.push_back(1.0);
  }
  std::mt19937_64 gen(99);
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
  std::vector<double> null_js;
  for (int t = 0; t < 1000; ++t) {
    std::map<std::string, double> a, b;
    for (int k = 0; k < 400; ++k) a[paths[pick(gen)]] += 1.0 / 400.0;
    for (int k = 0; k < 400; ++k) b[paths[pick(gen)]] += 1.0 / 400.0;
    null_js.push_back(js_bits(a, b));
  }
  std::sort(null_js.begin(), null_js.end());
  const double lo = null_js[4], hi = null_js[994];
  int inside = 0;
  for (double b : bep[0.0]) inside += (b >= lo && b <= hi) ? 1 : 0;
  const double secs = seconds_since(t0);
  const bool pass = bep[0.3].size() == 10 && bep[0.05].size() == 10 && bep[0.0].size() == 10 &&
                    mean(bep[0.3]) > mean(bep[0.05]) && p_value < 0.05 && inside == 10 &&
                    secs < 300.0;
  return {pass, "mean BEP eta=0.3 " + fmt("%.4f", mean(bep[0.3])) + " vs eta=0.05 " +
                    fmt("%.4f", mean(bep[0.05])) + ", exact rank-sum p = " + fmt("%.2g", p_value) +
                    "; eta=0 mean " + fmt("%.4f", mean(bep[0.0])) + ", " + std::to_string(inside) +
                    "/10 inside null 99% band [" + fmt("%.4f", lo) + ", " + fmt("%.4f", hi) +
                    "] (" + fmt("%.1f", secs) + " s)"};
}

Outcome dataset_plumbing() {
  const auto t0 = Clock::now();
  const Dataset split = split_sessions(fixtures::dataset_of(fixtures::daily_sessions("p", 19)),
                                       SplitRatios{0.8, 0.1, 0.1});
  const std::size_t tr = split.count_in(Split::kTrain), va = split.count_in(Split::kValidation),
                    te = split.count_in(Split::kTest);
  const auto f = compute_features(fixtures::dataset_of(fixtures::persona_a_rows()), "A", all_splits());
  const double secs = seconds_since(t0);
  const bool pass = tr == 15 && va == 2 && te == 2 && f.duration_stats.median == 5.0 &&
                    std::abs(f.duration_stats.mean - 7.8) <= 1e-9 &&
                    fmt("%.1f", f.duration_stats.mean) == "7.8" && secs < 1.0;
  return {pass, "19 sessions -> " + std::to_string(tr) + "/" + std::to_string(va) + "/" +
                    std::to_string(te) + "; Persona A mean " + fmt("%.12g", f.duration_stats.mean) +
                    ", median " + fmt("%.12g", f.duration_stats.median) + " (" +
                    fmt("%.3f", secs) + " s)"};
}

// Category-dependent duration modes an order of magnitude apart: any
// per-category predictor beats one global constant.
SyntheticTraceSpec modal_spec(std::uint64_t seed) {
  SyntheticTraceSpec spec;
  spec.persona_id = "modal";
  spec.seed = seed;
  spec.sessions = 20;
  spec.records_per_session = 30;
  spec.by_category["Entertainment"] = {3.0, 0.15, 0.1, 0.0, 0.0, 1.0};
  spec.by_category["Knowledge"] = {25.0, 0.15, 0.3, 0.1, 0.0, 1.0};
  spec.by_category["Gaming"] = {90.0, 0.15, 0.6, 0.1, 0.3, 1.0};
  spec.by_category["Life"] = {200.0, 0.15, 0.8, 0.2, 0.4, 1.0};
  return spec;
}

Catalog modal_catalog() {
  CatalogSpec c;
  c.top_categories = 4;
  c.subs_per_top = 2;
  c.videos_per_top = 20;
  c.max_length_seconds = 300.0;
  return generate_catalog(c);
}

Outcome fidelity(const fs::path& work) {
  const Catalog catalog = modal_catalog();
  int wins = 0;
  std::string per_seed;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Dataset ds = split_sessions(synthesize_traces(catalog, modal_spec(seed)));
    const auto f = compute_features(ds, "modal");
    const auto persona = neutral_persona(f);
    const auto fitted = fit_empirical_policy(f, ds, seed);
    const auto baseline = global_median_policy(*fitted);
    const SplitSet test = {Split::kTest};
    const double e = evaluate_policy(*fitted, persona, ds, test, seed).smape;
    const double g = evaluate_policy(*baseline, persona, ds, test, seed).smape;
    if (e < g) ++wins;
    per_seed += " " + fmt("%.3f", e) + "<" + fmt("%.3f", g);
  }

  // Ground-truth replay end to end through the CLI.
  const fs::path traces = work / "modal.jsonl";
  {
    std::ofstream out(traces, std::ios::binary);
    out << serialize_traces(synthesize_traces(catalog, modal_spec(0)));
  }
  std::string replay = "replay via CLI failed";
  bool replay_ok = false;
  const auto sp = cli("split --traces " + q(traces) + " --out " + q(work / "modal-split"));
  if (sp.code == 0) {
    const auto ev = cli("evaluate --traces " + q(traces) + " --split-file " +
                        q(work / "modal-split" / "split.json") +
                        " --policy replay --split all --out " + q(work / "modal-replay"));
    if (ev.code == 0) {
      const Json s = Json::parse(slurp(work / "modal-replay" / "eval.json"));
      const double sm = s.at("smape").get<double>();
      const double rw = s.at("mean_reward").at("total").get<double>();
      replay_ok = sm == 0.0 && rw == 3.0;
      replay = "CLI replay smape " + fmt("%g", sm) + ", mean reward " + fmt("%g", rw);
    } else {
      replay = "evaluate exited " + std::to_string(ev.code) + ": " + ev.out;
    }
  }
  return {wins == 10 && replay_ok, std::to_string(wins) +
                                       "/10 seeds empirical < global-median smape (" +
                                       per_seed.substr(1) + "); " + replay};
}

Outcome replay_determinism(const fs::path& work) {
  std::vector<std::string> bad;
  auto compare = [&](const std::string& label, const fs::path& dir, const std::string& doc) {
    const fs::path again = work / (dir.filename().string() + "-replayed");
    const auto r = cli("--replay " + q(dir) + " --replay-out " + q(again));
    if (r.code != 0) {
      bad.push_back(label + " replay exited " + std::to_string(r.code));
    } else if (slurp(dir / doc) != slurp(again / doc) || slurp(dir / doc).empty()) {
      bad.push_back(label + " " + doc + " differs");
    }
  };
  const fs::path b = work / "breadth" / "seed-3";
  const fs::path d = work / "depth" / "eta-0.3" / "seed-7";
  const fs::path e = work / "modal-replay";
  compare("breadth audit", b, "report.json");
  compare("breadth audit", b, "breadth.csv");
  compare("depth audit", d, "report.json");
  compare("replay evaluation", e, "eval.json");
  // An empirical evaluation uses its seed.
  const fs::path traces = work / "modal.jsonl";
  const auto ev = cli("evaluate --traces " + q(traces) + " --split-file " +
                      q(work / "modal-split" / "split.json") + " --seed 5 --out " +
                      q(work / "modal-empirical"));
  if (ev.code != 0) {
    bad.push_back("empirical evaluation exited " + std::to_string(ev.code));
  } else {
    compare("empirical evaluation", work / "modal-empirical", "eval.json");
    compare("empirical evaluation", work / "modal-empirical", "eval.csv");
  }
  std::string detail = "audit and evaluation reports byte-identical on replay";
  if (!bad.empty()) {
    detail = "failed:";
    for (const auto& s : bad) detail += " " + s + ";";
  }
  return {bad.empty(), detail};
}

int run() {
  fixtures::TempDir work;
  setenv("PERSONAACT_HOME", (work / "home").c_str(), 1);
  int failures = 0;
  auto report = [&](const std::string& name, const std::function<Outcome()>& fn) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << name << ": " << o.detail << std::endl;
  };
  report("metric oracles", metric_oracles);
  report("quantile reversal", quantile_reversal);
  report("breadth protocol", [&] { return breadth(work.path()); });
  report("depth protocol", [&] { return depth(work.path()); });
  report("dataset plumbing", dataset_plumbing);
  report("fidelity sanity", [&] { return fidelity(work.path()); });
  report("replay determinism", [&] { return replay_determinism(work.path()); });
  std::cout << (failures == 0 ? "all criteria pass" : std::to_string(failures) + " criteria fail")
            << std::endl;
  return failures == 0 ? 0 : 1;
}

}  // namespace
}  // namespace personaact

int main() { return personaact::run(); }
