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

// The personaact command line.
//
// Every command resolves one parameter document (flags > --config file >
// defaults), runs from that document alone, and writes it as config.json
// next to its outputs. `personaact --replay <dir>` re-runs a command from
// such a directory.

#pragma once

#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "httplib.h"
#include "personaact/audit.hpp"
#include "personaact/error.hpp"
#include "personaact/features.hpp"
#include "personaact/interview.hpp"
#include "personaact/interview_service.hpp"
#include "personaact/io.hpp"
#include "personaact/metrics.hpp"
#include "personaact/persona.hpp"
#include "personaact/policy.hpp"
#include "personaact/recsim.hpp"
#include "personaact/synthetic.hpp"
#include "personaact/trace.hpp"

namespace personaact::cli {

namespace fs = std::filesystem;

// A ConfigInvalid error that remembers which precondition it surfaces.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& message, std::optional<ErrorCode> cause = std::nullopt)
      : Error(ErrorCode::kConfigInvalid, message), cause_(cause) {}
  std::optional<ErrorCode> cause() const { return cause_; }

 private:
  std::optional<ErrorCode> cause_;
};

struct Param {
  std::string name;
  Json default_value;
  std::string help;
  bool is_path = false;
};

using Runner = std::function<Json(const Json& params, const fs::path& out)>;

struct Command {
  std::string name;
  std::string help;
  std::vector<Param> params;
  Runner run;
  bool writes_outputs = true;
};

inline fs::path persistence_root() {
  if (const char* home = std::getenv("PERSONAACT_HOME"); home != nullptr && *home != '\0') {
    return home;
  }
  if (const char* home = std::getenv("HOME"); home != nullptr && *home != '\0') {
    return fs::path(home) / ".personaact";
  }
  return ".personaact";
}

inline std::string flag_name(const std::string& param) {
  std::string s = param;
  for (char& c : s) {
    if (c == '_') c = '-';
  }
  return "--" + s;
}

// ---------------------------------------------------------------------------
// Parameter documents

namespace detail {

inline Json coerce(const Param& p, const Json& v) {
  const Json& d = p.default_value;
  auto bad = [&] {
    throw ConfigError("parameter " + p.name + " has the wrong type: " + v.dump());
  };
  if (d.is_boolean()) {
    if (!v.is_boolean()) bad();
    return v;
  }
  if (d.is_number_float()) {
    if (!v.is_number()) bad();
    return Json(v.get<double>());
  }
  if (d.is_number_unsigned()) {
    if (v.is_number_unsigned()) return v;
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return Json(v.get<std::uint64_t>());
    bad();
  }
  if (d.is_number_integer()) {
    if (!v.is_number_integer()) bad();
    return Json(v.get<std::int64_t>());
  }
  if (!v.is_string()) bad();
  return v;
}

inline Json parse_flag_value(const Param& p, const std::string& text) {
  const Json& d = p.default_value;
  try {
    std::size_t used = 0;
    if (d.is_number_float()) {
      const double x = std::stod(text, &used);
      if (used == text.size()) return Json(x);
    } else if (d.is_number_unsigned()) {
      if (!text.empty() && text[0] != '-') {
        const unsigned long long x = std::stoull(text, &used);
        if (used == text.size()) return Json(static_cast<std::uint64_t>(x));
      }
    } else if (d.is_number_integer()) {
      const long long x = std::stoll(text, &used);
      if (used == text.size()) return Json(static_cast<std::int64_t>(x));
    } else {
      return Json(text);
    }
  } catch (const std::exception&) {
  }
  throw ConfigError("cannot parse " + flag_name(p.name) + " value '" + text + "'");
}

inline const Param* find_param(const Command& cmd, const std::string& name) {
  for (const auto& p : cmd.params) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

// Defaults overlaid with `layer`; unknown keys are rejected.
inline Json overlay(const Command& cmd, Json base, const Json& layer) {
  if (!layer.is_object()) throw ConfigError("parameters must be an object");
  for (const auto& [k, v] : layer.items()) {
    const Param* p = find_param(cmd, k);
    if (p == nullptr) throw ConfigError("unknown parameter '" + k + "' for " + cmd.name);
    base[k] = coerce(*p, v);
  }
  return base;
}

inline Json defaults(const Command& cmd) {
  Json j = Json::object();
  for (const auto& p : cmd.params) j[p.name] = p.default_value;
  return j;
}

inline Json absolutize(const Command& cmd, Json params) {
  for (const auto& p : cmd.params) {
    if (!p.is_path) continue;
    const std::string s = params[p.name].get<std::string>();
    if (!s.empty()) params[p.name] = fs::absolute(s).lexically_normal().string();
  }
  return params;
}

}  // namespace detail

inline Json run_config_document(const Command& cmd, const Json& params) {
  return Json{{"schema", kRunConfigSchema}, {"command", cmd.name}, {"params", params}};
}

// Runs a command from a complete parameter document and records it.
inline Json execute(const Command& cmd, const Json& params, const fs::path& out) {
  Json summary = cmd.run(params, out);
  if (cmd.writes_outputs) {
    write_file_atomic(out / "config.json", dump_document(run_config_document(cmd, params)));
  }
  return summary;
}

// ---------------------------------------------------------------------------
// Shared inputs

namespace detail {

inline std::string str(const Json& p, const char* key) { return p.at(key).get<std::string>(); }
inline double num(const Json& p, const char* key) { return p.at(key).get<double>(); }
inline std::uint64_t u64(const Json& p, const char* key) { return p.at(key).get<std::uint64_t>(); }

inline void write_out(const fs::path& out, const std::string& name, const std::string& contents) {
  write_file_atomic(out / name, contents);
}

inline Param traces_param() { return {"traces", "", "trace file (personaact-trace/1)", true}; }
inline Param split_file_param() {
  return {"split_file", "", "split assignment from `split` (personaact-split/1)", true};
}

inline Dataset load_dataset(const Json& p) {
  const std::string traces = str(p, "traces");
  if (traces.empty()) throw ConfigError("--traces is required");
  Dataset ds = ingest_traces(traces);
  if (p.contains("split_file")) {
    const std::string split_file = str(p, "split_file");
    if (!split_file.empty()) apply_split_assignment(ds, read_document(split_file, kSplitSchema));
  }
  return ds;
}

inline SplitSet parse_split_set(const std::string& text) {
  if (text == "all") return all_splits();
  SplitSet out;
  std::stringstream in(text);
  std::string part;
  while (std::getline(in, part, '+')) {
    auto s = parse_split(part);
    if (!s) throw ConfigError("unknown split '" + part + "'");
    out.insert(*s);
  }
  if (out.empty()) throw ConfigError("empty split selection");
  return out;
}

inline std::string resolve_persona_id(const Dataset& ds, const std::string& requested) {
  if (!requested.empty()) {
    if (!ds.has_persona(requested)) {
      throw Error(ErrorCode::kUnknownPersona, "unknown persona " + requested);
    }
    return requested;
  }
  const auto ids = ds.persona_ids();
  if (ids.size() != 1) {
    throw ConfigError("--persona-id is required when the dataset holds several personas");
  }
  return ids.front();
}

inline PersonaProfile load_persona(const std::string& path, const BehavioralFeatures& features) {
  if (path.empty()) return neutral_persona(features);
  PersonaProfile p = persona_from_json(read_document(path, kPersonaSchema));
  if (p.persona_id != features.persona_id) {
    throw Error(ErrorCode::kPersonaMismatch,
                "persona file is for " + p.persona_id + ", not " + features.persona_id);
  }
  return p;
}

inline std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string part;
  while (std::getline(in, part, ',')) {
    if (!part.empty()) out.push_back(part);
  }
  return out;
}

// "3", "0-9" or "1,4,7".
inline std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  try {
    for (const auto& part : split_list(text)) {
      const auto dash = part.find('-');
      if (dash == std::string::npos) {
        out.push_back(std::stoull(part));
        continue;
      }
      const auto lo = std::stoull(part.substr(0, dash));
      const auto hi = std::stoull(part.substr(dash + 1));
      if (hi < lo || hi - lo > 100000) throw ConfigError("bad seed range " + part);
      for (auto s = lo; s <= hi; ++s) out.push_back(s);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    throw ConfigError("cannot parse seed list '" + text + "'");
  }
  return out;
}

inline std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& part : split_list(text)) {
    try {
      out.push_back(std::stod(part));
    } catch (const std::exception&) {
      throw ConfigError("cannot parse number '" + part + "'");
    }
  }
  return out;
}

inline std::vector<Param> catalog_params() {
  return {{"catalog", "", "catalog file (personaact-catalog/1); generated when empty", true},
          {"catalog_tops", std::uint64_t{20}, "generated catalog: top-level categories"},
          {"catalog_subs", std::uint64_t{3}, "generated catalog: sub-categories per top"},
          {"catalog_videos_per_top", std::uint64_t{50}, "generated catalog: videos per top"},
          {"catalog_seed", std::uint64_t{0}, "generated catalog: seed"}};
}

inline Catalog load_catalog(const Json& p) {
  const std::string file = str(p, "catalog");
  if (!file.empty()) return catalog_from_json(read_document(file, kCatalogSchema));
  CatalogSpec spec;
  spec.top_categories = u64(p, "catalog_tops");
  spec.subs_per_top = u64(p, "catalog_subs");
  spec.videos_per_top = u64(p, "catalog_videos_per_top");
  spec.seed = u64(p, "catalog_seed");
  return generate_catalog(spec);
}

inline std::vector<Param> platform_params() {
  const PlatformConfig d;
  return {{"eta", d.eta, "affinity learning rate"},
          {"epsilon", d.epsilon, "uniform exploration rate"},
          {"temperature", d.temperature, "softmax temperature"},
          {"like_bonus", d.like_bonus, "engagement bonus for a like"},
          {"share_bonus", d.share_bonus, "engagement bonus for a share"},
          {"decay_coupling", d.decay_coupling, "cross-category affinity decay"},
          {"initial_affinity", d.initial_affinity, "fresh-account affinity"}};
}

inline PlatformConfig load_platform_config(const Json& p) {
  PlatformConfig c;
  c.eta = num(p, "eta");
  c.epsilon = num(p, "epsilon");
  c.temperature = num(p, "temperature");
  c.like_bonus = num(p, "like_bonus");
  c.share_bonus = num(p, "share_bonus");
  c.decay_coupling = num(p, "decay_coupling");
  c.initial_affinity = num(p, "initial_affinity");
  validate(c);
  return c;
}

inline std::vector<Param> subject_params() {
  return {traces_param(),
          split_file_param(),
          {"persona_id", "", "persona to audit"},
          {"persona_file", "", "persona profile; neutral traits when empty", true},
          {"policy_file", "", "fitted policy from fit-policy; fitted on the fly when empty", true},
          {"favourites", "Gaming,Music,Food",
           "without --traces: favourite categories of the synthetic persona"}};
}

struct Subject {
  PersonaProfile persona;
  std::shared_ptr<const EmpiricalPolicy> policy;
};

// The audited user: fitted from traces, loaded, or synthesized over the catalog.
inline Subject load_subject(const Json& p, const Catalog& catalog, std::uint64_t seed) {
  const std::string policy_file = str(p, "policy_file");
  const std::string persona_file = str(p, "persona_file");
  Subject s;
  if (!policy_file.empty()) {
    s.policy = policy_from_json(read_document(policy_file, kPolicyModelSchema));
    if (persona_file.empty()) throw ConfigError("--policy-file needs --persona-file");
    s.persona = persona_from_json(read_document(persona_file, kPersonaSchema));
    if (s.persona.persona_id != s.policy->persona_id()) {
      throw Error(ErrorCode::kPersonaMismatch, "persona and policy files disagree");
    }
    return s;
  }
  Dataset ds;
  std::string persona_id;
  if (!str(p, "traces").empty()) {
    ds = load_dataset(p);
    persona_id = resolve_persona_id(ds, str(p, "persona_id"));
  } else {
    const auto favourites = split_list(str(p, "favourites"));
    persona_id = str(p, "persona_id").empty() ? "concentrated" : str(p, "persona_id");
    ds = synthesize_traces(catalog, concentrated_persona_spec(catalog, favourites, seed, persona_id));
  }
  const BehavioralFeatures f = compute_features(ds, persona_id);
  s.persona = load_persona(persona_file, f);
  s.policy = fit_empirical_policy(f, ds, seed);
  return s;
}

// Runs one cell per (eta, seed) when sweeping, otherwise a single run.
inline Json run_cells(const Command& cmd, const Json& p, const fs::path& out,
                      const std::function<Json(const Json&, const fs::path&)>& single) {
  const auto seeds = parse_seed_list(str(p, "seeds"));
  const auto etas = parse_double_list(str(p, "sweep_eta"));
  if (seeds.empty() && etas.empty()) return single(p, out);
  // Each cell records its own single-run config, so it replays on its own.
  const Command cell_cmd{cmd.name, cmd.help, cmd.params, single, true};
  Json cells = Json::array();
  const std::vector<double> eta_values = etas.empty() ? std::vector<double>{num(p, "eta")} : etas;
  const std::vector<std::uint64_t> seed_values =
      seeds.empty() ? std::vector<std::uint64_t>{u64(p, "seed")} : seeds;
  for (double eta : eta_values) {
    for (std::uint64_t seed : seed_values) {
      Json cell = p;
      cell["seeds"] = "";
      cell["sweep_eta"] = "";
      cell["seed"] = seed;
      cell["eta"] = eta;
      fs::path dir = out;
      if (!etas.empty()) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "eta-%g", eta);
        dir /= buf;
      }
      dir /= "seed-" + std::to_string(seed);
      Json summary = execute(cell_cmd, cell, dir);
      summary["dir"] = fs::relative(dir, out).string();
      cells.push_back(std::move(summary));
    }
  }
  Json doc{{"command", cmd.name}, {"cells", std::move(cells)}};
  write_out(out, "sweep.json", dump_document(doc));
  return doc;
}

inline void write_report(const fs::path& out, const AuditReport& r) {
  write_out(out, "report.json", dump_document(report_to_json(r)));
  write_out(out, "incidents.log", incidents_log(r));
  if (r.breadth) write_out(out, "breadth.csv", breadth_csv(*r.breadth));
}

inline std::vector<Param> with(std::vector<Param> a, const std::vector<Param>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Commands

inline std::vector<Command> commands() {
  using detail::num;
  using detail::str;
  using detail::u64;
  using detail::with;
  std::vector<Command> cmds;

  cmds.push_back(
      {"ingest",
       "validate a trace file and write its canonical form",
       {detail::traces_param(),
        {"schema", std::string(kTraceSchema), "expected header schema"},
        {"utc_offset_minutes", kDefaultUtcOffsetMinutes, "default session UTC offset"}},
       [](const Json& p, const fs::path& out) {
         if (str(p, "traces").empty()) throw ConfigError("--traces is required");
         const Dataset ds = ingest_traces(str(p, "traces"), str(p, "schema"),
                                          p.at("utc_offset_minutes").get<int>());
         detail::write_out(out, "dataset.jsonl", serialize_traces(ds));
         Json rejections = Json::array();
         for (const auto& r : ds.rejections) {
           rejections.push_back({{"line", r.line}, {"reason", r.reason}});
         }
         detail::write_out(out, "rejections.json", dump_document(rejections));
         return Json{{"sessions", ds.sessions.size()},
                     {"records", ds.record_count()},
                     {"rejected", ds.rejections.size()},
                     {"personas", ds.persona_ids()}};
       }});

  cmds.push_back(
      {"analyze",
       "compute behavioral features per persona",
       {detail::traces_param(),
        detail::split_file_param(),
        {"persona_id", "", "one persona; all when empty"},
        {"split", "train", "train | validation | test | all, or a+b"},
        {"exemplars", std::uint64_t{kDefaultExemplarCount}, "exemplars per kind"}},
       [](const Json& p, const fs::path& out) {
         const Dataset ds = detail::load_dataset(p);
         const SplitSet splits = detail::parse_split_set(str(p, "split"));
         std::vector<std::string> ids = ds.persona_ids();
         if (!str(p, "persona_id").empty()) ids = {detail::resolve_persona_id(ds, str(p, "persona_id"))};
         Json written = Json::array();
         for (const auto& id : ids) {
           const auto f = compute_features(ds, id, splits, u64(p, "exemplars"));
           const std::string name = "features-" + id + ".json";
           detail::write_out(out, name, dump_document(features_to_json(f)));
           written.push_back(name);
         }
         return Json{{"features", std::move(written)}};
       }});

  cmds.push_back(
      {"split",
       "assign sessions to train / validation / test per persona",
       {detail::traces_param(),
        {"train", 0.8, "train ratio"},
        {"validation", 0.1, "validation ratio"},
        {"test", 0.1, "test ratio"}},
       [](const Json& p, const fs::path& out) {
         const Dataset ds = split_sessions(detail::load_dataset(p),
                                           {num(p, "train"), num(p, "validation"), num(p, "test")});
         detail::write_out(out, "split.json", dump_document(split_assignment_json(ds)));
         return Json{{"train", ds.count_in(Split::kTrain)},
                     {"validation", ds.count_in(Split::kValidation)},
                     {"test", ds.count_in(Split::kTest)}};
       }});

  cmds.push_back(
      {"serve-interview",
       "run the interview HTTP service",
       {{"host", "127.0.0.1", "bind address"},
        {"port", 8080, "port; 0 picks a free one"},
        {"state_dir", "", "session persistence; $PERSONAACT_HOME/interviews when empty", true},
        {"data_dir", "", "root for features_ref / outline_ref; current directory when empty", true},
        {"generator_url", "", "optional external question generator"},
        {"summarizer_url", "", "optional external summarizer"}},
       [](const Json& p, const fs::path&) {
         InterviewServiceConfig c;
         c.state_dir = str(p, "state_dir").empty() ? persistence_root() / "interviews"
                                                   : fs::path(str(p, "state_dir"));
         c.data_dir = str(p, "data_dir").empty() ? fs::current_path() : fs::path(str(p, "data_dir"));
         if (!str(p, "generator_url").empty()) c.generator_endpoint = Endpoint::parse(str(p, "generator_url"));
         if (!str(p, "summarizer_url").empty()) c.summarizer_endpoint = Endpoint::parse(str(p, "summarizer_url"));
         InterviewService service(c);
         httplib::Server server;
         service.register_routes(server);
         int port = p.at("port").get<int>();
         const std::string host = str(p, "host");
         if (port == 0) {
           port = server.bind_to_any_port(host);
         } else if (!server.bind_to_port(host, port)) {
           throw Error(ErrorCode::kIoError, "cannot bind " + host + ":" + std::to_string(port));
         }
         if (port < 0) throw Error(ErrorCode::kIoError, "cannot bind " + host);
         std::cout << Json{{"listening", host + ":" + std::to_string(port)},
                           {"state_dir", c.state_dir.string()},
                           {"sessions", service.session_count()}}
                          .dump()
                   << std::endl;
         server.listen_after_bind();
         return Json{{"stopped", true}};
       },
       false});

  cmds.push_back(
      {"synthesize-persona",
       "turn a completed interview into a persona profile",
       {{"state", "", "interview state file (personaact-interview/1)", true},
        {"summarizer_url", "", "optional external summarizer"}},
       [](const Json& p, const fs::path& out) {
         if (str(p, "state").empty()) throw ConfigError("--state is required");
         const InterviewState st =
             state_from_json(read_document(str(p, "state"), kInterviewStateSchema));
         std::unique_ptr<HttpSummarizer> summarizer;
         InterviewOptions options;
         if (!str(p, "summarizer_url").empty()) {
           summarizer = std::make_unique<HttpSummarizer>(Endpoint::parse(str(p, "summarizer_url")));
           options.summarizer = summarizer.get();
         }
         const PersonaProfile persona = synthesize_persona(st, options);
         detail::write_out(out, "persona.json", dump_document(persona_to_json(persona)));
         return Json{{"persona_id", persona.persona_id},
                     {"novelty_tolerance", persona.traits.novelty_tolerance},
                     {"emotion_regulation", persona.traits.emotion_regulation}};
       }});

  cmds.push_back(
      {"fit-policy",
       "fit the empirical policy on a persona's train split",
       {detail::traces_param(),
        detail::split_file_param(),
        {"persona_id", "", "persona; required with several personas"},
        {"seed", std::uint64_t{0}, "policy seed"}},
       [](const Json& p, const fs::path& out) {
         const Dataset ds = detail::load_dataset(p);
         const std::string id = detail::resolve_persona_id(ds, str(p, "persona_id"));
         const auto f = compute_features(ds, id);
         const auto policy = fit_empirical_policy(f, ds, u64(p, "seed"));
         detail::write_out(out, "policy.json", dump_document(policy_to_json(*policy)));
         detail::write_out(out, "features.json", dump_document(features_to_json(f)));
         detail::write_out(out, "persona.json", dump_document(persona_to_json(neutral_persona(f))));
         return Json{{"persona_id", id}, {"train_records", f.total_samples}};
       }});

  cmds.push_back(
      {"evaluate",
       "score a policy against held-out traces",
       {detail::traces_param(),
        detail::split_file_param(),
        {"persona_id", "", "persona; required with several personas"},
        {"persona_file", "", "persona profile; neutral traits when empty", true},
        {"policy", "empirical", "empirical | replay | global-median"},
        {"policy_file", "", "fitted empirical policy; fitted on train when empty", true},
        {"split", "test", "split(s) to score"},
        {"seed", std::uint64_t{0}, "evaluation seed"}},
       [](const Json& p, const fs::path& out) {
         const Dataset ds = detail::load_dataset(p);
         const std::string id = detail::resolve_persona_id(ds, str(p, "persona_id"));
         const SplitSet splits = detail::parse_split_set(str(p, "split"));
         const std::string kind = str(p, "policy");
         // Features for the persona come from train; the replay oracle can
         // do without them when train is empty.
         BehavioralFeatures f;
         const bool has_train = !personaact::detail::persona_records(ds, id, {Split::kTrain}).empty();
         f = has_train ? compute_features(ds, id) : compute_features(ds, id, splits);
         const PersonaProfile persona = detail::load_persona(str(p, "persona_file"), f);
         std::shared_ptr<const Policy> policy;
         if (kind == "replay") {
           policy = std::make_shared<const ReplayPolicy>(ds, id);
         } else if (kind == "empirical" || kind == "global-median") {
           std::shared_ptr<const EmpiricalPolicy> fitted =
               str(p, "policy_file").empty()
                   ? fit_empirical_policy(f, ds, u64(p, "seed"))
                   : policy_from_json(read_document(str(p, "policy_file"), kPolicyModelSchema));
           if (kind == "empirical") {
             policy = fitted;
           } else {
             policy = global_median_policy(*fitted);
           }
         } else {
           throw ConfigError("unknown policy '" + kind + "'");
         }
         const EvaluationResult r = evaluate_policy(*policy, persona, ds, splits, u64(p, "seed"));
         detail::write_out(out, "eval.json", dump_document(evaluation_summary_json(r)));
         detail::write_out(out, "eval.csv", evaluation_csv(r));
         return Json{{"n", r.n},
                     {"smape", r.smape},
                     {"mae", r.mae},
                     {"mean_reward", r.mean_reward.total()}};
       }});

  // Audits share the subject, catalog and platform parameters.
  const std::vector<Param> audit_common = with(
      with(with(detail::subject_params(), detail::catalog_params()), detail::platform_params()),
      {{"seed", std::uint64_t{0}, "run seed"},
       {"seeds", "", "sweep: seed list such as 0-9 or 1,3,5"},
       {"sweep_eta", "", "sweep: comma-separated eta values"}});

  Command breadth{
      "audit-breadth",
      "category diversity in sliding exposure windows",
      with(audit_common, {{"steps", std::uint64_t{800}, "interactions"},
                          {"window", std::uint64_t{50}, "window length"},
                          {"stride", std::uint64_t{1}, "window stride"}}),
      nullptr};
  breadth.run = [breadth_cmd = breadth](const Json& p, const fs::path& out) mutable {
    if (u64(p, "window") == 0 || u64(p, "stride") == 0) {
      throw ConfigError("window and stride must be positive");
    }
    if (u64(p, "steps") < u64(p, "window")) {
      throw ConfigError("steps " + std::to_string(u64(p, "steps")) + " below window " +
                            std::to_string(u64(p, "window")),
                        ErrorCode::kStepsBelowWindow);
    }
    return detail::run_cells(breadth_cmd, p, out, [](const Json& c, const fs::path& dir) {
      const std::uint64_t seed = u64(c, "seed");
      auto catalog = std::make_shared<const Catalog>(detail::load_catalog(c));
      const auto subject = detail::load_subject(c, *catalog, seed);
      auto platform = make_simulated_platform(catalog, detail::load_platform_config(c), seed);
      AuditConfig ac;
      ac.steps = u64(c, "steps");
      ac.window = u64(c, "window");
      ac.stride = u64(c, "stride");
      ac.seed = seed;
      const AuditReport r = run_breadth(platform, *subject.policy, subject.persona, ac);
      detail::write_report(dir, r);
      Json s{{"seed", seed}, {"run_id", r.run_id}, {"failed", r.failed}};
      if (r.breadth) {
        s["first_windows_mean"] = head_mean(r.breadth->distinct_count, 5);
        s["last_windows_mean"] = tail_mean(r.breadth->distinct_count, 5);
      }
      return s;
    });
  };
  cmds.push_back(breadth);

  Command depth{
      "audit-depth",
      "bubble escape potential: cultivate, then reverse on the same account",
      with(audit_common,
           {{"phase_steps", std::uint64_t{400}, "interactions per phase"},
            {"reverse_discrete", false, "also reverse like / comment / share rates"},
            {"reversal_key", "global", "global | per_category training distribution"},
            {"weighting", "count", "count | watch_time | watched_only"}}),
      nullptr};
  depth.run = [depth_cmd = depth](const Json& p, const fs::path& out) mutable {
    if (u64(p, "phase_steps") == 0) throw ConfigError("phase_steps must be positive");
    const std::string key = str(p, "reversal_key");
    if (key != "global" && key != "per_category") {
      throw ConfigError("reversal_key must be global or per_category");
    }
    if (!parse_weighting(str(p, "weighting"))) throw ConfigError("unknown weighting");
    return detail::run_cells(depth_cmd, p, out, [](const Json& c, const fs::path& dir) {
      const std::uint64_t seed = u64(c, "seed");
      auto catalog = std::make_shared<const Catalog>(detail::load_catalog(c));
      const auto subject = detail::load_subject(c, *catalog, seed);
      auto platform = make_simulated_platform(catalog, detail::load_platform_config(c), seed);
      AuditConfig ac;
      ac.phase_steps = u64(c, "phase_steps");
      ac.seed = seed;
      ac.weighting = *parse_weighting(str(c, "weighting"));
      ac.reversal.reverse_discrete = c.at("reverse_discrete").get<bool>();
      ac.reversal.key = str(c, "reversal_key") == "global" ? ReversalConfig::Key::kGlobal
                                                           : ReversalConfig::Key::kPerCategory;
      const AuditReport r = run_depth(platform, subject.policy, subject.persona, ac);
      detail::write_report(dir, r);
      Json s{{"seed", seed}, {"run_id", r.run_id}, {"failed", r.failed}};
      if (r.depth) s["bep"] = r.depth->bep;
      return s;
    });
  };
  cmds.push_back(depth);

  cmds.push_back(
      {"gen-catalog",
       "synthesize a catalog",
       {{"tops", std::uint64_t{20}, "top-level categories"},
        {"subs", std::uint64_t{3}, "sub-categories per top"},
        {"videos_per_top", std::uint64_t{50}, "videos per top-level category"},
        {"length_median", 30.0, "median video length (s)"},
        {"length_log_sd", 0.6, "log-normal spread of lengths"},
        {"min_length", 5.0, "shortest video (s)"},
        {"max_length", 300.0, "longest video (s)"},
        {"seed", std::uint64_t{0}, "seed"}},
       [](const Json& p, const fs::path& out) {
         CatalogSpec spec;
         spec.top_categories = u64(p, "tops");
         spec.subs_per_top = u64(p, "subs");
         spec.videos_per_top = u64(p, "videos_per_top");
         spec.length_median_seconds = num(p, "length_median");
         spec.length_log_sd = num(p, "length_log_sd");
         spec.min_length_seconds = num(p, "min_length");
         spec.max_length_seconds = num(p, "max_length");
         spec.seed = u64(p, "seed");
         const Catalog c = generate_catalog(spec);
         detail::write_out(out, "catalog.json", dump_document(catalog_to_json(c)));
         return Json{{"videos", c.size()}, {"categories", c.top_categories().size()}};
       }});

  cmds.push_back(
      {"gen-traces",
       "synthesize traces for a persona with a few favourite categories",
       with(detail::catalog_params(),
            {{"persona_id", "concentrated", "persona id"},
             {"favourites", "Gaming,Music,Food", "favourite top-level categories"},
             {"sessions", std::uint64_t{20}, "sessions"},
             {"records_per_session", std::uint64_t{40}, "records per session"},
             {"seed", std::uint64_t{0}, "seed"}}),
       [](const Json& p, const fs::path& out) {
         const Catalog c = detail::load_catalog(p);
         SyntheticTraceSpec spec = concentrated_persona_spec(
             c, detail::split_list(str(p, "favourites")), u64(p, "seed"), str(p, "persona_id"));
         spec.sessions = u64(p, "sessions");
         spec.records_per_session = u64(p, "records_per_session");
         const Dataset ds = synthesize_traces(c, spec);
         detail::write_out(out, "traces.jsonl", serialize_traces(ds));
         return Json{{"sessions", ds.sessions.size()}, {"records", ds.record_count()}};
       }});

  return cmds;
}

// ---------------------------------------------------------------------------
// Entry point

inline Json error_json(const Error& e) {
  Json j{{"error_code", code_name(e.code())}, {"message", e.what()}};
  if (const auto* ce = dynamic_cast<const ConfigError*>(&e); ce != nullptr && ce->cause()) {
    j["cause"] = code_name(*ce->cause());
  }
  return j;
}

inline int exit_code_for(const Error& e) { return e.code() == ErrorCode::kConfigInvalid ? 2 : 1; }

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  const std::vector<Command> cmds = commands();
  CLI::App app{"personaact: persona-driven filter-bubble auditing"};
  app.require_subcommand(0, 1);
  std::string replay_dir;
  std::string replay_out;
  app.add_option("--replay", replay_dir, "re-run the command recorded in <dir>/config.json");
  app.add_option("--replay-out", replay_out, "output directory for --replay (default: <dir>)");

  struct Bound {
    CLI::App* app = nullptr;
    std::map<std::string, std::string> values;
    std::map<std::string, bool> flags;
    std::map<std::string, CLI::Option*> options;
    std::string config;
    std::string out;
  };
  std::vector<std::unique_ptr<Bound>> bound;
  for (const auto& cmd : cmds) {
    auto b = std::make_unique<Bound>();
    b->app = app.add_subcommand(cmd.name, cmd.help);
    b->app->add_option("--config", b->config, "JSON parameter file; flags override it");
    if (cmd.writes_outputs) {
      b->app->add_option("--out", b->out,
                         "output directory (default: $PERSONAACT_HOME/runs/<command>-<hash>)");
    }
    for (const auto& p : cmd.params) {
      std::string help = p.help + " [default: " +
                         (p.default_value.is_string() ? p.default_value.get<std::string>()
                                                      : p.default_value.dump()) +
                         "]";
      if (p.default_value.is_boolean()) {
        b->options[p.name] = b->app->add_flag(flag_name(p.name), b->flags[p.name], help);
      } else {
        b->options[p.name] = b->app->add_option(flag_name(p.name), b->values[p.name], help);
      }
    }
    bound.push_back(std::move(b));
  }

  try {
    try {
      app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
      return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
      return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
      throw ConfigError(e.what());
    }

    const Command* cmd = nullptr;
    Json params;
    fs::path out_dir;
    if (!replay_dir.empty()) {
      if (app.get_subcommands().size() > 0) throw ConfigError("--replay takes no subcommand");
      const Json doc = read_document(fs::path(replay_dir) / "config.json", kRunConfigSchema);
      const std::string name = doc.at("command").get<std::string>();
      for (const auto& c : cmds) {
        if (c.name == name) cmd = &c;
      }
      if (cmd == nullptr) throw ConfigError("unknown command '" + name + "' in replay config");
      params = detail::overlay(*cmd, detail::defaults(*cmd), doc.at("params"));
      out_dir = replay_out.empty() ? fs::path(replay_dir) : fs::path(replay_out);
    } else {
      if (app.get_subcommands().empty()) {
        err << app.help();
        throw ConfigError("a subcommand is required");
      }
      for (std::size_t i = 0; i < cmds.size(); ++i) {
        if (!bound[i]->app->parsed()) continue;
        cmd = &cmds[i];
        const Bound& b = *bound[i];
        params = detail::defaults(*cmd);
        if (!b.config.empty()) {
          Json file = parse_json(read_text_file(b.config), b.config);
          if (file.contains("params") && file.contains("command")) file = file["params"];
          params = detail::overlay(*cmd, params, file);
        }
        for (const auto& p : cmd->params) {
          if (b.options.at(p.name)->count() == 0) continue;
          params[p.name] = p.default_value.is_boolean()
                               ? Json(b.flags.at(p.name))
                               : detail::parse_flag_value(p, b.values.at(p.name));
        }
        params = detail::absolutize(*cmd, params);
        out_dir = b.out.empty() ? persistence_root() / "runs" /
                                      (cmd->name + "-" + fnv1a_hex(params.dump()).substr(0, 12))
                                : fs::path(b.out);
      }
    }
    Json summary = execute(*cmd, params, out_dir);
    if (cmd->writes_outputs) summary["out"] = fs::absolute(out_dir).lexically_normal().string();
    out << summary.dump(2) << std::endl;
    return 0;
  } catch (const Error& e) {
    err << error_json(e).dump() << std::endl;
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << error_json(Error(ErrorCode::kIoError, e.what())).dump() << std::endl;
    return 1;
  }
}

}  // namespace personaact::cli
