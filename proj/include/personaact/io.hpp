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

#include <atomic>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include <unistd.h>

#include "json.hpp"
#include "personaact/error.hpp"

namespace personaact {

using Json = nlohmann::json;

// Document schema tags.
inline constexpr std::string_view kTraceSchema = "personaact-trace/1";
inline constexpr std::string_view kOutlineSchema = "personaact-outline/1";
inline constexpr std::string_view kPersonaSchema = "personaact-persona/1";
inline constexpr std::string_view kFeaturesSchema = "personaact-features/1";
inline constexpr std::string_view kPolicyWireSchema = "personaact-policy/1";
inline constexpr std::string_view kPolicyModelSchema = "personaact-policy-model/1";
inline constexpr std::string_view kCatalogSchema = "personaact-catalog/1";
inline constexpr std::string_view kAuditSchema = "personaact-audit/1";
inline constexpr std::string_view kEvalSchema = "personaact-eval/1";
inline constexpr std::string_view kInterviewStateSchema = "personaact-interview/1";
inline constexpr std::string_view kSplitSchema = "personaact-split/1";
inline constexpr std::string_view kRunConfigSchema = "personaact-run/1";

inline std::string read_text_file(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw Error(ErrorCode::kFileNotFound, "no such file: " + path.string());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Writes to a sibling temp file and renames over the target, so readers
// never observe a partially written document.
inline void write_file_atomic(const std::filesystem::path& path,
                              std::string_view contents) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  static std::atomic<std::uint64_t> counter{0};
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid()) + "." +
         std::to_string(counter.fetch_add(1));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIoError, "cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::kIoError, "short write " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::kIoError, "cannot rename into " + path.string());
  }
}

// Canonical document text: two-space indent plus trailing newline.
inline std::string dump_document(const Json& doc) { return doc.dump(2) + "\n"; }

inline Json parse_json(std::string_view text, std::string_view what) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::kParseError,
                std::string(what) + ": " + e.what());
  }
}

inline Json read_document(const std::filesystem::path& path,
                          std::string_view expected_schema) {
  Json doc = parse_json(read_text_file(path), path.string());
  if (!doc.is_object() || !doc.contains("schema") ||
      doc["schema"] != expected_schema) {
    throw Error(ErrorCode::kSchemaMismatch,
                path.string() + ": expected schema " +
                    std::string(expected_schema));
  }
  return doc;
}

// 64-bit FNV-1a, rendered as 16 lowercase hex digits.
inline std::string fnv1a_hex(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace personaact
