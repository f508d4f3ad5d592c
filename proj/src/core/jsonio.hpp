#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace peril {

using Json = nlohmann::json;

// Whole-file JSON value. Throws Error{Io} on filesystem trouble and
// Error{Parse} on malformed content, both naming the path.
Json read_json_file(const std::string& path);

// Serializes with 2-space indent and a trailing newline. nlohmann keeps
// object keys sorted, so output bytes are a pure function of the value.
void write_json_file(const std::string& path, const Json& value);

// NDJSON: one compact JSON value per line. Blank lines are skipped on read.
std::vector<Json> read_ndjson_file(const std::string& path);
void write_ndjson_file(const std::string& path, const std::vector<Json>& rows);

// Plain text helpers with the same error conventions.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// Parsed JSON values found inside free-form text, in order of appearance:
// the whole string if it parses, every fenced ``` block body, every balanced
// {...} span. Model output rarely arrives as clean JSON; callers scan these
// for the first shape they recognize.
std::vector<Json> extract_json_values(const std::string& raw);

}  // namespace peril
