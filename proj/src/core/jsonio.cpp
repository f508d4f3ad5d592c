#include "core/jsonio.hpp"

#include <fstream>
#include <sstream>

#include "core/error.hpp"

namespace peril {

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open file for reading: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) fail(ErrorKind::Io, "read failed: " + path);
  return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot open file for writing: " + path);
  out << content;
  out.flush();
  if (!out) fail(ErrorKind::Io, "write failed: " + path);
}

Json read_json_file(const std::string& path) {
  std::string text = read_text_file(path);
  Json value = Json::parse(text, nullptr, false);
  if (value.is_discarded()) fail(ErrorKind::Parse, "malformed JSON in " + path);
  return value;
}

void write_json_file(const std::string& path, const Json& value) {
  write_text_file(path, value.dump(2) + "\n");
}

std::vector<Json> read_ndjson_file(const std::string& path) {
  std::string text = read_text_file(path);
  std::vector<Json> rows;
  std::istringstream lines(text);
  std::string line;
  size_t lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json row = Json::parse(line, nullptr, false);
    if (row.is_discarded()) {
      fail(ErrorKind::Parse,
           "malformed JSON on line " + std::to_string(lineno) + " of " + path);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_ndjson_file(const std::string& path, const std::vector<Json>& rows) {
  std::ostringstream out;
  for (const Json& row : rows) out << row.dump() << "\n";
  write_text_file(path, out.str());
}

std::vector<Json> extract_json_values(const std::string& raw) {
  std::vector<std::string> cands;
  cands.push_back(raw);
  size_t pos = 0;
  while ((pos = raw.find("```", pos)) != std::string::npos) {
    size_t body = raw.find('\n', pos);
    if (body == std::string::npos) break;
    size_t end = raw.find("```", body);
    if (end == std::string::npos) break;
    cands.push_back(raw.substr(body + 1, end - body - 1));
    pos = end + 3;
  }
  for (size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] != '{') continue;
    int depth = 0;
    bool in_string = false;
    for (size_t j = i; j < raw.size(); ++j) {
      char ch = raw[j];
      if (in_string) {
        if (ch == '\\') ++j;
        else if (ch == '"') in_string = false;
      } else if (ch == '"') {
        in_string = true;
      } else if (ch == '{') {
        ++depth;
      } else if (ch == '}') {
        if (--depth == 0) {
          cands.push_back(raw.substr(i, j - i + 1));
          break;
        }
      }
    }
  }
  std::vector<Json> values;
  for (const std::string& cand : cands) {
    Json value = Json::parse(cand, nullptr, false);
    if (!value.is_discarded()) values.push_back(std::move(value));
  }
  return values;
}

}  // namespace peril
