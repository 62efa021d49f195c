#include "entroflow/config.hpp"

#include <cstdlib>
#include <sstream>

#include "entroflow/csv.hpp"
#include "entroflow/errors.hpp"

namespace entroflow {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0')
    throw ConfigError("config: key '" + key + "': not a number: '" + v + "'");
  return x;
}

}  // namespace

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected 'key = value', got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": empty key");
    if (value.empty())
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": empty value for key '" + key + "'");
    if (!kv.emplace(key, value).second)
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": duplicate key '" + key + "'");
  }
  return kv;
}

const std::string* ConfigReader::fetch(const std::string& key) {
  consumed_.insert(key);
  const auto it = kv_.find(key);
  return it == kv_.end() ? nullptr : &it->second;
}

void ConfigReader::record(const std::string& key, const std::string& value) {
  effective_.emplace_back(key, value);
}

std::string ConfigReader::get_string(const std::string& key,
                                     const std::string& dflt) {
  const std::string* v = fetch(key);
  const std::string out = v ? *v : dflt;
  record(key, out);
  return out;
}

std::string ConfigReader::require_string(const std::string& key) {
  const std::string* v = fetch(key);
  if (!v) {
    missing_.push_back(key);
    return "";
  }
  record(key, *v);
  return *v;
}

double ConfigReader::get_double(const std::string& key, double dflt) {
  const std::string* v = fetch(key);
  const double out = v ? parse_double(key, *v) : dflt;
  record(key, format_double(out));
  return out;
}

double ConfigReader::require_double(const std::string& key) {
  const std::string* v = fetch(key);
  if (!v) {
    missing_.push_back(key);
    return 0.0;
  }
  const double out = parse_double(key, *v);
  record(key, format_double(out));
  return out;
}

long ConfigReader::get_long(const std::string& key, long dflt) {
  const std::string* v = fetch(key);
  long out = dflt;
  if (v) {
    char* end = nullptr;
    out = std::strtol(v->c_str(), &end, 10);
    if (end == v->c_str() || *end != '\0')
      throw ConfigError("config: key '" + key + "': not an integer: '" + *v +
                        "'");
  }
  record(key, std::to_string(out));
  return out;
}

bool ConfigReader::get_bool(const std::string& key, bool dflt) {
  const std::string* v = fetch(key);
  bool out = dflt;
  if (v) {
    if (*v == "true" || *v == "1" || *v == "yes") out = true;
    else if (*v == "false" || *v == "0" || *v == "no") out = false;
    else
      throw ConfigError("config: key '" + key + "': not a boolean: '" + *v +
                        "'");
  }
  record(key, out ? "true" : "false");
  return out;
}

std::vector<double> ConfigReader::get_double_list(
    const std::string& key, const std::vector<double>& dflt) {
  const std::string* v = fetch(key);
  std::vector<double> out;
  if (!v || *v == "default") {
    out = dflt;
  } else if (*v != "none") {
    std::stringstream ss(*v);
    std::string cell;
    while (std::getline(ss, cell, ','))
      out.push_back(parse_double(key, trim(cell)));
  }
  std::string joined;
  if (out.empty()) {
    joined = "none";
  } else {
    for (size_t i = 0; i < out.size(); ++i) {
      if (i) joined += ",";
      joined += format_double(out[i]);
    }
  }
  record(key, joined);
  return out;
}

std::vector<std::string> ConfigReader::get_string_list(
    const std::string& key) {
  const std::string* v = fetch(key);
  std::vector<std::string> out;
  if (v) {
    std::stringstream ss(*v);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      cell = trim(cell);
      if (!cell.empty()) out.push_back(cell);
    }
    record(key, *v);
  }
  return out;
}

void ConfigReader::pass_through(const std::string& key) {
  if (consumed_.count(key)) return;  // already read (and recorded) by name
  const std::string* v = fetch(key);
  if (v) record(key, *v);
}

void ConfigReader::reject_unknown() const {
  std::string unknown;
  for (const auto& [key, value] : kv_) {
    if (!consumed_.count(key)) {
      if (!unknown.empty()) unknown += ", ";
      unknown += key;
    }
  }
  if (!unknown.empty())
    throw ConfigError("config: unknown key(s): " + unknown);
}

void ConfigReader::check_required() const {
  if (missing_.empty()) return;
  std::string keys;
  for (size_t i = 0; i < missing_.size(); ++i) {
    if (i) keys += ", ";
    keys += missing_[i];
  }
  throw ConfigError("config: missing required key(s): " + keys);
}

}  // namespace entroflow
