#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace entroflow {

// Flat `key = value` per line, `#` starts a comment, dotted keys for
// grouping.  Duplicate keys are fatal.
std::map<std::string, std::string> parse_config_text(const std::string& text);

// Typed access over a parsed key/value map.  Every get records the key as
// consumed and its effective value (supplied or default), so the caller can
// (a) reject unknown keys and (b) emit a manifest that reproduces the run.
class ConfigReader {
 public:
  explicit ConfigReader(std::map<std::string, std::string> kv)
      : kv_(std::move(kv)) {}

  bool has(const std::string& key) const { return kv_.count(key) != 0; }

  std::string get_string(const std::string& key, const std::string& dflt);
  std::string require_string(const std::string& key);
  double get_double(const std::string& key, double dflt);
  double require_double(const std::string& key);
  long get_long(const std::string& key, long dflt);
  bool get_bool(const std::string& key, bool dflt);
  // Comma-separated doubles; empty string means "use dflt".
  std::vector<double> get_double_list(const std::string& key,
                                      const std::vector<double>& dflt);
  std::vector<std::string> get_string_list(const std::string& key);

  // Record a key as consumed without interpreting it (sweep pass-through).
  void pass_through(const std::string& key);

  // Throws listing any key that was never consumed.
  void reject_unknown() const;

  // Missing-required bookkeeping: require_* collects misses so one error can
  // list them all; throws if any were missing.
  void check_required() const;

  // (key, effective value) in consumption order.
  const std::vector<std::pair<std::string, std::string>>& effective() const {
    return effective_;
  }

  const std::map<std::string, std::string>& raw() const { return kv_; }

 private:
  std::map<std::string, std::string> kv_;
  std::set<std::string> consumed_;
  std::vector<std::string> missing_;
  std::vector<std::pair<std::string, std::string>> effective_;

  const std::string* fetch(const std::string& key);
  void record(const std::string& key, const std::string& value);
};

}  // namespace entroflow
