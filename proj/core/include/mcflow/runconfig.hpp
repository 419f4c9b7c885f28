#pragma once

#include <Eigen/Dense>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mcflow {

/// Raised on malformed configuration text or values; the CLI maps it to
/// exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Ordered key = value store behind the run configuration files.  Lines are
///   key = value        # trailing comment
/// with keys matching [A-Za-z0-9_.-]+.  Later assignments win, which is how
/// flag overrides are layered on top of a file.  Typed getters record every
/// key they touch so unknown (misspelled) keys can be rejected wholesale.
class KeyValueConfig {
 public:
  KeyValueConfig() = default;

  static KeyValueConfig from_file(const std::string& path);
  static KeyValueConfig from_text(const std::string& text,
                                  const std::string& origin = "<string>");

  void set(const std::string& key, const std::string& value);

  /// Parses "key=value" (first '=' splits) and sets it.
  void set_pair(const std::string& assignment);

  bool has(const std::string& key) const;

  std::string get_str(const std::string& key, const std::string& fallback) const;
  double get_num(const std::string& key, double fallback) const;
  long get_int(const std::string& key, long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  /// Comma-separated list of numbers.
  Eigen::VectorXd get_list(const std::string& key,
                           const Eigen::VectorXd& fallback) const;

  /// Keys present but never read by any getter.  Call after the consumers
  /// have pulled their schema; non-empty means a typo.
  std::vector<std::string> unread_keys() const;
  void reject_unread() const;

  /// Assignment order with later duplicates collapsed onto the first slot,
  /// for the manifest echo.
  std::vector<std::pair<std::string, std::string>> items() const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
  mutable std::set<std::string> read_;

  const std::string* find(const std::string& key) const;
};

}  // namespace mcflow
