#include "mcflow/runconfig.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace mcflow {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

bool valid_key(const std::string& k) {
  if (k.empty()) return false;
  for (char c : k) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '.' && c != '-')
      return false;
  }
  return true;
}

}  // namespace

KeyValueConfig KeyValueConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return from_text(buf.str(), path);
}

KeyValueConfig KeyValueConfig::from_text(const std::string& text,
                                         const std::string& origin) {
  KeyValueConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": expected 'key = value', got '" + line + "'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (!valid_key(key))
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": bad key '" + key + "'");
    if (value.empty())
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": empty value for '" + key + "'");
    cfg.set(key, value);
  }
  return cfg;
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
  if (!valid_key(key)) throw ConfigError("bad key '" + key + "'");
  entries_.emplace_back(key, value);
}

void KeyValueConfig::set_pair(const std::string& assignment) {
  auto eq = assignment.find('=');
  if (eq == std::string::npos)
    throw ConfigError("expected key=value, got '" + assignment + "'");
  std::string key = trim(assignment.substr(0, eq));
  std::string value = trim(assignment.substr(eq + 1));
  if (value.empty()) throw ConfigError("empty value for '" + key + "'");
  set(key, value);
}

const std::string* KeyValueConfig::find(const std::string& key) const {
  const std::string* hit = nullptr;
  for (const auto& [k, v] : entries_)
    if (k == key) hit = &v;
  return hit;
}

bool KeyValueConfig::has(const std::string& key) const {
  read_.insert(key);
  return find(key) != nullptr;
}

std::string KeyValueConfig::get_str(const std::string& key,
                                    const std::string& fallback) const {
  read_.insert(key);
  const std::string* v = find(key);
  return v ? *v : fallback;
}

double KeyValueConfig::get_num(const std::string& key, double fallback) const {
  read_.insert(key);
  const std::string* v = find(key);
  if (!v) return fallback;
  char* end = nullptr;
  double x = std::strtod(v->c_str(), &end);
  if (end == v->c_str() || *end != '\0')
    throw ConfigError("value for '" + key + "' is not a number: '" + *v + "'");
  return x;
}

long KeyValueConfig::get_int(const std::string& key, long fallback) const {
  read_.insert(key);
  const std::string* v = find(key);
  if (!v) return fallback;
  char* end = nullptr;
  long x = std::strtol(v->c_str(), &end, 10);
  if (end == v->c_str() || *end != '\0')
    throw ConfigError("value for '" + key + "' is not an integer: '" + *v + "'");
  return x;
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  read_.insert(key);
  const std::string* v = find(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") return true;
  if (*v == "false" || *v == "0" || *v == "no" || *v == "off") return false;
  throw ConfigError("value for '" + key + "' is not a boolean: '" + *v + "'");
}

Eigen::VectorXd KeyValueConfig::get_list(const std::string& key,
                                         const Eigen::VectorXd& fallback) const {
  read_.insert(key);
  const std::string* v = find(key);
  if (!v) return fallback;
  std::vector<double> out;
  std::istringstream in(*v);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    char* end = nullptr;
    double x = std::strtod(item.c_str(), &end);
    if (end == item.c_str() || *end != '\0')
      throw ConfigError("list entry for '" + key + "' is not a number: '" + item + "'");
    out.push_back(x);
  }
  if (out.empty())
    throw ConfigError("empty list for '" + key + "'");
  return Eigen::Map<Eigen::VectorXd>(out.data(), static_cast<long>(out.size()));
}

std::vector<std::string> KeyValueConfig::unread_keys() const {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& [k, v] : entries_)
    if (!read_.count(k) && seen.insert(k).second) out.push_back(k);
  return out;
}

void KeyValueConfig::reject_unread() const {
  auto bad = unread_keys();
  if (bad.empty()) return;
  std::string msg = "unknown config key(s):";
  for (const auto& k : bad) msg += " '" + k + "'";
  throw ConfigError(msg);
}

std::vector<std::pair<std::string, std::string>> KeyValueConfig::items() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [k, v] : entries_) {
    bool found = false;
    for (auto& [ok, ov] : out)
      if (ok == k) {
        ov = v;
        found = true;
      }
    if (!found) out.emplace_back(k, v);
  }
  return out;
}

}  // namespace mcflow
