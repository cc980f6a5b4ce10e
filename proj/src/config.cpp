#include "genpanis/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "genpanis/common.hpp"

namespace genpanis {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::string Config::get_str(const std::string& key, const std::string& def) const {
  auto it = kv_.find(key);
  return it == kv_.end() ? def : it->second;
}

std::string Config::require_str(const std::string& key) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) throw error("config: missing required key '" + key + "'");
  return it->second;
}

double Config::get_double(const std::string& key, double def) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return def;
  try {
    return std::stod(it->second);
  } catch (...) {
    throw error("config: key '" + key + "' is not a number: " + it->second);
  }
}

int Config::get_int(const std::string& key, int def) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return def;
  try {
    return std::stoi(it->second);
  } catch (...) {
    throw error("config: key '" + key + "' is not an integer: " + it->second);
  }
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t def) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return def;
  try {
    return std::stoull(it->second);
  } catch (...) {
    throw error("config: key '" + key + "' is not an unsigned integer: " + it->second);
  }
}

bool Config::get_bool(const std::string& key, bool def) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return def;
  std::string v = it->second;
  std::transform(v.begin(), v.end(), v.begin(), ::tolower);
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw error("config: key '" + key + "' is not a boolean: " + it->second);
}

void Config::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw error("config: cannot open " + path.string());
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw error("config: malformed section at " + path.string() + ":" + std::to_string(lineno));
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw error("config: expected key = value at " + path.string() + ":" + std::to_string(lineno));
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw error("config: empty key at line " + std::to_string(lineno));
    if (!section.empty()) key = section + "." + key;
    kv_[key] = value;
  }
}

void Config::apply_overrides(const std::vector<std::string>& assignments) {
  for (const auto& a : assignments) {
    const auto eq = a.find('=');
    if (eq == std::string::npos) throw error("config override must be key=value, got: " + a);
    kv_[trim(a.substr(0, eq))] = trim(a.substr(eq + 1));
  }
}

void Config::validate_keys(const std::vector<std::string>& allowed) const {
  for (const auto& [k, v] : kv_) {
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
      std::ostringstream msg;
      msg << "config: unknown key '" << k << "'. Valid keys:";
      for (const auto& a : allowed) msg << "\n  " << a;
      throw error(msg.str());
    }
  }
}

std::string Config::serialize() const {
  // Plain keys first, then keys grouped by section, so a reload reproduces
  // the same map.
  std::ostringstream out;
  for (const auto& [k, v] : kv_)
    if (k.find('.') == std::string::npos) out << k << " = " << v << "\n";
  std::string cur_section;
  for (const auto& [k, v] : kv_) {
    const auto dot = k.find('.');
    if (dot == std::string::npos) continue;
    const std::string sec = k.substr(0, dot);
    if (sec != cur_section) {
      out << "[" << sec << "]\n";
      cur_section = sec;
    }
    out << k.substr(dot + 1) << " = " << v << "\n";
  }
  return out.str();
}

std::uint64_t Config::hash() const {
  const std::string s = serialize();
  return fnv1a64(s.data(), s.size());
}

}  // namespace genpanis
