#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace genpanis {

/// Flat `key = value` configuration with at most one section level:
///
///   [model]
///   d_z = 16
///
/// becomes key "model.d_z". Precedence is defaults < file < flag overrides;
/// the effective config is echoed into every run directory so runs are
/// reproducible from (config, seed).
class Config {
 public:
  void set(const std::string& key, const std::string& value) { kv_[key] = value; }
  bool has(const std::string& key) const { return kv_.count(key) != 0; }

  std::string get_str(const std::string& key, const std::string& def) const;
  std::string require_str(const std::string& key) const;
  double get_double(const std::string& key, double def) const;
  int get_int(const std::string& key, int def) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t def) const;
  bool get_bool(const std::string& key, bool def) const;

  void load_file(const std::filesystem::path& path);
  /// Apply "key=value" override strings (from CLI flags).
  void apply_overrides(const std::vector<std::string>& assignments);
  /// Throws listing the valid keys if any present key is not in `allowed`.
  void validate_keys(const std::vector<std::string>& allowed) const;

  std::string serialize() const;
  std::uint64_t hash() const;
  const std::map<std::string, std::string>& entries() const { return kv_; }

 private:
  std::map<std::string, std::string> kv_;
};

}  // namespace genpanis
