#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace hemorom {

/// Flat `key = value` configuration with `#` comments. Unknown keys are
/// rejected at load time against the schema in known_keys().
class Config {
 public:
  static Config from_file(const std::filesystem::path& path);
  static Config from_string(const std::string& text);

  bool has(const std::string& key) const { return kv_.count(key) > 0; }
  std::string str(const std::string& key) const;
  std::string str_or(const std::string& key, const std::string& def) const;
  double number(const std::string& key) const;
  double number_or(const std::string& key, double def) const;
  int integer(const std::string& key) const;
  int integer_or(const std::string& key, int def) const;
  bool flag_or(const std::string& key, bool def) const;

  const std::map<std::string, std::string>& entries() const { return kv_; }

  /// Exact keys plus the `wk.<j>.` per-outlet patterns.
  static const std::vector<std::string>& known_keys();

 private:
  void validate() const;
  std::map<std::string, std::string> kv_;
};

}  // namespace hemorom
