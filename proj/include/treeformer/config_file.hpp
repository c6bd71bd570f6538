#pragma once

#include <map>
#include <string>

#include "treeformer/errors.hpp"

namespace treeformer {

// Line-oriented "key = value" files; '#' starts a comment, blank lines are
// skipped. Keys are tracked so unknown ones can be reported.
class ConfigFile {
 public:
  static ConfigFile load(const std::string& path);
  static ConfigFile parse(const std::string& text, const std::string& origin);

  bool has(const std::string& key) const { return values_.contains(key); }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::string require_string(const std::string& key) const;
  long long get_int(const std::string& key, long long fallback) const;
  double get_double(const std::string& key, double fallback) const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
  std::string origin_;
};

}  // namespace treeformer
