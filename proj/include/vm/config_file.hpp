#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace vm {

// Flat view of a TOML-style file restricted to `[section]` headers and scalar
// `key = value` lines. Keys are addressed as "section.key"; string quotes are stripped.
class KeyValues {
 public:
  static KeyValues parse(const std::string& text, const std::string& origin = "<config>");
  static KeyValues load(const std::string& path);

  bool has(std::string_view key) const { return values_.find(std::string(key)) != values_.end(); }
  std::optional<std::string> get(std::string_view key) const;
  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
  const std::map<std::string, std::string>& entries() const { return values_; }

  std::optional<double> get_double(std::string_view key) const;
  std::optional<long long> get_int(std::string_view key) const;
  std::optional<bool> get_bool(std::string_view key) const;

 private:
  std::string origin_;
  std::map<std::string, std::string> values_;
};

}  // namespace vm
