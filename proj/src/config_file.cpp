#include "vm/config_file.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fstream>
#include <sstream>

#include "vm/csv.hpp"
#include "vm/error.hpp"

namespace vm {

namespace {

std::string unquote(std::string v) {
  v = csv::trim(v);
  if (!v.empty() && (v.front() == '"' || v.front() == '\'')) {
    const auto close = v.find(v.front(), 1);
    if (close != std::string::npos) return v.substr(1, close - 1);
  }
  // trailing comment on an unquoted value
  if (auto hash = v.find(" #"); hash != std::string::npos) v = csv::trim(v.substr(0, hash));
  return v;
}

}  // namespace

KeyValues KeyValues::parse(const std::string& text, const std::string& origin) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(origin + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  KeyValues kv;
  kv.origin_ = origin;
  for (const auto& [name, node] : tree) {
    if (node.empty()) {
      kv.values_[name] = unquote(node.data());
      continue;
    }
    for (const auto& [key, leaf] : node) kv.values_[name + "." + key] = unquote(leaf.data());
  }
  return kv;
}

KeyValues KeyValues::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path, "cannot open config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

std::optional<std::string> KeyValues::get(std::string_view key) const {
  auto it = values_.find(std::string(key));
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::optional<double> KeyValues::get_double(std::string_view key) const {
  auto v = get(key);
  if (!v) return std::nullopt;
  auto d = csv::parse_double(*v);
  if (!d) throw ConfigError(origin_ + ": '" + std::string(key) + "' must be a number, got '" + *v + "'");
  return d;
}

std::optional<long long> KeyValues::get_int(std::string_view key) const {
  auto v = get(key);
  if (!v) return std::nullopt;
  auto i = csv::parse_int(*v);
  if (!i) throw ConfigError(origin_ + ": '" + std::string(key) + "' must be an integer, got '" + *v + "'");
  return i;
}

std::optional<bool> KeyValues::get_bool(std::string_view key) const {
  auto v = get(key);
  if (!v) return std::nullopt;
  std::string t = csv::lower(*v);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw ConfigError(origin_ + ": '" + std::string(key) + "' must be true or false, got '" + *v + "'");
}

}  // namespace vm
