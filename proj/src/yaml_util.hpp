#pragma once

// Small helpers over yaml-cpp that turn malformed input into ConfigError
// carrying the offending line.

#include <initializer_list>
#include <string>
#include <string_view>

#include <yaml-cpp/yaml.h>

#include "qkdn/errors.hpp"

namespace qkdn::yaml {

inline int line_of(const YAML::Node& n) {
  const auto m = n.Mark();
  return m.is_null() ? 0 : m.line + 1;
}

inline YAML::Node parse_text(const std::string& text) {
  try {
    return YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(e.msg, e.mark.is_null() ? 0 : e.mark.line + 1);
  }
}

template <typename T>
T as(const YAML::Node& n, std::string_view what) {
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError("invalid value for '" + std::string(what) + "'", line_of(n));
  }
}

template <typename T>
T get(const YAML::Node& map, const char* key, T fallback) {
  const YAML::Node n = map[key];
  if (!n || n.IsNull()) return fallback;
  return as<T>(n, key);
}

template <typename T>
T require(const YAML::Node& map, const char* key) {
  const YAML::Node n = map[key];
  if (!n || n.IsNull()) throw ConfigError(std::string("missing field '") + key + "'", line_of(map));
  return as<T>(n, key);
}

inline void expect_map(const YAML::Node& n, std::string_view what) {
  if (!n.IsMap()) throw ConfigError(std::string(what) + " must be a mapping", line_of(n));
}

inline void expect_sequence(const YAML::Node& n, std::string_view what) {
  if (!n.IsSequence()) throw ConfigError(std::string(what) + " must be a list", line_of(n));
}

inline void reject_unknown(const YAML::Node& map, std::initializer_list<std::string_view> known,
                           std::string_view section) {
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    bool ok = false;
    for (auto k : known) ok = ok || k == key;
    if (!ok) {
      throw ConfigError("unknown key '" + key + "' in " + std::string(section),
                        line_of(kv.first));
    }
  }
}

}  // namespace qkdn::yaml
