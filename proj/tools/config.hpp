#pragma once

// YAML job configs: schema access with file:line:column diagnostics,
// dotted-path overrides, and the config hash embedded in every report.

#include <yaml-cpp/yaml.h>

#include <cstdint>
#include <cstdio>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "ncres/core.hpp"
#include "ncres/rational.hpp"

namespace ncres::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A config node together with its dotted path, for error messages.
class Cfg {
 public:
  Cfg(YAML::Node node, std::string path, std::string file) : node_(std::move(node)), path_(std::move(path)), file_(std::move(file)) {}

  const YAML::Node& yaml() const { return node_; }
  const std::string& path() const { return path_; }

  std::string where() const { return where(node_); }
  std::string where(const YAML::Node& n) const {
    const YAML::Mark m = n.Mark();
    if (m.is_null()) return file_ + ": (override)";
    return file_ + ":" + std::to_string(m.line + 1) + ":" + std::to_string(m.column + 1);
  }
  [[noreturn]] void fail(const std::string& msg) const { throw ConfigError(where() + ": " + label() + msg); }

  bool is_map() const { return node_.IsMap(); }
  bool is_sequence() const { return node_.IsSequence(); }
  bool is_scalar() const { return node_.IsScalar(); }
  bool has(const std::string& key) const { return node_.IsMap() && node_[key].IsDefined() && !node_[key].IsNull(); }

  Cfg at(const std::string& key) const {
    if (!node_.IsMap()) fail("expected a mapping");
    const YAML::Node child = node_[key];
    if (!child.IsDefined() || child.IsNull()) fail("missing required key '" + key + "'");
    return Cfg(child, join(key), file_);
  }
  std::optional<Cfg> maybe(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return at(key);
  }
  std::vector<Cfg> items() const {
    if (!node_.IsSequence()) fail("expected a list");
    std::vector<Cfg> out;
    for (std::size_t i = 0; i < node_.size(); ++i) out.emplace_back(node_[i], path_ + "[" + std::to_string(i) + "]", file_);
    return out;
  }

  /// Rejects keys outside `allowed`, pointing at the offending key.
  void allow(std::initializer_list<const char*> allowed) const {
    if (!node_.IsMap()) fail("expected a mapping");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = node_.begin(); it != node_.end(); ++it) {
      const auto key = it->first.as<std::string>();
      if (!ok.count(key)) {
        std::string list;
        for (const auto& k : ok) list += (list.empty() ? "" : ", ") + k;
        throw ConfigError(where(it->first) + ": " + label() + "unknown key '" + key + "' (allowed: " + list + ")");
      }
    }
  }

  template <class T>
  T as() const {
    try {
      return node_.as<T>();
    } catch (const YAML::Exception&) {
      fail(std::string("expected ") + type_name<T>());
    }
  }
  template <class T>
  T get(const std::string& key) const { return at(key).as<T>(); }
  template <class T>
  T get(const std::string& key, T fallback) const { return has(key) ? at(key).as<T>() : fallback; }

  double positive(const std::string& key, std::optional<double> fallback = std::nullopt) const {
    const double v = fallback && !has(key) ? *fallback : get<double>(key);
    if (!(v > 0.0)) at(key).fail("must be positive");
    return v;
  }
  int int_in(const std::string& key, int lo, int hi, std::optional<int> fallback = std::nullopt) const {
    const int v = fallback && !has(key) ? *fallback : get<int>(key);
    if (v < lo || v > hi) {
      (has(key) ? at(key) : *this).fail("'" + key + "' must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    return v;
  }
  std::string one_of(const std::string& key, std::initializer_list<const char*> choices,
                     std::optional<std::string> fallback = std::nullopt) const {
    const std::string v = fallback && !has(key) ? *fallback : get<std::string>(key);
    for (const char* c : choices) {
      if (v == c) return v;
    }
    std::string list;
    for (const char* c : choices) list += (list.empty() ? "" : ", ") + std::string(c);
    (has(key) ? at(key) : *this).fail("'" + v + "' is not one of " + list);
  }

  /// A complex number: a scalar or a [re, im] pair.
  cplx complex() const {
    if (node_.IsSequence()) {
      if (node_.size() != 2) fail("complex numbers are written [re, im]");
      return {Cfg(node_[0], path_, file_).as<double>(), Cfg(node_[1], path_, file_).as<double>()};
    }
    return as<double>();
  }

  /// `{num: [c0, c1, ...], den: [d0, d1, ...]}` with coefficients from low to high degree.
  RationalFn rational() const {
    allow({"num", "den"});
    auto poly = [&](const std::string& key, bool required) {
      if (!required && !has(key)) return Polynomial::constant(1.0);
      std::vector<cplx> c;
      for (const auto& item : at(key).items()) c.push_back(item.complex());
      if (c.empty()) at(key).fail("empty coefficient list");
      return Polynomial(c);
    };
    const Polynomial num = poly("num", true), den = poly("den", false);
    if (den.is_zero()) at("den").fail("zero denominator");
    return RationalFn::from_polynomials(num, den);
  }

 private:
  std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  std::string label() const { return path_.empty() ? "" : path_ + ": "; }
  template <class T>
  static const char* type_name() {
    if constexpr (std::is_same_v<T, double>) return "a number";
    if constexpr (std::is_same_v<T, int>) return "an integer";
    if constexpr (std::is_same_v<T, bool>) return "true or false";
    if constexpr (std::is_same_v<T, std::string>) return "a string";
    return "a value";
  }

  YAML::Node node_;
  std::string path_;
  std::string file_;
};

/// Loads a YAML file; parse errors carry the line and column.
inline YAML::Node load_yaml(const std::string& file) {
  try {
    YAML::Node root = YAML::LoadFile(file);
    if (root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
    if (!root.IsMap()) throw ConfigError(file + ": top level must be a mapping");
    return root;
  } catch (const YAML::BadFile&) {
    throw ConfigError(file + ": cannot open config file");
  } catch (const YAML::ParserException& e) {
    throw ConfigError(file + ":" + std::to_string(e.mark.line + 1) + ":" + std::to_string(e.mark.column + 1) + ": " + e.msg);
  }
}

/// Applies `a.b.c=value`; the value is parsed as YAML.
inline void apply_override(YAML::Node& root, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + assignment + "'");
  const std::string path = assignment.substr(0, eq);
  YAML::Node value;
  try {
    value = YAML::Load(assignment.substr(eq + 1));
  } catch (const YAML::Exception& e) {
    throw ConfigError("--set " + path + ": " + e.msg);
  }
  std::vector<std::string> keys;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    keys.push_back(path.substr(start, dot - start));
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  YAML::Node cur = root;
  for (std::size_t i = 0; i + 1 < keys.size(); ++i) {
    if (keys[i].empty()) throw ConfigError("--set: empty key in '" + path + "'");
    YAML::Node next = cur[keys[i]];
    if (!next.IsDefined() || next.IsNull()) cur[keys[i]] = YAML::Node(YAML::NodeType::Map);
    if (!cur[keys[i]].IsMap()) throw ConfigError("--set: '" + keys[i] + "' in '" + path + "' is not a mapping");
    cur.reset(cur[keys[i]]);
  }
  cur[keys.back()] = value;
}

/// FNV-1a, 64 bit.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Hash of the canonical emission of the job, without the keys that do not
/// change results (threads, output paths).
inline std::string config_hash(const YAML::Node& root, const std::string& subcommand) {
  YAML::Node copy = YAML::Clone(root);
  copy.remove("threads");
  copy.remove("output");
  YAML::Emitter out;
  out << copy;
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(subcommand + "\n" + out.c_str())));
  return buf;
}

}  // namespace ncres::cli
