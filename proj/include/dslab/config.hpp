#pragma once

// Flat `key = value` experiment files, `#` starts a comment.
// Reserved keys: subcommand, output, workers, seed. Everything else is a
// subcommand parameter.

#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "dslab/rational.hpp"

namespace dslab {

class config_error : public precondition_error {
 public:
  using precondition_error::precondition_error;
};

struct experiment_config {
  std::string subcommand;
  std::map<std::string, std::string> params;
  std::string output;  // empty: standard output
  std::optional<unsigned> workers;
  std::uint64_t seed = 0;

  bool operator==(const experiment_config&) const = default;
};

namespace detail {

inline std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline bool valid_key(const std::string& k) {
  if (k.empty()) return false;
  for (char c : k) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-' ||
              c == '.';
    if (!ok) return false;
  }
  return true;
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos) {
    throw config_error(key + ": expected a nonnegative integer, got '" + v + "'");
  }
  try {
    return std::stoull(v);
  } catch (const std::exception&) {
    throw config_error(key + ": value out of range: '" + v + "'");
  }
}

inline unsigned parse_workers(const std::string& v) {
  std::uint64_t w = parse_u64("workers", v);
  if (w == 0 || w > 256) throw config_error("workers: must lie in [1, 256]");
  return static_cast<unsigned>(w);
}

}  // namespace detail

/// Raw key/value pairs; duplicate keys are an error.
inline std::map<std::string, std::string> parse_key_values(std::istream& in) {
  std::map<std::string, std::string> out;
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    auto hash = raw.find('#');
    std::string s = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    auto eq = s.find('=');
    if (eq == std::string::npos) throw config_error("line " + std::to_string(lineno) + ": expected 'key = value'");
    std::string key = detail::trim(s.substr(0, eq));
    std::string value = detail::trim(s.substr(eq + 1));
    if (!detail::valid_key(key)) throw config_error("line " + std::to_string(lineno) + ": bad key '" + key + "'");
    if (!out.emplace(key, value).second) throw config_error("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
  }
  return out;
}

/// Applies one setting; reserved keys go to their fields.
inline void apply_setting(experiment_config& c, const std::string& key, const std::string& value) {
  if (key == "subcommand") {
    c.subcommand = value;
  } else if (key == "output") {
    c.output = value;
  } else if (key == "workers") {
    c.workers = detail::parse_workers(value);
  } else if (key == "seed") {
    c.seed = detail::parse_u64("seed", value);
  } else {
    if (!detail::valid_key(key)) throw config_error("bad parameter name '" + key + "'");
    c.params[key] = value;
  }
}

inline experiment_config parse_config(std::istream& in) {
  experiment_config c;
  for (const auto& [k, v] : parse_key_values(in)) apply_setting(c, k, v);
  return c;
}

inline experiment_config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot read config file '" + path + "'");
  return parse_config(in);
}

/// Inverse of parse_config. Values may not carry '#', newlines or edge whitespace.
inline std::string serialize(const experiment_config& c) {
  auto check = [](const std::string& k, const std::string& v) {
    if (v.find_first_of("#\n\r") != std::string::npos || detail::trim(v) != v) {
      throw config_error(k + ": value cannot be written to a config file");
    }
  };
  std::ostringstream os;
  check("subcommand", c.subcommand);
  check("output", c.output);
  if (!c.subcommand.empty()) os << "subcommand = " << c.subcommand << '\n';
  if (!c.output.empty()) os << "output = " << c.output << '\n';
  if (c.workers) os << "workers = " << *c.workers << '\n';
  os << "seed = " << c.seed << '\n';
  for (const auto& [k, v] : c.params) {
    check(k, v);
    os << k << " = " << v << '\n';
  }
  return os.str();
}

/// Calibration budgets: the same format with float values.
inline std::map<std::string, double> load_budgets(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot read budgets file '" + path + "'");
  std::map<std::string, double> out;
  for (const auto& [k, v] : parse_key_values(in)) {
    try {
      std::size_t used = 0;
      out[k] = std::stod(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
    } catch (const std::exception&) {
      throw config_error(k + ": expected a number, got '" + v + "'");
    }
  }
  return out;
}

}  // namespace dslab
