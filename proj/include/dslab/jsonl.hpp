#pragma once

// Line-oriented JSON. Every number is tagged:
//   {"exact": "p/q"}                 exact rational
//   {"float": "1.2345e+00", "digits": 17}
// One record per line, keys sorted, so equal inputs give equal bytes.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dslab/bracket.hpp"
#include "dslab/measures.hpp"
#include "dslab/rational.hpp"

namespace dslab::jsonl {

using json = nlohmann::json;

inline json exact(const rational& q) { return json{{"exact", to_string(q)}}; }
inline json exact(std::uint64_t n) { return exact(to_rational(n)); }
inline json exact(const integer& n) { return exact(rational(n)); }

inline json real(double x, int digits = 17) {
  std::string s;
  if (std::isnan(x)) {
    s = "nan";
  } else if (std::isinf(x)) {
    s = x > 0 ? "inf" : "-inf";
  } else {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*e", digits - 1, x);
    s = buf;
  }
  return json{{"float", s}, {"digits", digits}};
}

inline json enclosure(const bracket& b) { return json{{"lo", real(b.lo)}, {"hi", real(b.hi)}}; }

inline bool is_exact(const json& j) { return j.is_object() && j.size() == 1 && j.contains("exact"); }
inline bool is_float(const json& j) { return j.is_object() && j.size() == 2 && j.contains("float") && j.contains("digits"); }

inline rational read_exact(const json& j) {
  if (!is_exact(j) || !j["exact"].is_string()) throw precondition_error("jsonl: expected an exact number, got " + j.dump());
  return parse_rational(j["exact"].get<std::string>());
}

inline std::uint64_t read_u64(const json& j) {
  rational q = read_exact(j);
  if (q.get_den() != 1 || q < 0) throw precondition_error("jsonl: expected a nonnegative integer, got " + to_string(q));
  return to_u64(q.get_num());
}

inline double read_float(const json& j) {
  if (!is_float(j)) throw precondition_error("jsonl: expected a float, got " + j.dump());
  return std::stod(j["float"].get<std::string>());
}

/// True when no bare JSON number appears outside a float tag's "digits".
inline bool all_numbers_tagged(const json& j) {
  if (j.is_number()) return false;
  if (is_float(j)) return j["float"].is_string() && j["digits"].is_number_integer();
  if (j.is_object() || j.is_array()) {
    for (const auto& x : j) {
      if (!all_numbers_tagged(x)) return false;
    }
  }
  return true;
}

inline std::string line(const json& record) { return record.dump(); }

inline std::vector<json> read_lines(std::istream& in) {
  std::vector<json> out;
  std::string s;
  std::size_t lineno = 0;
  while (std::getline(in, s)) {
    ++lineno;
    if (s.empty()) continue;
    try {
      out.push_back(json::parse(s));
    } catch (const json::exception& e) {
      throw precondition_error("jsonl: line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// pair_set: a header, then the two supports, then one record per edge.

inline std::vector<json> to_records(const pair_set& E) {
  std::vector<json> out;
  auto range_name = [](value_range r) { return r == value_range::at_most_half ? "at_most_half" : "nonnegative"; };
  out.push_back({{"type", "pair_set"},
                 {"edges", exact(static_cast<std::uint64_t>(E.size()))},
                 {"psi_range", range_name(E.psi().range())},
                 {"theta_range", range_name(E.theta().range())}});
  for (const auto& [n, v] : E.psi().values()) out.push_back({{"type", "psi"}, {"n", exact(n)}, {"value", exact(v)}});
  for (const auto& [n, v] : E.theta().values()) out.push_back({{"type", "theta"}, {"n", exact(n)}, {"value", exact(v)}});
  for (const auto& e : E.edges()) out.push_back({{"type", "edge"}, {"v", exact(e.v)}, {"w", exact(e.w)}});
  return out;
}

inline void write(std::ostream& os, const pair_set& E) {
  for (const auto& r : to_records(E)) os << line(r) << '\n';
}

inline pair_set pair_set_from_records(const std::vector<json>& records) {
  if (records.empty() || records[0].value("type", "") != "pair_set") {
    throw precondition_error("jsonl: pair_set stream must start with a pair_set header");
  }
  auto range_of = [](const json& h, const char* key) {
    std::string s = h.at(key).get<std::string>();
    if (s == "at_most_half") return value_range::at_most_half;
    if (s == "nonnegative") return value_range::nonnegative;
    throw precondition_error("jsonl: unknown value range '" + s + "'");
  };
  support_function psi(range_of(records[0], "psi_range"));
  support_function theta(range_of(records[0], "theta_range"));
  std::vector<edge> edges;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& r = records[i];
    std::string type = r.value("type", "");
    if (type == "psi") {
      psi.set(read_u64(r.at("n")), read_exact(r.at("value")));
    } else if (type == "theta") {
      theta.set(read_u64(r.at("n")), read_exact(r.at("value")));
    } else if (type == "edge") {
      edges.push_back({read_u64(r.at("v")), read_u64(r.at("w"))});
    } else {
      throw precondition_error("jsonl: unexpected record type '" + type + "' in pair_set stream");
    }
  }
  std::uint64_t declared = read_u64(records[0].at("edges"));
  if (declared != edges.size()) throw precondition_error("jsonl: pair_set header declares a different edge count");
  return pair_set(std::move(psi), std::move(theta), std::move(edges));
}

inline pair_set read_pair_set(std::istream& in) { return pair_set_from_records(read_lines(in)); }

// ---------------------------------------------------------------------------
// measure_matrix: header, then one record per nonzero entry and marginal.

inline std::vector<json> to_records(const measure_matrix& M) {
  std::vector<json> out;
  out.push_back({{"type", "matrix"}, {"prime", exact(M.prime)}, {"total", exact(M.total)}});
  for (const auto& [ij, m] : M.entries) {
    out.push_back({{"type", "cell"}, {"i", exact(std::uint64_t{ij.first})}, {"j", exact(std::uint64_t{ij.second})}, {"m", exact(m)}});
  }
  for (const auto& [i, a] : M.alpha) out.push_back({{"type", "alpha"}, {"i", exact(std::uint64_t{i})}, {"value", exact(a)}});
  for (const auto& [j, b] : M.beta) out.push_back({{"type", "beta"}, {"j", exact(std::uint64_t{j})}, {"value", exact(b)}});
  return out;
}

inline void write(std::ostream& os, const measure_matrix& M) {
  for (const auto& r : to_records(M)) os << line(r) << '\n';
}

inline measure_matrix matrix_from_records(const std::vector<json>& records) {
  if (records.empty() || records[0].value("type", "") != "matrix") {
    throw precondition_error("jsonl: matrix stream must start with a matrix header");
  }
  measure_matrix M;
  M.prime = read_u64(records[0].at("prime"));
  M.total = read_exact(records[0].at("total"));
  auto index = [](const json& j) {
    std::uint64_t v = read_u64(j);
    if (v > 1'000'000) throw precondition_error("jsonl: layer index out of range");
    return static_cast<unsigned>(v);
  };
  for (std::size_t k = 1; k < records.size(); ++k) {
    const auto& r = records[k];
    std::string type = r.value("type", "");
    if (type == "cell") {
      M.entries[{index(r.at("i")), index(r.at("j"))}] = read_exact(r.at("m"));
    } else if (type == "alpha") {
      M.alpha[index(r.at("i"))] = read_exact(r.at("value"));
    } else if (type == "beta") {
      M.beta[index(r.at("j"))] = read_exact(r.at("value"));
    } else {
      throw precondition_error("jsonl: unexpected record type '" + type + "' in matrix stream");
    }
  }
  return M;
}

inline measure_matrix read_matrix(std::istream& in) { return matrix_from_records(read_lines(in)); }

// ---------------------------------------------------------------------------
// --csv: flatten nested objects to dotted columns; tagged numbers become
// their string. A header line is emitted whenever the column set changes.

inline void flatten(const json& j, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& out) {
  if (is_exact(j)) {
    out.emplace_back(prefix, j["exact"].get<std::string>());
  } else if (is_float(j)) {
    out.emplace_back(prefix, j["float"].get<std::string>());
  } else if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], prefix + "." + std::to_string(i), out);
  } else if (j.is_string()) {
    out.emplace_back(prefix, j.get<std::string>());
  } else {
    out.emplace_back(prefix, j.dump());
  }
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + '"';
}

class csv_writer {
 public:
  explicit csv_writer(std::ostream& os) : os_(os) {}

  void write(const json& record) {
    std::vector<std::pair<std::string, std::string>> cells;
    flatten(record, "", cells);
    std::vector<std::string> cols;
    for (const auto& c : cells) cols.push_back(c.first);
    if (cols != header_) {
      header_ = cols;
      emit(cols);
    }
    std::vector<std::string> vals;
    for (const auto& c : cells) vals.push_back(c.second);
    emit(vals);
  }

 private:
  void emit(const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) os_ << (i ? "," : "") << csv_field(row[i]);
    os_ << '\n';
  }

  std::ostream& os_;
  std::vector<std::string> header_;
};

}  // namespace dslab::jsonl
