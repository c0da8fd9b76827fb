#pragma once

// Subcommand front end. run() validates the config against the subcommand's
// schema, computes every record into memory, and only then writes, so a
// usage error leaves the output untouched.
//
// Exit status: 0 clean, 2 an assertable invariant failed, 1 usage/config error.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dslab/anatomy.hpp"
#include "dslab/arith.hpp"
#include "dslab/config.hpp"
#include "dslab/dsgen.hpp"
#include "dslab/intervals.hpp"
#include "dslab/jsonl.hpp"
#include "dslab/measures.hpp"
#include "dslab/moments.hpp"
#include "dslab/parallel.hpp"
#include "dslab/sweeps.hpp"
#include "dslab/verify.hpp"

namespace dslab::cli {

using jsonl::json;
using jsonl::exact;
using jsonl::real;

class usage_error : public config_error {
 public:
  using config_error::config_error;
};

enum class param_kind { required, defaulted, optional };

struct param_spec {
  std::string name;
  param_kind kind = param_kind::required;
  std::string fallback;  // for defaulted
  std::string help;
};

struct subcommand_spec {
  std::string name;
  std::string help;
  std::vector<param_spec> params;
};

// ---------------------------------------------------------------------------
// Typed access to validated parameters.

class params {
 public:
  params(std::string sub, std::map<std::string, std::string> values)
      : sub_(std::move(sub)), values_(std::move(values)) {}

  bool has(const std::string& k) const { return values_.count(k) != 0; }

  const std::string& text(const std::string& k) const {
    auto it = values_.find(k);
    if (it == values_.end()) throw usage_error(sub_ + ": missing parameter --" + k);
    return it->second;
  }

  rational q(const std::string& k) const {
    try {
      return parse_rational(text(k));
    } catch (const usage_error&) {
      throw;
    } catch (const precondition_error& e) {
      throw usage_error(sub_ + ": --" + k + ": " + e.what());
    }
  }

  std::uint64_t u64(const std::string& k) const {
    rational v = q(k);
    if (v.get_den() != 1 || v < 0) throw usage_error(sub_ + ": --" + k + " must be a nonnegative integer");
    if (mpz_sizeinbase(v.get_num_mpz_t(), 2) > 63) throw usage_error(sub_ + ": --" + k + " is too large");
    return to_u64(v.get_num());
  }

  std::uint64_t positive(const std::string& k) const {
    auto v = u64(k);
    if (v == 0) throw usage_error(sub_ + ": --" + k + " must be positive");
    return v;
  }

  bool flag(const std::string& k) const {
    const auto& v = text(k);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw usage_error(sub_ + ": --" + k + " expects true/false, got '" + v + "'");
  }

  std::string choice(const std::string& k, std::initializer_list<const char*> allowed) const {
    const auto& v = text(k);
    for (const char* a : allowed) {
      if (v == a) return v;
    }
    std::string msg = sub_ + ": --" + k + " must be one of";
    for (const char* a : allowed) msg += std::string(" ") + a;
    throw usage_error(msg);
  }

  std::vector<rational> q_list(const std::string& k) const {
    std::vector<rational> out;
    std::stringstream ss(text(k));
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        out.push_back(parse_rational(item));
      } catch (const precondition_error& e) {
        throw usage_error(sub_ + ": --" + k + ": " + e.what());
      }
    }
    if (out.empty()) throw usage_error(sub_ + ": --" + k + " is empty");
    return out;
  }

  std::pair<std::uint64_t, std::uint64_t> range(const std::string& k) const {
    const auto& v = text(k);
    auto colon = v.find(':');
    if (colon == std::string::npos) throw usage_error(sub_ + ": --" + k + " expects a:b");
    params tmp(sub_, {{k + ".lo", v.substr(0, colon)}, {k + ".hi", v.substr(colon + 1)}});
    return {tmp.u64(k + ".lo"), tmp.u64(k + ".hi")};
  }

  multiplicative_weight weight(const std::string& k) const {
    auto v = choice(k, {"phi", "id", "one"});
    if (v == "phi") return multiplicative_weight::totient();
    if (v == "id") return multiplicative_weight::identity();
    return multiplicative_weight::one();
  }

  /// Approximation functions:
  ///   const:V            V on [1, hi]
  ///   const:V@a:b        V on [a, b]
  ///   inv:C@a:b          C/n on [a, b]
  ///   normalized@a:b     c/n on [a, b] with sum psi(n) phi(n)/n = 1
  ///   list:n=v,n=v,...
  support_function support(const std::string& k, std::uint64_t hi) const {
    const std::string spec = text(k);
    auto bad = [&](const std::string& why) { return usage_error(sub_ + ": --" + k + " '" + spec + "': " + why); };
    auto split_range = [&](const std::string& body, std::string& head) -> std::pair<std::uint64_t, std::uint64_t> {
      auto at = body.find('@');
      head = body.substr(0, at);
      if (at == std::string::npos) {
        if (hi == 0) throw bad("needs an explicit @a:b range here");
        return {1, hi};
      }
      params tmp(sub_, {{"r", body.substr(at + 1)}});
      auto r = tmp.range("r");
      if (r.first == 0 || r.second < r.first) throw bad("range must satisfy 1 <= a <= b");
      return r;
    };
    try {
      if (spec.rfind("const:", 0) == 0) {
        std::string head;
        auto [a, b] = split_range(spec.substr(6), head);
        return support_function::constant(a, b, parse_rational(head), value_range::nonnegative);
      }
      if (spec.rfind("inv:", 0) == 0) {
        std::string head;
        auto [a, b] = split_range(spec.substr(4), head);
        rational c = parse_rational(head);
        std::map<std::uint64_t, rational> values;
        for (std::uint64_t n = a; n <= b; ++n) values[n] = c / to_rational(n);
        return support_function::from_map(values, value_range::nonnegative);
      }
      if (spec.rfind("normalized", 0) == 0) {
        std::string head;
        auto [a, b] = split_range(spec.substr(10), head);
        if (!head.empty()) throw bad("unexpected text before '@'");
        return normalized_inverse(a, b);
      }
      if (spec.rfind("list:", 0) == 0) {
        std::map<std::uint64_t, rational> values;
        std::stringstream ss(spec.substr(5));
        std::string item;
        while (std::getline(ss, item, ',')) {
          auto eq = item.find('=');
          if (eq == std::string::npos) throw bad("list items are n=value");
          params tmp(sub_, {{"n", item.substr(0, eq)}});
          auto n = tmp.positive("n");
          if (!values.emplace(n, parse_rational(item.substr(eq + 1))).second) throw bad("repeated n");
        }
        return support_function::from_map(values, value_range::nonnegative);
      }
    } catch (const usage_error&) {
      throw;
    } catch (const precondition_error& e) {
      throw bad(e.what());
    }
    throw bad("expected const:, inv:, normalized@ or list:");
  }

 private:
  std::string sub_;
  std::map<std::string, std::string> values_;
};

// ---------------------------------------------------------------------------

struct context {
  const params& p;
  unsigned workers;
  std::uint64_t seed;
  std::vector<json> records;
  std::size_t violations = 0;
  std::map<std::string, json> summary;  // extra fields for the summary record

  void emit(json r) { records.push_back(std::move(r)); }
};

inline json report_json(const ratio_report& r) {
  json j{{"instance_id", r.instance_id},
         {"lhs", exact(r.lhs)},
         {"log_rhs", jsonl::enclosure(r.log_rhs)},
         {"ratio", real(r.ratio)},
         {"max_over_sweep", real(r.max_over_sweep)}};
  j["rhs_core"] = r.rhs_exact ? exact(*r.rhs_exact) : real(r.rhs_core);
  return j;
}

namespace handlers {

inline void phi(context& c) {
  auto n = c.p.positive("n");
  if (c.p.flag("upto")) {
    if (n > 1'000'000) throw usage_error("phi: --upto is limited to n <= 1000000");
    auto table = phi_table(n);
    for (std::uint64_t k = 1; k <= n; ++k) c.emit({{"type", "phi"}, {"n", exact(k)}, {"phi", exact(table[k])}});
  } else {
    c.emit({{"type", "phi"}, {"n", exact(n)}, {"phi", exact(euler_phi(n))}});
  }
}

inline void count(context& c) {
  auto N = c.p.positive("n");
  rational alpha = c.p.q("alpha");
  auto psi = c.p.support("psi", N);
  auto S = count_solutions(alpha, N, psi);
  rational Psi = psi_mass(N, psi);
  json r{{"type", "count"}, {"alpha", exact(alpha)}, {"N", exact(N)}, {"S", exact(S)}, {"Psi", exact(Psi)}};
  if (Psi > 0) r["S_over_Psi"] = real(rational(to_rational(S) / Psi).get_d());
  c.emit(std::move(r));
}

inline void psi_mass_cmd(context& c) {
  auto N = c.p.positive("n");
  auto psi = c.p.support("psi", N);
  c.emit({{"type", "psi_mass"}, {"N", exact(N)}, {"Psi", exact(psi_mass(N, psi))}});
}

inline void overlap(context& c) {
  auto n = c.p.positive("n");
  auto m = c.p.positive("m");
  auto psi = c.p.support("psi", std::max(n, m));
  auto mode_name = c.p.choice("mode", {"constant", "general", "optimized"});
  overlap_mode mode = overlap_constant{};
  if (mode_name == "general") {
    mode = overlap_general{c.p.q("u").get_d(), c.p.q("T").get_d()};
  } else if (mode_name == "optimized") {
    mode = overlap_optimized{c.p.q("rho")};
  }
  auto b = overlap_rhs(n, m, psi, mode);
  json r{{"type", "overlap"}, {"n", exact(n)}, {"m", exact(m)}, {"mode", mode_name}, {"D", exact(b.D)},
         {"product", exact(b.product)}, {"error_term", real(b.error_term)}, {"factor", real(b.factor)}};
  if (mode_name != "constant") {
    r["u"] = real(b.u);
    r["T"] = real(b.T);
  }
  auto An = build_set(n, psi(n), numerators::coprime);
  auto Am = build_set(m, psi(m), numerators::coprime);
  rational denom = measure(An) * measure(Am);
  r["intersection"] = exact(intersect_measure(An, Am));
  if (denom > 0) r["observed_factor"] = exact(intersect_measure(An, Am) / denom);
  c.emit(std::move(r));
}

inline pair_set edge_set_from(context& c) {
  auto hi = c.p.u64("n");
  auto psi = c.p.support("psi", hi);
  auto theta = c.p.has("theta") ? c.p.support("theta", hi) : psi;
  rational t = c.p.q("t");
  if (t < 1) throw usage_error(c.p.text("t") + ": --t must be >= 1");
  return build_edge_set(psi, theta, t, c.p.q("C"), c.workers);
}

inline void edge_set(context& c) {
  auto E = edge_set_from(c);
  auto phi = multiplicative_weight::totient();
  if (c.p.flag("edges")) {
    for (auto& r : jsonl::to_records(E)) c.emit(std::move(r));
  }
  c.emit({{"type", "edge_set"},
          {"t", exact(c.p.q("t"))},
          {"C", exact(c.p.q("C"))},
          {"edges", exact(static_cast<std::uint64_t>(E.size()))},
          {"mu_E", exact(mu_pairs(E, phi, phi))}});
}

inline void layer(context& c) {
  auto E = edge_set_from(c);
  auto f = c.p.weight("f");
  auto g = c.p.weight("g");
  auto M = layer_matrix(E, f, g, c.p.positive("p"));
  for (auto& r : jsonl::to_records(M)) c.emit(std::move(r));
  std::vector<rational> cells, as, bs;
  for (const auto& kv : M.entries) cells.push_back(kv.second);
  for (const auto& kv : M.alpha) as.push_back(kv.second);
  for (const auto& kv : M.beta) bs.push_back(kv.second);
  bool normalized = sum(cells) == 1 && sum(as) == 1 && sum(bs) == 1;
  if (!normalized) ++c.violations;
  json check{{"type", "layer_check"}, {"normalized", normalized}};
  if (c.p.has("eps")) {
    auto eps = epsilon_params::make(c.p.q("eps"));
    auto v = bilinear_bound_violations(M, eps, c.p.q("c1"));
    json cellsj = json::array();
    for (auto [i, j] : v.violations) cellsj.push_back(json{{"i", exact(std::uint64_t{i})}, {"j", exact(std::uint64_t{j})}});
    check["bilinear_violations"] = cellsj;
    check["bilinear_indeterminate"] = exact(static_cast<std::uint64_t>(v.indeterminate.size()));
  }
  c.emit(std::move(check));
}

inline json main_json(const main_theorem_result& m, std::size_t edges) {
  json r = report_json(m.report);
  r["type"] = "main_theorem";
  r["edges"] = exact(static_cast<std::uint64_t>(edges));
  r["mu_V"] = exact(m.mu_V);
  r["mu_W"] = exact(m.mu_W);
  r["P"] = exact(m.P);
  r["log_bound"] = jsonl::enclosure(m.log_bound);
  r["absolute"] = to_string(m.absolute);
  return r;
}

inline void verify_main(context& c) {
  rational eps = c.p.q("eps");
  auto p0 = c.p.u64("p0");
  if (c.p.flag("sweep")) {
    if (c.p.has("psi") || c.p.has("theta")) throw usage_error("verify-main: --sweep builds its own psi/theta; drop --psi/--theta");
    main_sweep_options o;
    o.max_n = c.p.positive("n");
    o.seed = c.seed;
    o.eps = eps;
    o.p0 = p0;
    o.random_per_support = static_cast<unsigned>(c.p.u64("draws"));
    o.ts = c.p.q_list("ts");
    o.Cs = c.p.q_list("Cs");
    auto sweep = main_theorem_sweep(o, c.workers);
    double mx = 0.0;
    std::uint64_t undecided = 0;
    for (const auto& s : sweep) mx = std::max(mx, s.result.report.ratio);
    for (auto& s : sweep) {
      s.result.report.max_over_sweep = mx;
      if (s.result.absolute == verdict::fails) ++c.violations;
      if (s.result.absolute == verdict::indeterminate) ++undecided;
      if (!c.p.flag("quiet")) c.emit(main_json(s.result, s.edges));
    }
    c.summary["instances"] = exact(static_cast<std::uint64_t>(sweep.size()));
    c.summary["max_ratio"] = real(mx);
    c.summary["indeterminate"] = exact(undecided);
    return;
  }
  if (!c.p.has("psi")) throw usage_error("verify-main: --psi is required unless --sweep is given");
  auto E = edge_set_from(c);
  auto phi = multiplicative_weight::totient();
  auto m = main_theorem_ratio(E, phi, phi, epsilon_params::make(eps, p0), c.p.q("t"), c.p.q("C"), "single");
  if (m.absolute == verdict::fails) ++c.violations;
  c.emit(main_json(m, E.size()));
}

inline void verify_prop54(context& c) {
  auto X = c.p.q("X");
  auto Y = c.p.q("Y");
  if (Y < 1 || X > Y) throw usage_error("verify-prop54: need X <= Y and Y >= 1");
  std::uint64_t hi = to_u64(floor(Y));
  std::string spec = c.p.has("psi") ? c.p.text("psi") : "";
  support_function psi = c.p.has("psi") ? c.p.support("psi", hi)
                                        : normalized_inverse(std::max<std::uint64_t>(1, to_u64(std::max(ceil(X), integer(1)))), hi);
  auto res = prop54_check(psi, X, Y, c.p.q_list("ts"), c.p.q("C"), c.workers);
  double lo = std::numeric_limits<double>::infinity(), up = 0.0;
  for (std::size_t i = 0; i < res.reports.size(); ++i) {
    json r = report_json(res.reports[i]);
    r["type"] = "prop54";
    r["edges"] = exact(static_cast<std::uint64_t>(res.edge_counts[i]));
    c.emit(std::move(r));
    lo = std::min(lo, res.reports[i].ratio);
    up = std::max(up, res.reports[i].ratio);
  }
  c.summary["normalization"] = exact(res.normalization);
  c.summary["band_min"] = real(lo);
  c.summary["band_max"] = real(up);
  c.summary["within_2x_band"] = up <= 2 * lo;
}

inline void verify_concentration(context& c) {
  auto n = c.p.u64("count");
  std::mt19937_64 rng(c.seed);
  std::vector<concentration_instance> insts;
  for (std::uint64_t i = 0; i < n; ++i) insts.push_back(random_concentration_instance(rng));
  std::vector<concentration_result> res(insts.size());
  parallel_for(insts.size(), c.workers, [&](std::size_t i) { res[i] = concentration_check(insts[i]); });
  for (std::size_t i = 0; i < res.size(); ++i) {
    if (!res[i].c1_bound_holds) ++c.violations;
    c.emit({{"type", "concentration"},
            {"index", exact(static_cast<std::uint64_t>(i))},
            {"k", exact(rational(res[i].k))},
            {"c1", exact(insts[i].c1)},
            {"c1_lower", exact(res[i].c1_lower)},
            {"offdiag_mass", exact(res[i].offdiag_mass)},
            {"holds", res[i].c1_bound_holds}});
  }
}

inline void anatomy_cmd(context& c) {
  rational x = c.p.q("x");
  rational t = c.p.q("t");
  rational cc = c.p.q("c");
  anatomy_result res;
  if (c.p.flag("weighted")) {
    if (x.get_den() != 1 || x < 1) throw usage_error("anatomy: --weighted needs a positive integer --x (the M of the divisor sum)");
    res = anatomy_divisor_sum(to_u64(x.get_num()), c.p.weight("f"), t, cc);
  } else {
    res = anatomy_count(x, t, cc);
  }
  json r = report_json(res.report);
  r["type"] = "anatomy";
  r["value"] = exact(res.value);
  c.emit(std::move(r));
}

inline void anatomy_improved_cmd(context& c) {
  rational x = c.p.q("x"), t = c.p.q("t"), cc = c.p.q("c"), eps = c.p.q("eps");
  anatomy_hypothesis hyp{c.p.q("level")};
  auto mode = c.p.choice("mode", {"bound", "containment", "witness-large", "witness-small"});
  bool weighted = c.p.flag("weighted");
  if (weighted && mode != "bound") throw usage_error("anatomy-improved: --weighted only applies to --mode bound");
  if (mode == "bound") {
    auto res = anatomy_improved(x, t, cc, eps, weighted, c.p.weight("f"), hyp);
    json r = report_json(res.report);
    r["type"] = "anatomy_improved";
    r["value"] = exact(res.value);
    r["shift_T"] = jsonl::enclosure(res.shift_T);
    c.emit(std::move(r));
  } else if (mode == "containment") {
    if (x.get_den() != 1 || x < 1) throw usage_error("anatomy-improved: containment needs a positive integer --x");
    auto res = anatomy_containment(to_u64(x.get_num()), t, cc, eps, hyp);
    if (!res.holds) ++c.violations;
    json r{{"type", "containment"}, {"holds", res.holds}, {"inner_count", exact(res.inner_count)},
           {"outer_count", exact(res.outer_count)}, {"T", jsonl::enclosure(res.T)}};
    if (res.witness) r["witness"] = exact(*res.witness);
    c.emit(std::move(r));
  } else {
    auto w = anatomy_lower_witness(t, cc, eps, mode == "witness-large" ? witness_mode::large_c : witness_mode::small_c);
    json primes = json::array();
    for (auto q : w.primes) primes.push_back(exact(q));
    c.emit({{"type", "lower_witness"}, {"n0", exact(w.n0)}, {"primes", primes}, {"mass", exact(w.mass)},
            {"T", exact(w.T)}, {"mass_at_least_c", w.mass >= cc}});
  }
}

inline void second_moment_cmd(context& c) {
  auto N = c.p.positive("n");
  auto psi = c.p.support("psi", N);
  auto res = second_moment(N, psi, c.workers);
  rational sq = res.psi_N * res.psi_N;
  bool ok = res.sum >= sq;
  if (!ok) ++c.violations;
  json r{{"type", "second_moment"}, {"N", exact(N)}, {"sum", exact(res.sum)}, {"Psi", exact(res.psi_N)},
         {"Psi_squared", exact(sq)}, {"at_least_Psi_squared", ok}};
  if (res.ratio_to_psi_sq) r["ratio"] = real(*res.ratio_to_psi_sq);
  c.emit(std::move(r));
}

inline json class_json(std::uint64_t n, std::uint64_t m, const pair_class& k) {
  json f = json::array();
  for (int i = 0; i < 3; ++i) {
    if (k.f.test(i)) f.push_back("F" + std::to_string(i + 1));
  }
  return {{"type", "pair"}, {"n", exact(n)}, {"m", exact(m)}, {"label", to_string(k.label)},
          {"F", f}, {"decided", k.decided}, {"D", exact(k.D)}};
}

inline void classify(context& c) {
  auto N = c.p.positive("n");
  auto psi = c.p.support("psi", N);
  pair_classifier cls(psi, N, c.p.q("delta"), c.p.q("f-level"));
  if (c.p.has("pair")) {
    params tmp("classify", {{"r", c.p.text("pair")}});
    auto [a, b] = tmp.range("r");
    auto k = cls.classify(a, b);
    if (!k.decided || (k.label == e_label::E5 && k.f.none())) ++c.violations;
    c.emit(class_json(a, b, k));
    return;
  }
  std::vector<pair_class> all(N * N);
  parallel_for(N, c.workers, [&](std::size_t i) {
    for (std::uint64_t m = 1; m <= N; ++m) all[i * N + (m - 1)] = cls.classify(i + 1, m);
  });
  std::map<std::string, std::uint64_t> counts;
  std::uint64_t undecided = 0, e5_without_f = 0;
  bool list = c.p.flag("pairs");
  for (std::uint64_t n = 1; n <= N; ++n) {
    for (std::uint64_t m = 1; m <= N; ++m) {
      const auto& k = all[(n - 1) * N + (m - 1)];
      ++counts[to_string(k.label)];
      if (!k.decided) ++undecided;
      if (k.label == e_label::E5 && k.f.none()) ++e5_without_f;
      if (list) c.emit(class_json(n, m, k));
    }
  }
  c.violations += undecided + e5_without_f;
  json cj = json::object();
  for (const char* l : {"E1", "E2", "E3", "E4", "E5"}) cj[l] = exact(counts[l]);
  c.emit({{"type", "partition"}, {"N", exact(N)}, {"Psi", exact(cls.psi_N())}, {"counts", cj},
          {"undecided", exact(undecided)}, {"e5_without_f", exact(e5_without_f)}});
}

inline void prop6(context& c) {
  auto N = c.p.positive("n");
  auto psi = c.p.support("psi", N);
  auto variant = c.p.choice("variant", {"gcd", "anatomy"});
  prop6_variant v = variant == "gcd" ? prop6_variant(prop6_gcd{c.p.q("s"), c.p.q("eps")})
                                     : prop6_variant(prop6_anatomy{c.p.q("s"), c.p.q("t"), c.p.q("A"), c.p.q("eta")});
  auto res = prop6_bounds(psi, N, v, c.workers);
  json r = report_json(res.report);
  r["type"] = "prop6";
  r["edges"] = exact(static_cast<std::uint64_t>(res.edges));
  c.emit(std::move(r));
}

inline void dsgen(context& c) {
  auto k = c.p.u64("k");
  if (k > 64) throw usage_error("dsgen: --k must be <= 64");
  auto [lo, hi] = c.p.range("p-range");
  auto variant = c.p.choice("variant", {"full", "refined"}) == "full" ? ds_variant::full : ds_variant::refined;
  auto fam = build_family(static_cast<unsigned>(k), lo, hi, variant);
  json primes = json::array();
  for (auto q : fam.primes) primes.push_back(exact(q));
  c.emit({{"type", "family"}, {"k", exact(k)}, {"variant", to_string(variant)}, {"N", exact(fam.N)},
          {"eps", exact(fam.eps)}, {"primes", primes}, {"support_size", exact(static_cast<std::uint64_t>(fam.psi.size()))}});
  if (c.p.flag("psi-values")) {
    for (const auto& [n, v] : fam.psi.values()) c.emit({{"type", "psi"}, {"n", exact(n)}, {"value", exact(v)}});
  }
  if (c.p.flag("diagnostics")) {
    auto d = family_diagnostics(fam, c.workers);
    if (!d.consistent) ++c.violations;
    c.emit({{"type", "diagnostics"}, {"union_E", exact(d.union_E)}, {"sum_E", exact(d.sum_E)}, {"sum_A", exact(d.sum_A)},
            {"union_E_closed", exact(d.union_E_closed)}, {"sum_E_closed", exact(d.sum_E_closed)},
            {"sum_A_closed", exact(d.sum_A_closed)}, {"prime_mass", exact(d.prime_mass)},
            {"consistent", d.consistent}});
  }
  if (c.p.flag("valuations")) {
    auto vs = valuation_structure(fam);
    json w = json::array();
    for (const auto& x : vs.witnesses) w.push_back({{"v", exact(x.v)}, {"w", exact(x.w)}, {"prime", exact(x.prime)}});
    c.emit({{"type", "valuations"}, {"holds", vs.holds}, {"witnesses", w}});
  }
}

}  // namespace handlers

struct subcommand {
  subcommand_spec spec;
  std::function<void(context&)> body;
};

inline const std::vector<subcommand>& registry() {
  static const std::vector<subcommand> table = [] {
    auto req = [](std::string n, std::string h) { return param_spec{std::move(n), param_kind::required, "", std::move(h)}; };
    auto opt = [](std::string n, std::string d, std::string h) {
      return param_spec{std::move(n), param_kind::defaulted, std::move(d), std::move(h)};
    };
    auto maybe = [](std::string n, std::string h) { return param_spec{std::move(n), param_kind::optional, "", std::move(h)}; };
    auto edge_params = [&](std::vector<param_spec> extra) {
      std::vector<param_spec> out{req("psi", "approximation function for V"), maybe("theta", "for W; defaults to psi"),
                                  opt("t", "1", "anatomy threshold t >= 1"), opt("C", "0", "anatomy mass C"),
                                  opt("n", "30", "upper end for const: specs without a range")};
      out.insert(out.end(), extra.begin(), extra.end());
      return out;
    };
    std::vector<subcommand> t;
    t.push_back({{"phi", "Euler totient", {req("n", "argument"), opt("upto", "false", "emit phi(1..n)")}}, handlers::phi});
    t.push_back({{"count", "S(N, alpha): coprime solutions with n <= N",
                  {req("alpha", "p/q"), req("n", "N"), opt("psi", "const:1/2", "approximation function")}},
                 handlers::count});
    t.push_back({{"psi-mass", "Psi(N) = sum 2 phi(n) psi(n) / n", {req("n", "N"), opt("psi", "const:1/2", "")}},
                 handlers::psi_mass_cmd});
    t.push_back({{"overlap", "overlap factor for lambda(A_n ∩ A_m)",
                  {req("n", ""), req("m", ""), opt("psi", "const:1/2", ""), opt("mode", "constant", "constant|general|optimized"),
                   opt("u", "2", "general mode"), opt("T", "2", "general mode"), opt("rho", "1/4", "optimized mode")}},
                 handlers::overlap});
    t.push_back({{"edge-set", "E^{t,C}_{psi,theta}", edge_params({opt("edges", "true", "emit the pair set records")})},
                 handlers::edge_set});
    t.push_back({{"layer-matrix", "p-adic layer matrix of an edge set",
                  edge_params({req("p", "prime"), opt("f", "phi", "phi|id|one"), opt("g", "phi", "phi|id|one"),
                               maybe("eps", "also check the bilinear bound"), opt("c1", "1", "bilinear constant")})},
                 handlers::layer});
    {
      auto ps = edge_params({opt("eps", "2/5", ""), opt("p0", "1", ""), opt("sweep", "false", "exhaustive interval sweep"),
                             opt("draws", "4", "sweep: random assignments per support"), opt("ts", "1,2", "sweep"),
                             opt("Cs", "0,1", "sweep"), opt("quiet", "false", "sweep: summary only")});
      ps[0] = maybe("psi", "approximation function (single instance)");
      t.push_back({{"verify-main", "ratio and absolute bound for the main edge-set estimate", ps}, handlers::verify_main});
    }
    t.push_back({{"verify-prop54", "t^2 mu(E_t) against 1/t",
                  {opt("X", "1", ""), opt("Y", "2000", ""), maybe("psi", "default: normalized c/n on [X, Y]"),
                   opt("ts", "1,2,4,8,16", ""), opt("C", "10", "")}},
                 handlers::verify_prop54});
    t.push_back({{"verify-concentration", "seeded random concentration instances", {opt("count", "1000", "")}},
                 handlers::verify_concentration});
    t.push_back({{"anatomy", "count or divisor sum over heavy integers",
                  {req("x", "x, or M with --weighted"), req("t", ""), req("c", ""), opt("weighted", "false", ""),
                   opt("f", "phi", "phi|id|one")}},
                 handlers::anatomy_cmd});
    t.push_back({{"anatomy-improved", "improved anatomy bounds, containment and witnesses",
                  {req("x", ""), req("t", ""), req("c", ""), req("eps", ""), opt("weighted", "false", ""),
                   opt("f", "phi", ""), opt("level", "10", "'sufficiently large' threshold"),
                   opt("mode", "bound", "bound|containment|witness-large|witness-small")}},
                 handlers::anatomy_improved_cmd});
    t.push_back({{"second-moment", "sum_{n,m <= N} lambda(A_n ∩ A_m) against Psi(N)^2",
                  {req("n", "N"), opt("psi", "const:1/2", "")}},
                 handlers::second_moment_cmd});
    t.push_back({{"classify", "E1..E5 / F1..F3 partition of [1,N]^2",
                  {req("n", "N"), opt("psi", "const:1/2", ""), opt("delta", "1/200", ""), opt("f-level", "10", ""),
                   maybe("pair", "n:m, classify one pair"), opt("pairs", "false", "emit every pair")}},
                 handlers::classify});
    t.push_back({{"prop6", "edge-set sums against the gcd / anatomy bounds",
                  {req("n", "N"), opt("psi", "const:1/2", ""), opt("variant", "gcd", "gcd|anatomy"), opt("s", "2", ""),
                   opt("eps", "1/10", "gcd"), opt("t", "1", "anatomy"), opt("A", "1", "anatomy"), opt("eta", "1/4", "anatomy")}},
                 handlers::prop6});
    t.push_back({{"dsgen", "counterexample blocks",
                  {req("k", ""), req("p-range", "N0:N1, primes in [N0, N1)"), opt("variant", "full", "full|refined"),
                   opt("diagnostics", "false", ""), opt("valuations", "false", ""), opt("psi-values", "false", "")}},
                 handlers::dsgen});
    return t;
  }();
  return table;
}

inline const subcommand* find_subcommand(const std::string& name) {
  for (const auto& s : registry()) {
    if (s.spec.name == name) return &s;
  }
  return nullptr;
}

/// Checks names and fills defaults; optional parameters stay absent unless given.
inline params validate(const experiment_config& cfg) {
  const subcommand* sub = find_subcommand(cfg.subcommand);
  if (!sub) throw usage_error("unknown subcommand '" + cfg.subcommand + "'");
  std::map<std::string, std::string> values;
  for (const auto& [k, v] : cfg.params) {
    bool known = std::any_of(sub->spec.params.begin(), sub->spec.params.end(), [&](const auto& p) { return p.name == k; });
    if (!known) throw usage_error(cfg.subcommand + ": unknown parameter --" + k);
    values[k] = v;
  }
  for (const auto& p : sub->spec.params) {
    if (values.count(p.name)) continue;
    if (p.kind == param_kind::required) throw usage_error(cfg.subcommand + ": missing required parameter --" + p.name);
    if (p.kind == param_kind::defaulted) values[p.name] = p.fallback;
  }
  return params(cfg.subcommand, std::move(values));
}

struct run_options {
  bool csv = false;
};

inline int run(const experiment_config& cfg, std::ostream& out, std::ostream& err, run_options opts = {}) {
  std::vector<json> records;
  std::size_t violations = 0;
  try {
    params p = validate(cfg);
    context c{p, cfg.workers ? *cfg.workers : default_workers(), cfg.seed, {}, 0, {}};
    find_subcommand(cfg.subcommand)->body(c);
    json summary{{"type", "summary"},
                 {"subcommand", cfg.subcommand},
                 {"seed", exact(cfg.seed)},
                 {"records", exact(static_cast<std::uint64_t>(c.records.size()))},
                 {"violations", exact(static_cast<std::uint64_t>(c.violations))},
                 {"status", c.violations ? "violation" : "ok"}};
    for (auto& [k, v] : c.summary) summary[k] = v;
    records = std::move(c.records);
    records.push_back(std::move(summary));
    violations = c.violations;
  } catch (const precondition_error& e) {
    err << "dslab: " << e.what() << '\n';
    return 1;
  } catch (const indeterminate_error& e) {
    err << "dslab: " << e.what() << '\n';
    return 1;
  }

  std::ofstream file;
  std::ostream* os = &out;
  if (!cfg.output.empty() && cfg.output != "-") {
    file.open(cfg.output, std::ios::binary | std::ios::trunc);
    if (!file) {
      err << "dslab: cannot write '" << cfg.output << "'\n";
      return 1;
    }
    os = &file;
  }
  if (opts.csv) {
    jsonl::csv_writer w(*os);
    for (const auto& r : records) w.write(r);
  } else {
    for (const auto& r : records) *os << jsonl::line(r) << '\n';
  }
  os->flush();
  if (!*os) {
    err << "dslab: write failed\n";
    return 1;
  }
  return violations ? 2 : 0;
}

/// Turns "--key value", "--key=value" and bare "--flag" into parameters.
inline void apply_flags(experiment_config& cfg, const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a.rfind("--", 0) != 0 || a.size() == 2) throw usage_error("unexpected argument '" + a + "'");
    std::string key = a.substr(2), value;
    auto eq = key.find('=');
    if (eq != std::string::npos) {
      value = key.substr(eq + 1);
      key = key.substr(0, eq);
    } else if (i + 1 < args.size() && args[i + 1].rfind("--", 0) != 0) {
      value = args[++i];
    } else {
      value = "true";
    }
    apply_setting(cfg, key, value);
  }
}

inline std::string usage() {
  std::ostringstream os;
  os << "subcommands:\n";
  for (const auto& s : registry()) {
    os << "  " << s.spec.name << "  " << s.spec.help << "\n";
    for (const auto& p : s.spec.params) {
      os << "      --" << p.name;
      if (p.kind == param_kind::required) os << " (required)";
      if (p.kind == param_kind::defaulted) os << " [" << p.fallback << "]";
      if (!p.help.empty()) os << "  " << p.help;
      os << "\n";
    }
  }
  return os.str();
}

}  // namespace dslab::cli
