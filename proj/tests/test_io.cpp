#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "dslab/cli.hpp"
#include "oracles.hpp"

using namespace dslab;
using oracle::frac;
using nlohmann::json;

namespace {

experiment_config cfg_of(std::string sub, std::map<std::string, std::string> params, std::uint64_t seed = 0) {
  experiment_config c;
  c.subcommand = std::move(sub);
  c.params = std::move(params);
  c.seed = seed;
  c.workers = 1;
  return c;
}

struct outcome {
  int code = 0;
  std::string out;
  std::string err;
};

outcome run_cfg(const experiment_config& c, bool csv = false) {
  std::ostringstream out, err;
  int code = cli::run(c, out, err, {csv});
  return {code, out.str(), err.str()};
}

std::vector<json> records_of(const std::string& text) {
  std::istringstream in(text);
  return jsonl::read_lines(in);
}

std::filesystem::path temp_file(const std::string& name, const std::string& body) {
  auto p = std::filesystem::temp_directory_path() / ("dslab_test_" + std::to_string(::getpid()) + "_" + name);
  std::ofstream(p) << body;
  return p;
}

}  // namespace

TEST(Config, ParsesReservedKeysAndParameters) {
  std::istringstream in(
      "# sweep\n"
      "subcommand = verify-main\n"
      "seed = 42   # trailing comment\n"
      "workers = 3\n"
      "\n"
      "  sweep = true\n"
      "output = run.jsonl\n");
  auto c = parse_config(in);
  EXPECT_EQ(c.subcommand, "verify-main");
  EXPECT_EQ(c.seed, 42u);
  EXPECT_EQ(c.workers, 3u);
  EXPECT_EQ(c.output, "run.jsonl");
  EXPECT_EQ(c.params, (std::map<std::string, std::string>{{"sweep", "true"}}));
}

TEST(Config, SerializeRoundTrips) {
  auto c = cfg_of("classify", {{"n", "300"}, {"delta", "1/200"}, {"psi", "list:1=1/2,7=1/3"}}, 99);
  c.output = "out.jsonl";
  std::istringstream in(serialize(c));
  EXPECT_EQ(parse_config(in), c);

  experiment_config bare;
  std::istringstream in2(serialize(bare));
  EXPECT_EQ(parse_config(in2), bare);

  c.params["bad"] = "a # b";
  EXPECT_THROW(serialize(c), config_error);
}

TEST(Config, RejectsMalformedInput) {
  for (std::string text : {"n = 1\nn = 2\n", "just words\n", "bad key = 1\n", "workers = 0\n", "workers = 300\n",
                           "seed = -4\n", "seed = 12x\n"}) {
    std::istringstream in(text);
    EXPECT_THROW(parse_config(in), config_error) << text;
  }
  EXPECT_THROW(load_config("/nonexistent/dslab.cfg"), config_error);
}

TEST(Config, Budgets) {
  auto p = temp_file("budgets.txt", "# calibration\nmain_max_ratio = 1.6992880596836852\nzero = 0\n");
  auto b = load_budgets(p.string());
  EXPECT_DOUBLE_EQ(b.at("main_max_ratio"), 1.6992880596836852);
  EXPECT_EQ(b.at("zero"), 0.0);
  auto bad = temp_file("bad_budgets.txt", "x = fast\n");
  EXPECT_THROW(load_budgets(bad.string()), config_error);
  std::filesystem::remove(p);
  std::filesystem::remove(bad);
}

TEST(Jsonl, NumberTags) {
  EXPECT_EQ(jsonl::exact(frac(3, 6)).dump(), R"({"exact":"1/2"})");
  EXPECT_EQ(jsonl::exact(std::uint64_t{7}).dump(), R"({"exact":"7/1"})");
  EXPECT_EQ(jsonl::read_exact(jsonl::exact(frac(-22, 7))), frac(-22, 7));
  EXPECT_EQ(jsonl::read_u64(jsonl::exact(std::uint64_t{1} << 63)), std::uint64_t{1} << 63);
  EXPECT_THROW(jsonl::read_u64(jsonl::exact(frac(1, 2))), precondition_error);
  EXPECT_DOUBLE_EQ(jsonl::read_float(jsonl::real(0.1)), 0.1);
  EXPECT_TRUE(jsonl::is_float(jsonl::real(std::nan(""))));
  EXPECT_TRUE(jsonl::all_numbers_tagged(json{{"a", jsonl::exact(frac(1, 3))}, {"b", {jsonl::real(2.5)}}}));
  EXPECT_FALSE(jsonl::all_numbers_tagged(json{{"a", 3}}));
}

TEST(Jsonl, PairSetRoundTrip) {
  auto psi = support_function::constant(1, 40, frac(1, 2));
  auto theta = support_function::from_map({{6, frac(1, 3)}, {10, frac(2, 5)}, {35, frac(1, 7)}});
  auto E = build_edge_set(psi, theta, 1, 0, 1);
  ASSERT_FALSE(E.empty());
  std::stringstream s;
  jsonl::write(s, E);
  auto back = jsonl::read_pair_set(s);
  EXPECT_EQ(back.edges(), E.edges());
  EXPECT_EQ(back.psi().values(), psi.values());
  EXPECT_EQ(back.theta().values(), theta.values());
  for (const auto& r : jsonl::to_records(E)) EXPECT_TRUE(jsonl::all_numbers_tagged(r));
}

TEST(Jsonl, MatrixRoundTrip) {
  auto psi = support_function::constant(1, 30, frac(1, 2));
  auto M = layer_matrix(build_edge_set(psi, psi, 1, 0, 1), multiplicative_weight::totient(),
                        multiplicative_weight::totient(), 3);
  std::stringstream s;
  jsonl::write(s, M);
  auto back = jsonl::read_matrix(s);
  EXPECT_EQ(back.prime, 3u);
  EXPECT_EQ(back.total, M.total);
  EXPECT_EQ(back.entries, M.entries);
  EXPECT_EQ(back.alpha, M.alpha);
  EXPECT_EQ(back.beta, M.beta);
}

TEST(Jsonl, RejectsMalformedLines) {
  std::istringstream in("{\"type\":\"pair_set\"\n");
  EXPECT_THROW(jsonl::read_lines(in), precondition_error);
}

TEST(Cli, EverySubcommandEmitsTaggedRecords) {
  const std::vector<experiment_config> runs = {
      cfg_of("phi", {{"n", "12"}, {"upto", "true"}}),
      cfg_of("count", {{"alpha", "3/10"}, {"n", "3"}}),
      cfg_of("psi-mass", {{"n", "10"}, {"psi", "inv:1/2@1:10"}}),
      cfg_of("overlap", {{"n", "2"}, {"m", "3"}}),
      cfg_of("overlap", {{"n", "1"}, {"m", "100"}, {"mode", "optimized"}, {"n", "1"}}),
      cfg_of("edge-set", {{"psi", "const:1/2@1:12"}, {"t", "2"}, {"C", "1/4"}}),
      cfg_of("layer-matrix", {{"psi", "const:1/2@1:12"}, {"p", "2"}, {"eps", "1/4"}}),
      cfg_of("verify-main", {{"psi", "const:1/4@1:20"}, {"theta", "list:2=1/2,6=1/8"}}),
      cfg_of("verify-prop54", {{"Y", "60"}, {"ts", "1,2"}, {"C", "0"}}),
      cfg_of("verify-concentration", {{"count", "20"}}, 5),
      cfg_of("anatomy", {{"x", "30"}, {"t", "2"}, {"c", "1/2"}}),
      cfg_of("anatomy", {{"x", "12"}, {"t", "2"}, {"c", "1/2"}, {"weighted", "true"}}),
      cfg_of("anatomy-improved", {{"x", "1000"}, {"t", "100"}, {"c", "1"}, {"eps", "1/4"}, {"level", "1/2"}}),
      cfg_of("anatomy-improved", {{"x", "2"}, {"t", "2"}, {"c", "1/2"}, {"eps", "1"}, {"mode", "witness-large"}}),
      cfg_of("second-moment", {{"n", "12"}}),
      cfg_of("classify", {{"n", "20"}}),
      cfg_of("prop6", {{"n", "30"}, {"s", "4"}}),
      cfg_of("prop6", {{"n", "30"}, {"variant", "anatomy"}, {"s", "1/2"}, {"t", "2"}, {"A", "3"}}),
      cfg_of("dsgen", {{"k", "3"}, {"p-range", "3:8"}, {"diagnostics", "true"}, {"valuations", "true"},
                       {"psi-values", "true"}}),
  };
  for (const auto& c : runs) {
    auto r = run_cfg(c);
    ASSERT_EQ(r.code, 0) << c.subcommand << ": " << r.err;
    auto recs = records_of(r.out);
    ASSERT_GE(recs.size(), 2u) << c.subcommand;
    for (const auto& rec : recs) ASSERT_TRUE(jsonl::all_numbers_tagged(rec)) << rec.dump();
    const auto& summary = recs.back();
    EXPECT_EQ(summary["type"], "summary");
    EXPECT_EQ(summary["subcommand"], c.subcommand);
    EXPECT_EQ(jsonl::read_u64(summary["records"]), recs.size() - 1);
    EXPECT_EQ(summary["status"], "ok");
  }
}

TEST(Cli, WorkedExampleValues) {
  auto recs = records_of(run_cfg(cfg_of("count", {{"alpha", "3/10"}, {"n", "3"}, {"psi", "const:1/2"}})).out);
  EXPECT_EQ(jsonl::read_exact(recs.front()["S"]), 3);

  recs = records_of(run_cfg(cfg_of("dsgen", {{"k", "3"}, {"p-range", "3:8"}, {"diagnostics", "true"}})).out);
  bool seen = false;
  for (const auto& r : recs) {
    if (r.contains("union_E")) {
      EXPECT_EQ(jsonl::read_exact(r["union_E"]), frac(1, 4));
      EXPECT_EQ(jsonl::read_exact(r["sum_A"]), frac(26, 105));
      seen = true;
    }
  }
  EXPECT_TRUE(seen);
}

TEST(Cli, UsageErrorsExitOneWithNoOutput) {
  const std::vector<experiment_config> bad = {
      cfg_of("nope", {}),
      cfg_of("count", {{"alpha", "3/10"}}),
      cfg_of("count", {{"alpha", "3/10"}, {"n", "3"}, {"typo", "1"}}),
      cfg_of("count", {{"alpha", "x"}, {"n", "3"}}),
      cfg_of("verify-main", {{"sweep", "true"}, {"psi", "const:1/2"}}),
      cfg_of("anatomy-improved", {{"x", "10"}, {"t", "100"}, {"c", "1"}, {"eps", "1/4"}, {"weighted", "true"},
                                  {"mode", "containment"}}),
      cfg_of("dsgen", {{"k", "3"}, {"p-range", "3:3"}}),
      cfg_of("edge-set", {{"psi", "bogus:1/2"}}),
      cfg_of("second-moment", {{"n", "5"}, {"psi", "const:3/4"}}),
  };
  for (const auto& c : bad) {
    auto r = run_cfg(c);
    EXPECT_EQ(r.code, 1) << c.subcommand;
    EXPECT_TRUE(r.out.empty()) << c.subcommand;
    EXPECT_FALSE(r.err.empty()) << c.subcommand;
  }
}

TEST(Cli, ViolationsExitTwo) {
  // Near t = e the containment fails at n = 15.
  auto r = run_cfg(cfg_of("anatomy-improved", {{"x", "200"}, {"t", "3"}, {"c", "1/2"}, {"eps", "1/10"},
                                               {"level", "1/1000"}, {"mode", "containment"}}));
  EXPECT_EQ(r.code, 2) << r.err;
  auto recs = records_of(r.out);
  EXPECT_EQ(recs.back()["status"], "violation");
  EXPECT_EQ(jsonl::read_u64(recs.back()["violations"]), 1u);
}

TEST(Cli, OutputIsDeterministic) {
  auto a = run_cfg(cfg_of("verify-concentration", {{"count", "40"}}, 11));
  auto b = run_cfg(cfg_of("verify-concentration", {{"count", "40"}}, 11));
  auto c = run_cfg(cfg_of("verify-concentration", {{"count", "40"}}, 12));
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out, c.out);

  auto one = cfg_of("edge-set", {{"psi", "const:1/2@1:80"}, {"t", "2"}, {"C", "1/3"}});
  auto many = one;
  many.workers = 4;
  EXPECT_EQ(run_cfg(one).out, run_cfg(many).out);
}

TEST(Cli, CsvOutput) {
  auto r = run_cfg(cfg_of("phi", {{"n", "4"}, {"upto", "true"}}), true);
  ASSERT_EQ(r.code, 0);
  std::istringstream in(r.out);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_NE(header.find("phi"), std::string::npos);
  EXPECT_NE(row.find("1/1"), std::string::npos);
}

TEST(Cli, OutputFile) {
  auto path = std::filesystem::temp_directory_path() / ("dslab_test_" + std::to_string(::getpid()) + ".jsonl");
  auto c = cfg_of("phi", {{"n", "10"}});
  c.output = path.string();
  auto r = run_cfg(c);
  EXPECT_EQ(r.code, 0);
  EXPECT_TRUE(r.out.empty());
  std::ifstream in(path);
  auto recs = jsonl::read_lines(in);
  EXPECT_EQ(jsonl::read_exact(recs.front()["phi"]), 4);
  std::filesystem::remove(path);

  c.output = "/nonexistent/dir/out.jsonl";
  EXPECT_EQ(run_cfg(c).code, 1);
}

TEST(Cli, ApplyFlags) {
  experiment_config c;
  cli::apply_flags(c, {"--n", "5", "--alpha=3/10", "--upto", "--seed", "4", "--workers", "2", "--C", "-1"});
  EXPECT_EQ(c.params.at("n"), "5");
  EXPECT_EQ(c.params.at("alpha"), "3/10");
  EXPECT_EQ(c.params.at("upto"), "true");
  EXPECT_EQ(c.params.at("C"), "-1");
  EXPECT_EQ(c.seed, 4u);
  EXPECT_EQ(c.workers, 2u);
  EXPECT_THROW(cli::apply_flags(c, {"stray"}), cli::usage_error);
  EXPECT_THROW(cli::apply_flags(c, {"--workers", "0"}), config_error);
}

TEST(Cli, SupportSpecs) {
  auto eval = [](std::string spec, std::string n) {
    return records_of(run_cfg(cfg_of("psi-mass", {{"n", n}, {"psi", spec}})).out).front();
  };
  EXPECT_EQ(jsonl::read_exact(eval("const:1/2", "3")["Psi"]), frac(13, 6));
  EXPECT_EQ(jsonl::read_exact(eval("list:1=1/2,2=1/2,3=1/2", "3")["Psi"]), frac(13, 6));
  EXPECT_EQ(jsonl::read_exact(eval("const:1/2@2:3", "3")["Psi"]), frac(7, 6));
  EXPECT_EQ(jsonl::read_exact(eval("inv:1/2@1:2", "2")["Psi"]), frac(5, 4));
}

TEST(Tool, EndToEnd) {
  const char* tool = std::getenv("DSLAB_TOOL");
  if (!tool) GTEST_SKIP() << "DSLAB_TOOL is not set";
  auto sh = [&](const std::string& args) {
    std::string cmd = std::string(tool) + " " + args + " 2>/dev/null";
    std::string out;
    FILE* p = popen(cmd.c_str(), "r");
    std::array<char, 4096> buf{};
    while (std::size_t n = std::fread(buf.data(), 1, buf.size(), p)) out.append(buf.data(), n);
    int status = pclose(p);
    return std::pair<int, std::string>{WEXITSTATUS(status), out};
  };
  auto [code, out] = sh("count --alpha 3/10 --n 3 --psi const:1/2");
  EXPECT_EQ(code, 0);
  EXPECT_EQ(jsonl::read_exact(records_of(out).front()["S"]), 3);

  auto cfg = temp_file("run.cfg", "subcommand = dsgen\nk = 3\np-range = 3:8\ndiagnostics = true\n");
  std::tie(code, out) = sh("--config " + cfg.string() + " --variant refined");
  EXPECT_EQ(code, 0);
  EXPECT_NE(out.find("\"union_E\":{\"exact\":\"19/140\"}"), std::string::npos);
  std::tie(code, out) = sh("count --config " + cfg.string());
  EXPECT_EQ(code, 1);
  std::filesystem::remove(cfg);

  EXPECT_EQ(sh("verify-main --sweep --psi const:1/2").first, 1);
  EXPECT_EQ(sh("").first, 1);
  EXPECT_EQ(sh("--list").first, 0);
}
