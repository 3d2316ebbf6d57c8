#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"

#include "ebench/cli/config.hpp"
#include "ebench/cli/run.hpp"
#include "ebench/cli/witness_lang.hpp"

using namespace ebench;
using namespace ebench::cli;

namespace {

std::filesystem::path temp_file(const std::string& name, const std::string& content) {
  const auto p = std::filesystem::temp_directory_path() / ("ebench_test_" + std::to_string(::getpid()) + "_" + name);
  std::ofstream(p) << content;
  return p;
}

std::vector<std::string> problems_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.problems();
  }
  return {};
}

bool mentions(const std::vector<std::string>& ps, const std::string& s) {
  for (const auto& p : ps)
    if (p.find(s) != std::string::npos) return true;
  return false;
}

int run_binary(const std::string& args, std::string* out = nullptr) {
  const auto log = std::filesystem::temp_directory_path() / ("ebench_cli_" + std::to_string(::getpid()) + ".log");
  const std::string cmd = std::string(EBENCH_BIN) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  if (out) {
    std::ifstream in(log);
    std::stringstream ss;
    ss << in.rdbuf();
    *out = ss.str();
  }
  std::filesystem::remove(log);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("minimal dv config gets documented defaults") {
  const RunConfig c = parse_config(R"({"mode": "dv", "channel": "identity"})");
  CHECK(c.mode == Mode::dv);
  CHECK(c.d == 3);
  CHECK(c.k == 1);
  CHECK(c.cutoff == 40);
  CHECK(c.radial == 64);
  CHECK(c.angular == 64);
  CHECK(c.lambda == 1.0);
  CHECK(c.format == Format::json);
  CHECK(c.timing);
}

TEST_CASE("unknown keys are rejected") {
  const auto ps = problems_of(R"({"mode": "cv", "lamda": 1})");
  CHECK(mentions(ps, "lamda"));
  CHECK(mentions(problems_of(R"({"mode": "cv", "channel": {"kind": "pure_loss", "tao": 0.5}})"), "tao"));
}

TEST_CASE("parse errors carry line and column") {
  const auto ps = problems_of("{\n  \"mode\": \"cv\",\n  \"lambda\": ,\n}");
  REQUIRE(ps.size() == 1);
  CHECK(ps[0].find("line 3") != std::string::npos);
  CHECK(ps[0].find("column") != std::string::npos);
  // comments are allowed
  CHECK(parse_config("{ // note\n \"mode\": \"dv\" }").mode == Mode::dv);
}

TEST_CASE("range violations are listed exhaustively") {
  const auto ps = problems_of(R"({"mode": "cv", "lambda": -1, "eta": -2, "cutoff": 0, "radial": 1})");
  CHECK(ps.size() >= 4);
  CHECK(mentions(ps, "lambda"));
  CHECK(mentions(ps, "eta"));
  CHECK(mentions(ps, "cutoff"));
  CHECK(mentions(ps, "radial"));
  CHECK(mentions(problems_of(R"({"mode": "dv", "d": 3, "k": 3})"), "k"));
  CHECK(mentions(problems_of(R"({"mode": "cv", "channel": "loss:1.5"})"), "tau"));
  CHECK(mentions(problems_of(R"({"mode": "cv", "lambda": "one"})"), "lambda"));
  CHECK(mentions(problems_of(R"({"mode": "nope"})"), "mode"));
}

TEST_CASE("non-CP Kraus sets need an explicit override") {
  const std::string bad = R"({"mode": "dv", "d": 2, "channel": {"kind": "kraus_explicit", "kraus": [[[1.1, 0], [0, 1.1]]]}})";
  CHECK(mentions(problems_of(bad), "kraus"));
  const std::string ok =
      R"({"mode": "dv", "d": 2, "channel": {"kind": "kraus_explicit", "allow_non_cp": true, "kraus": [[[1.1, 0], [0, 1.1]]]}})";
  CHECK(parse_config(ok).channel.allow_non_cp);
  const auto f = temp_file("kraus.json", "[[[0.5, 0], [0, 0.5]], [[[0, 0.5], 0], [0, [0, -0.5]]]]");
  const auto spec = parse_channel("kraus:" + f.string());
  CHECK(spec.kraus.size() == 2);
  CHECK(spec.kraus[1](0, 0) == Complex(0, 0.5));
  std::filesystem::remove(f);
}

TEST_CASE("round trip parse(serialize(config))") {
  std::vector<RunConfig> cfgs(5);
  cfgs[0].channel = channels::pure_loss_spec(0.64);
  cfgs[1].mode = Mode::dv;
  cfgs[1].d = 5;
  cfgs[1].k = 3;
  cfgs[1].channel = channels::filter_scale_spec(0.25, channels::rank_k_random_spec(2, 123456789012ull));
  cfgs[2].mode = Mode::sweep;
  cfgs[2].channel = channels::heterodyne_spec(0.75, 30, 60);
  cfgs[2].sweep = SweepConfig{"gain", 0.5, 1.5, 11, Mode::cv};
  cfgs[2].format = Format::csv;
  cfgs[2].output = "out, with \"quotes\".csv";
  cfgs[3].mode = Mode::convert;
  cfgs[3].witness = "fidelity_witness(0.1, 0.8, 0.6)";
  cfgs[3].xi = 0.5;
  cfgs[3].lambda = 1.0 / 3.0;
  cfgs[3].timing = false;
  cfgs[4].mode = Mode::dv;
  cfgs[4].d = 2;
  CMatrix k(2, 2);
  k << Complex(0.5, 0.1), 0.2, Complex(0, -0.3), 0.1;
  cfgs[4].channel = channels::kraus_explicit_spec({k}, false);
  for (const auto& c : cfgs) {
    const RunConfig back = parse_config(serialize_config(c));
    CHECK(back == c);
  }
}

TEST_CASE("channel shorthand") {
  CHECK(parse_channel("identity") == channels::identity_spec());
  CHECK(parse_channel("loss:0.64") == channels::pure_loss_spec(0.64));
  CHECK(parse_channel("depolarizing:0.6") == channels::depolarizing_spec(0.6));
  CHECK(parse_channel("heterodyne:0.5") == channels::heterodyne_spec(0.5));
  CHECK(parse_channel("heterodyne:0.5:20:40") == channels::heterodyne_spec(0.5, 20, 40));
  CHECK(parse_channel("zmp") == channels::z_measure_prepare_spec());
  CHECK(parse_channel("xmp") == channels::x_measure_prepare_spec());
  CHECK(parse_channel("rank_k:2:7") == channels::rank_k_random_spec(2, 7));
  CHECK(parse_channel("filter:0.3:loss:0.5") == channels::filter_scale_spec(0.3, channels::pure_loss_spec(0.5)));
  CHECK_THROWS_AS(parse_channel("loss"), InvalidArgument);
  CHECK_THROWS_AS(parse_channel("loss:abc"), InvalidArgument);
  CHECK_THROWS_AS(parse_channel("warp:9"), InvalidArgument);
  CHECK_THROWS_AS(parse_channel("kraus:/nonexistent/file.json"), InvalidArgument);
}

TEST_CASE("witness mini-language") {
  const WitnessExpr e = parse_witness("1.0 * A[I] - 0.5 * A[a] (bd) + (0, 2) * A[n] (bd^2 b^3) - A[ad](b)");
  REQUIRE(e.terms.size() == 4);
  CHECK(e.terms[0].coeff == Complex(1.0, 0.0));
  CHECK(e.terms[1].coeff == Complex(-0.5, 0.0));
  CHECK(e.terms[1].m == 1);
  CHECK(e.terms[1].n == 0);
  CHECK(e.terms[2].coeff == Complex(0.0, 2.0));
  CHECK(e.terms[2].m == 2);
  CHECK(e.terms[2].n == 3);
  CHECK(e.terms[3].coeff == Complex(-1.0, 0.0));
  CHECK(e.terms[3].ref == "ad");

  const auto a = fock::fock_space("A", 4);
  const auto spec = materialize(e, a);
  const auto& pw = std::get<witness::PolynomialWitness>(spec);
  CHECK((pw.terms[1].A - oracle::annihilation(5)).norm() < 1e-15);
  CHECK((pw.terms[2].A - oracle::annihilation(5).adjoint() * oracle::annihilation(5)).norm() < 1e-14);

  const WitnessExpr f = parse_witness("fidelity_witness(0.1, 0.8, 0.6)");
  CHECK(f.kind == WitnessExpr::Kind::fidelity);
  CHECK(std::holds_alternative<witness::CoherentIntegralWitness>(materialize(f, a)));
  const WitnessExpr s = parse_witness("schmidt_witness(2, 4)");
  CHECK(s.kind == WitnessExpr::Kind::schmidt);
  CHECK(std::get<witness::QuditPairWitness>(materialize(s, fock::qudit_space("A", 4))).pairs.size() >= 4);
  CHECK_THROWS_AS(materialize(s, fock::qudit_space("A", 3)), InvalidArgument);

  CHECK_THROWS_AS(parse_witness("fidelity_witness(0.1, 0.9, 0.9)"), InvalidArgument);
  CHECK_THROWS_AS(parse_witness("schmidt_witness(3, 3)"), InvalidArgument);
  CHECK_THROWS_AS(parse_witness("1.0 * A[I] (bd^40)"), InvalidArgument);
  try {
    parse_witness("1.0 * A[I] + * A[a]");
    FAIL("expected a parse error");
  } catch (const InvalidArgument& err) {
    CHECK(std::string(err.what()).find("column 14") != std::string::npos);
  }
}

TEST_CASE("witness operators from matrix files") {
  const auto f = temp_file("op.json", "[[1, 0, 0], [0, 0, [0, 1]], [0, [0, -1], 0]]");
  const auto spec = materialize(parse_witness("2 * A[" + f.string() + "] (b)"), fock::fock_space("A", 2));
  const auto& pw = std::get<witness::PolynomialWitness>(spec);
  CHECK(pw.terms[0].A(1, 2) == Complex(0, 1));
  CHECK_THROWS_AS(materialize(parse_witness("A[" + f.string() + "]"), fock::fock_space("A", 3)), InvalidArgument);
  std::filesystem::remove(f);
}

TEST_CASE("verdict classification") {
  CHECK(classify(-0.3, 0.01) == Verdict::violated);
  CHECK(classify(0.3, 0.01) == Verdict::satisfied);
  CHECK(classify(-0.005, 0.01) == Verdict::inconclusive);
  CHECK(classify(0.0, 0.0) == Verdict::inconclusive);
  CHECK(classify(-1e-13, 0.0) == Verdict::inconclusive);  // below the roundoff floor
  CHECK(classify(-2e-12, 0.0) == Verdict::violated);
  CHECK(classify(std::nan(""), 0.0) == Verdict::inconclusive);
  for (double m : {-1.0, -1e-3, 0.0, 1e-3, 1.0}) {
    for (double e : {0.0, 1e-4, 1e-2}) {
      const Verdict v = classify(m, e);
      if (v == Verdict::violated) CHECK(m < -e);
      if (v == Verdict::satisfied) CHECK(m > e);
    }
  }
}

TEST_CASE("RFC 4180 quoting") {
  CHECK(csv_field("plain") == "plain");
  CHECK(csv_field("a,b") == "\"a,b\"");
  CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(csv_field("two\nlines") == "\"two\nlines\"");
  std::vector<SweepRow> rows(1);
  rows[0].parameter = "p";
  rows[0].channel = "filter_scale(q=0.5, depolarizing)";
  const std::string csv = sweep_csv(rows);
  CHECK(csv.rfind(std::string(kSweepColumns) + "\r\n", 0) == 0);
  CHECK(csv.find("\"filter_scale(q=0.5, depolarizing)\"") != std::string::npos);
}

TEST_CASE("dv run: depolarizing example") {
  RunConfig c = parse_config(R"({"mode": "dv", "d": 3, "k": 1, "channel": "depolarizing:0.6"})");
  const json r = run_dv(c);
  CHECK(r["verdict"] == "satisfied");
  CHECK(r["results"]["margin"].get<double>() == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(r["results"]["value"].get<double>() == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(r["provenance"].contains("wall_clock_s"));
}

TEST_CASE("cv run: loss example and determinism") {
  RunConfig c = parse_config(R"({"mode": "cv", "channel": "loss:0.64", "lambda": 1, "eta": 0.64, "cutoff": 40, "timing": false})");
  const json r = run_cv(c);
  CHECK(r["verdict"] == "violated");
  CHECK(r["results"]["F_avg"].get<double>() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r["grid"]["cutoff"] == 40);
  CHECK(r["grid"]["radial"] == 64);
  CHECK_FALSE(r["provenance"].contains("wall_clock_s"));
  CHECK(run_cv(c).dump() == r.dump());
}

TEST_CASE("sweep p: depolarizing crossing") {
  RunConfig c = parse_config(
      R"({"mode": "sweep", "d": 3, "k": 1, "channel": "depolarizing:0", "sweep": {"param": "p", "from": 0, "to": 1, "steps": 11}})");
  const auto rows = run_sweep(c);
  REQUIRE(rows.size() == 11);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].index == static_cast<int>(i));
    if (i > 0) CHECK(rows[i].parameter_value > rows[i - 1].parameter_value);
    CHECK(rows[i].value == doctest::Approx(2.0 * (1.0 - rows[i].parameter_value)).epsilon(1e-12));
  }
  CHECK(rows[4].margin < 0.0);
  CHECK(rows[6].margin > 0.0);
  CHECK(rows[4].verdict == Verdict::violated);
  CHECK(rows[6].verdict == Verdict::satisfied);
  const auto again = run_sweep(c);
  CHECK(sweep_csv(again) == sweep_csv(rows));
}

TEST_CASE("sweep k: identity violates both classes") {
  RunConfig c = parse_config(
      R"({"mode": "sweep", "d": 3, "channel": "identity", "sweep": {"param": "k", "from": 1, "to": 2, "steps": 2}})");
  const auto rows = run_sweep(c);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].parameter_value == 1);
  CHECK(rows[1].parameter_value == 2);
  CHECK(rows[0].verdict == Verdict::violated);
  CHECK(rows[1].verdict == Verdict::violated);
}

TEST_CASE("sweep gain: heterodyne fidelity peaks at the optimal gain") {
  RunConfig c = parse_config(
      R"({"mode": "sweep", "cutoff": 30, "radial": 32, "angular": 32, "channel": "heterodyne:1",
          "sweep": {"param": "gain", "from": 0.5, "to": 1.5, "steps": 11}})");
  const auto rows = run_sweep(c);
  std::size_t best = 0;
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (rows[i].value > rows[best].value) best = i;
  CHECK(rows[best].parameter_value == doctest::Approx(0.5));  // 1 / (1 + lambda)
  CHECK(rows[best].value == doctest::Approx(2.0 / 3.0).epsilon(2e-3));
}

TEST_CASE("sweep parameter must exist on the channel") {
  RunConfig c = parse_config(
      R"({"mode": "sweep", "channel": "identity", "sweep": {"param": "tau", "from": 0.1, "to": 0.9, "steps": 3}})");
  CHECK_THROWS_AS(run_sweep(c), InvalidArgument);
  RunConfig f = parse_config(
      R"({"mode": "sweep", "channel": "filter:0.5:loss:0.5", "cutoff": 20, "radial": 16, "angular": 16,
          "sweep": {"param": "tau", "from": 0.2, "to": 0.8, "steps": 3}})");
  const auto rows = run_sweep(f);
  CHECK(rows[2].channel.find("0.8") != std::string::npos);
}

TEST_CASE("convert run") {
  RunConfig c = parse_config(R"J({"mode": "convert", "d": 3, "channel": "depolarizing:0.2", "witness": "schmidt_witness(1, 3)"})J");
  const json r = run_convert(c);
  CHECK(r["results"]["consistent"] == true);
  CHECK(r["results"]["gap"].get<double>() < 1e-10);
  CHECK(r["results"]["ensemble_value"].get<double>() == doctest::Approx(1.0 - 2.0 * 0.8).epsilon(1e-12));
  CHECK(r["verdict"] == "violated");
}

TEST_CASE("execute: exit codes") {
  std::ostringstream out, err;
  RunConfig ok = parse_config(R"({"mode": "dv", "channel": "identity"})");
  CHECK(execute(ok, out, err) == 0);
  RunConfig tiny = parse_config(R"({"mode": "dv", "channel": "filter:1e-13:identity"})");
  CHECK(execute(tiny, out, err) == 3);
  CHECK(err.str().find("P_s") != std::string::npos);
  RunConfig bad = parse_config(R"({"mode": "convert", "channel": "identity", "witness": "1.0 * A[zzz]"})");
  CHECK(execute(bad, out, err) == 2);
}

TEST_CASE("binary: flags, config files and exit status") {
  std::string text;
  CHECK(run_binary("cv --lambda -1", &text) == 2);
  CHECK(text.find("lambda") != std::string::npos);
  CHECK(run_binary("dv --d 3 --k 1 --channel depolarizing:0.6", &text) == 0);
  CHECK(text.find("\"satisfied\"") != std::string::npos);
  CHECK(run_binary("cv --config /nonexistent.json") == 2);
  CHECK(run_binary("cv --no-such-flag") == 2);
  CHECK(run_binary("dv --channel filter:1e-13:identity") == 3);

  const auto cfg = temp_file("cfg.json", R"({"channel": "depolarizing:0.5", "d": 4, "k": 2})");
  CHECK(run_binary("dv --config " + cfg.string() + " --k 1 --no-timing", &text) == 0);
  const json r = json::parse(text);
  CHECK(r["config"]["d"] == 4);
  CHECK(r["config"]["k"] == 1);  // flag overrides the file
  const auto broken = temp_file("broken.json", "{\n \"d\": 4,,\n}");
  CHECK(run_binary("dv --config " + broken.string(), &text) == 2);
  CHECK(text.find("line 2") != std::string::npos);
  std::filesystem::remove(cfg);
  std::filesystem::remove(broken);

  const auto out = std::filesystem::temp_directory_path() / ("ebench_sweep_" + std::to_string(::getpid()) + ".csv");
  CHECK(run_binary("sweep --d 3 --channel depolarizing:0 --sweep-param p --from 0 --to 1 --steps 5 --output " +
                   out.string()) == 0);
  std::ifstream in(out);
  std::string header;
  std::getline(in, header);
  CHECK(header.rfind(kSweepColumns, 0) == 0);
  std::filesystem::remove(out);
}
