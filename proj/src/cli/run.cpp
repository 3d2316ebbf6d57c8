#include "ebench/cli/run.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "ebench/cli/witness_lang.hpp"
#include "ebench/cv_benchmark.hpp"
#include "ebench/dv_benchmark.hpp"
#include "ebench/parallel.hpp"
#include "ebench/simd/kernels.hpp"
#include "ebench/version.hpp"

namespace ebench::cli {
namespace {

using Clock = std::chrono::steady_clock;

struct CvOutcome {
  cv::FidelityBenchReport report;
  std::size_t nodes = 0;
};

struct DvOutcome {
  dv::SchmidtBenchReport report;
};

CvOutcome cv_outcome(const RunConfig& cfg) {
  const fock::Space space = fock::fock_space("A", cfg.cutoff);
  const channels::Channel ch = channels::build_channel(cfg.channel, space);
  const cv::GridSpec grid{cfg.radial, cfg.angular, cfg.alpha_max};
  CvOutcome out;
  out.report = cv::fidelity_benchmark(ch, cfg.lambda, cfg.eta, space, grid);
  out.nodes = cv::make_grid(cfg.lambda, grid).size();
  return out;
}

DvOutcome dv_outcome(const RunConfig& cfg) {
  const fock::Space space = fock::qudit_space("A", cfg.d);
  const channels::Channel ch = channels::build_channel(cfg.channel, space);
  return {dv::schmidt_benchmark(ch, cfg.k)};
}

json provenance(const RunConfig& cfg, Clock::time_point start) {
  json p;
  p["version"] = kVersion;
  p["seed"] = cfg.seed;
  p["threads"] = parallel::thread_count();
  p["simd"] = simd::active().name;
  if (cfg.timing) {
    p["wall_clock_s"] = std::chrono::duration<double>(Clock::now() - start).count();
  }
  return p;
}

json record(const RunConfig& cfg, json results, json grid, double margin, double err, Clock::time_point start) {
  json j;
  j["config"] = config_to_json(cfg);
  j["results"] = std::move(results);
  j["grid"] = std::move(grid);
  j["provenance"] = provenance(cfg, start);
  j["verdict"] = verdict_name(classify(margin, err));
  return j;
}

double step_value(const SweepConfig& sw, int index) {
  if (sw.steps == 1) return sw.from;
  if (index == sw.steps - 1) return sw.to;
  return sw.from + (sw.to - sw.from) * index / (sw.steps - 1);
}

channels::ChannelSpec* find_kind(channels::ChannelSpec& s, channels::ChannelSpec::Kind kind) {
  if (s.kind == kind) return &s;
  if (s.kind == channels::ChannelSpec::Kind::filter_scale && !s.inner.empty()) return find_kind(s.inner[0], kind);
  return nullptr;
}

}  // namespace

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::violated: return "violated";
    case Verdict::satisfied: return "satisfied";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

Verdict classify(double margin, double error_estimate) {
  const double err = std::max(error_estimate, kVerdictFloor);
  if (!std::isfinite(margin) || !std::isfinite(err)) return Verdict::inconclusive;
  if (margin < -err) return Verdict::violated;
  if (margin > err) return Verdict::satisfied;
  return Verdict::inconclusive;
}

json run_cv(const RunConfig& cfg) {
  const auto start = Clock::now();
  const CvOutcome o = cv_outcome(cfg);
  const auto& r = o.report;
  json res;
  res["F_avg"] = r.F_avg;
  res["P_s"] = r.P_s;
  res["value"] = r.F_avg / r.P_s;
  res["threshold"] = r.threshold;
  res["margin"] = r.margin;
  res["raw_margin"] = r.raw_margin;
  res["quadrature_error"] = r.quadrature_error;
  res["truncation_error"] = r.truncation_error;
  res["dropped_weight"] = r.dropped_weight;
  res["error_estimate"] = r.error_estimate;
  res["lambda"] = r.lambda;
  res["eta"] = r.eta;
  res["notes"] = json::array({std::string("orientation: ") + r.orientation,
                              "margin = threshold - F_avg/P_s; raw_margin = P_s threshold - F_avg"});
  json grid;
  grid["kind"] = r.flat ? "flat" : "gaussian";
  grid["radial"] = r.radial;
  grid["angular"] = r.angular;
  grid["nodes"] = o.nodes;
  grid["alpha_max"] = r.alpha_max;
  grid["cutoff"] = r.cutoff;
  grid["error_check"] = "half grid";
  return record(cfg, std::move(res), std::move(grid), r.margin, r.error_estimate, start);
}

json run_dv(const RunConfig& cfg) {
  const auto start = Clock::now();
  const auto r = dv_outcome(cfg).report;
  json res;
  res["value"] = r.value;
  res["raw_value"] = r.raw_value;
  res["imag"] = r.imag;
  res["g"] = r.g;
  res["threshold"] = r.g;
  res["margin"] = r.margin;
  res["raw_margin"] = r.raw_margin;
  res["P_s"] = r.P_s;
  res["error_estimate"] = 0.0;
  res["k"] = r.k;
  res["d"] = r.d;
  res["notes"] = json::array(
      {"value carries the 1/2 weight of the two-basis sum; raw_value omits it",
       "P_s = (1/2d) sum over both bases of tr E(input), uniform weights over the 2d inputs",
       "margin = g - value; negative certifies a Kraus operator of Schmidt rank >= k + 1"});
  json grid;
  grid["kind"] = "qudit";
  grid["d"] = r.d;
  grid["inputs"] = 2 * r.d;
  return record(cfg, std::move(res), std::move(grid), r.margin, 0.0, start);
}

json run_convert(const RunConfig& cfg) {
  const auto start = Clock::now();
  const WitnessExpr expr = parse_witness(cfg.witness);
  json res, grid;
  witness::Consistency c;
  std::size_t members = 0;
  double dropped = 0.0, p_s = 0.0, budget = 0.0;

  if (expr.kind == WitnessExpr::Kind::schmidt) {
    if (expr.d != cfg.d) throw InvalidArgument("witness: schmidt_witness d must equal d (" + std::to_string(cfg.d) + ")");
    const fock::Space a = fock::qudit_space("A", cfg.d), b = fock::qudit_space("B", cfg.d);
    const witness::WitnessSpec w = materialize(expr, a);
    const fock::Operator psi = fock::projector(fock::maximally_entangled_ket(a, b));
    const channels::Channel ch = channels::build_channel(cfg.channel, a);
    c = witness::consistency_check(w, psi, ch, quad::QuadratureGrid{});
    const auto ens = witness::pair_ensemble(std::get<witness::QuditPairWitness>(w), psi);
    members = ens.members.size();
    dropped = ens.dropped_weight;
    p_s = witness::eb_value(w, ens, ch).P_s;
    res["reference"] = "maximally entangled";
    grid["kind"] = "qudit";
    grid["d"] = cfg.d;
  } else {
    double xi = cfg.xi;
    if (xi == 0.0) {
      if (!(cfg.lambda > 0.0)) throw InvalidArgument("xi: required when lambda = 0");
      xi = std::sqrt(1.0 / (1.0 + cfg.lambda));
    }
    const fock::Space a = fock::fock_space("A", cfg.cutoff), b = fock::fock_space("B", cfg.cutoff);
    const witness::WitnessSpec w = materialize(expr, a);
    const fock::StateVector ket = fock::two_mode_squeezed_ket(xi, a, b);
    const fock::Operator psi = fock::projector(ket);
    const channels::Channel ch = channels::build_channel(cfg.channel, a);
    const double grid_lambda = 1.0 - xi * xi;
    const quad::QuadratureGrid g = quad::gaussian_grid(grid_lambda, cfg.radial, cfg.angular);
    c = witness::consistency_check(w, psi, ch, g);
    const auto ens = witness::ensemble_from_state(ket, g);
    members = ens.members.size();
    dropped = ens.dropped_weight;
    p_s = witness::eb_value(w, ens, ch).P_s;
    budget = ens.error_estimate() + ket.truncation_defect;
    res["reference"] = "two-mode squeezed";
    res["xi"] = xi;
    res["reference_truncation_defect"] = ket.truncation_defect;
    if (expr.kind == WitnessExpr::Kind::fidelity) {
      const auto p = cv::GaussianBenchParams::from_witness(xi, expr.u * expr.u, expr.X);
      res["implied_lambda"] = p.lambda;
      res["implied_eta"] = p.eta;
    }
    grid["kind"] = "gaussian";
    grid["lambda"] = grid_lambda;
    grid["radial"] = cfg.radial;
    grid["angular"] = cfg.angular;
    grid["nodes"] = g.size();
    grid["cutoff"] = cfg.cutoff;
  }
  res["ensemble_value"] = c.ensemble_value;
  res["choi_value"] = c.choi_value;
  res["gap"] = c.gap;
  res["tolerance"] = c.tolerance;
  res["consistent"] = c.passed;
  res["P_s"] = p_s;
  res["members"] = members;
  res["dropped_weight"] = dropped;
  res["margin"] = c.ensemble_value;
  res["error_estimate"] = c.gap + budget;
  res["notes"] = json::array({"margin is the witness value; negative certifies a non entanglement-breaking channel"});
  return record(cfg, std::move(res), std::move(grid), c.ensemble_value, c.gap + budget, start);
}

RunConfig sweep_step_config(const RunConfig& cfg, int index) {
  if (!cfg.sweep) throw InvalidArgument("sweep: missing sweep block");
  const SweepConfig& sw = *cfg.sweep;
  if (index < 0 || index >= sw.steps) throw InvalidArgument("sweep: step index out of range");
  const double v = step_value(sw, index);
  RunConfig step = cfg;
  step.mode = sw.base;
  step.sweep.reset();
  using K = channels::ChannelSpec::Kind;
  auto need = [&](K kind) {
    channels::ChannelSpec* s = find_kind(step.channel, kind);
    if (!s) {
      throw InvalidArgument("sweep: channel " + channels::describe(cfg.channel) + " has no '" + sw.param +
                            "' parameter");
    }
    return s;
  };
  if (sw.param == "lambda") step.lambda = v;
  else if (sw.param == "eta") step.eta = v;
  else if (sw.param == "k") step.k = static_cast<int>(std::lround(v));
  else if (sw.param == "tau") need(K::pure_loss)->tau = v;
  else if (sw.param == "p") need(K::qudit_depolarizing)->p = v;
  else if (sw.param == "gain") need(K::heterodyne_mp)->gain = v;
  else throw InvalidArgument("sweep: unknown parameter '" + sw.param + "'");
  return step;
}

std::vector<SweepRow> run_sweep(const RunConfig& cfg) {
  if (!cfg.sweep) throw InvalidArgument("sweep: missing sweep block");
  const int steps = cfg.sweep->steps;
  std::vector<RunConfig> configs;
  for (int i = 0; i < steps; ++i) configs.push_back(sweep_step_config(cfg, i));  // validates before any work
  std::vector<SweepRow> rows(static_cast<std::size_t>(steps));
  parallel::for_ranges(
      rows.size(),
      [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
          const RunConfig& step = configs[i];
          SweepRow& row = rows[i];
          row.index = static_cast<int>(i);
          row.parameter = cfg.sweep->param;
          row.mode = step.mode;
          row.channel = channels::describe(step.channel);
          row.parameter_value = row.parameter == "k" ? step.k : step_value(*cfg.sweep, static_cast<int>(i));
          if (step.mode == Mode::cv) {
            const auto r = cv_outcome(step).report;
            row.margin = r.margin;
            row.raw_margin = r.raw_margin;
            row.value = r.F_avg / r.P_s;
            row.threshold = r.threshold;
            row.P_s = r.P_s;
            row.error_estimate = r.error_estimate;
          } else {
            const auto r = dv_outcome(step).report;
            row.margin = r.margin;
            row.raw_margin = r.raw_margin;
            row.value = r.value;
            row.threshold = r.g;
            row.P_s = r.P_s;
            row.error_estimate = 0.0;
          }
          row.verdict = classify(row.margin, row.error_estimate);
        }
      },
      1);
  return rows;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os.precision(17);
  os << kSweepColumns << "\r\n";
  for (const auto& r : rows) {
    os << r.index << ',' << csv_field(r.parameter) << ',' << r.parameter_value << ',' << mode_name(r.mode) << ','
       << csv_field(r.channel) << ',' << r.margin << ',' << r.raw_margin << ',' << r.value << ',' << r.threshold
       << ',' << r.P_s << ',' << r.error_estimate << ',' << verdict_name(r.verdict) << "\r\n";
  }
  return os.str();
}

json sweep_json(const RunConfig& cfg, const std::vector<SweepRow>& rows) {
  json j;
  j["config"] = config_to_json(cfg);
  j["rows"] = json::array();
  for (const auto& r : rows) {
    j["rows"].push_back({{"index", r.index},
                         {"parameter", r.parameter},
                         {"parameter_value", r.parameter_value},
                         {"mode", mode_name(r.mode)},
                         {"channel", r.channel},
                         {"margin", r.margin},
                         {"raw_margin", r.raw_margin},
                         {"value", r.value},
                         {"threshold", r.threshold},
                         {"P_s", r.P_s},
                         {"error_estimate", r.error_estimate},
                         {"verdict", verdict_name(r.verdict)}});
  }
  return j;
}

int execute(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  std::string text;
  int status = 0;
  try {
    const auto start = Clock::now();
    switch (cfg.mode) {
      case Mode::cv: text = run_cv(cfg).dump(2) + "\n"; break;
      case Mode::dv: text = run_dv(cfg).dump(2) + "\n"; break;
      case Mode::convert: text = run_convert(cfg).dump(2) + "\n"; break;
      case Mode::sweep: {
        const auto rows = run_sweep(cfg);
        if (cfg.format == Format::csv) {
          text = sweep_csv(rows);
        } else {
          json j = sweep_json(cfg, rows);
          j["provenance"] = provenance(cfg, start);
          text = j.dump(2) + "\n";
        }
        break;
      }
      case Mode::selftest: {
        const auto cases = run_selftest(cfg);
        int passed = 0;
        std::ostringstream os;
        for (const auto& c : cases) {
          passed += c.passed ? 1 : 0;
          os << (c.passed ? "PASS " : "FAIL ") << c.name;
          if (!c.detail.empty()) os << "  (" << c.detail << ")";
          os << '\n';
        }
        os << passed << "/" << cases.size() << " passed, " << (cases.size() - passed) << " failed\n";
        text = os.str();
        status = passed == static_cast<int>(cases.size()) ? 0 : 1;
        break;
      }
    }
  } catch (const ConfigError& e) {
    for (const auto& p : e.problems()) err << "error: " << p << '\n';
    return 2;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalFailure& e) {
    err << "numerical failure: " << e.what() << '\n';
    return 3;
  }
  if (cfg.output.empty()) {
    out << text;
  } else {
    std::ofstream f(cfg.output, std::ios::binary);
    if (!f) {
      err << "error: cannot write " << cfg.output << '\n';
      return 2;
    }
    f << text;
  }
  return status;
}

}  // namespace ebench::cli
