// ebench {cv|dv|convert|sweep|selftest} [flags] [--config FILE]

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "ebench/cli/config.hpp"
#include "ebench/cli/run.hpp"

namespace {

using ebench::cli::json;

struct Flags {
  std::string config;
  std::optional<std::string> channel, witness, output, format, sweep_param;
  std::optional<double> lambda, eta, alpha_max, xi, from, to;
  std::optional<int> cutoff, radial, angular, d, k, steps;
  std::optional<std::uint64_t> seed;
  bool no_timing = false;
};

void add_flags(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config, "JSON config file (comments allowed)");
  app->add_option("--channel", f.channel, "channel shorthand, e.g. loss:0.64, heterodyne:0.5, filter:0.3:identity");
  app->add_option("--lambda", f.lambda, "coherent ensemble width parameter");
  app->add_option("--eta", f.eta, "target gain squared");
  app->add_option("--cutoff", f.cutoff, "Fock cutoff (dimension - 1)");
  app->add_option("--radial", f.radial, "radial quadrature nodes");
  app->add_option("--angular", f.angular, "angular quadrature nodes");
  app->add_option("--alpha-max", f.alpha_max, "flat ensemble radius at lambda = 0");
  app->add_option("--d", f.d, "qudit dimension");
  app->add_option("--k", f.k, "Schmidt class k");
  app->add_option("--witness", f.witness, "witness text or built-in");
  app->add_option("--xi", f.xi, "two-mode squeezing of the convert reference");
  app->add_option("--sweep-param", f.sweep_param, "lambda | eta | tau | p | k | gain");
  app->add_option("--from", f.from, "sweep start");
  app->add_option("--to", f.to, "sweep end");
  app->add_option("--steps", f.steps, "sweep steps");
  app->add_option("--output", f.output, "output path (default stdout)");
  app->add_option("--format", f.format, "json | csv");
  app->add_option("--seed", f.seed, "seed for randomized checks");
  app->add_flag("--no-timing", f.no_timing, "omit wall-clock from reports");
}

template <class T>
void put(json& doc, const char* key, const std::optional<T>& v) {
  if (v) doc[key] = *v;
}

json overlay(json doc, const std::string& mode, const Flags& f) {
  doc["mode"] = mode;
  if (f.channel) doc["channel"] = *f.channel;
  put(doc, "lambda", f.lambda);
  put(doc, "eta", f.eta);
  put(doc, "cutoff", f.cutoff);
  put(doc, "radial", f.radial);
  put(doc, "angular", f.angular);
  put(doc, "alpha_max", f.alpha_max);
  put(doc, "d", f.d);
  put(doc, "k", f.k);
  put(doc, "witness", f.witness);
  put(doc, "xi", f.xi);
  put(doc, "output", f.output);
  put(doc, "format", f.format);
  put(doc, "seed", f.seed);
  if (f.no_timing) doc["timing"] = false;
  if (f.sweep_param || f.from || f.to || f.steps) {
    json sw = doc.contains("sweep") && doc["sweep"].is_object() ? doc["sweep"] : json::object();
    put(sw, "param", f.sweep_param);
    put(sw, "from", f.from);
    put(sw, "to", f.to);
    put(sw, "steps", f.steps);
    doc["sweep"] = sw;
  }
  return doc;
}

json load(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw ebench::InvalidArgument("config: cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  json doc = ebench::cli::parse_document(ss.str(), path);
  if (!doc.is_object()) throw ebench::InvalidArgument("config: " + path + ": top level must be an object");
  return doc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entanglement-breaking benchmarks for quantum channels"};
  app.require_subcommand(1);
  Flags flags;
  for (const char* name : {"cv", "dv", "convert", "sweep", "selftest"}) {
    add_flags(app.add_subcommand(name, std::string(name) + " run"), flags);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  const std::string mode = app.get_subcommands().front()->get_name();

  ebench::cli::RunConfig cfg;
  try {
    cfg = ebench::cli::config_from_json(overlay(load(flags.config), mode, flags));
  } catch (const ebench::cli::ConfigError& e) {
    for (const auto& p : e.problems()) std::cerr << "error: " << p << '\n';
    return 2;
  } catch (const ebench::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  try {
    return ebench::cli::execute(cfg, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 1;
  }
}
