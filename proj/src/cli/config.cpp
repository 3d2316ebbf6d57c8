#include "ebench/cli/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace ebench::cli {
namespace {

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) out += (out.empty() ? "" : "; ") + s;
  return out;
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// Collects problems instead of throwing on the first one.
class Reader {
 public:
  Reader(const json& obj, std::string where, std::vector<std::string>& problems)
      : obj_(obj), where_(std::move(where)), problems_(problems) {}

  void allow(std::initializer_list<const char*> keys) {
    std::set<std::string> ok(keys.begin(), keys.end());
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!ok.count(it.key())) problems_.push_back(path(it.key()) + ": unknown key");
    }
  }

  bool has(const char* key) const { return obj_.contains(key); }

  double number(const char* key, double fallback) {
    if (!obj_.contains(key)) return fallback;
    const json& v = obj_.at(key);
    if (!v.is_number()) {
      problems_.push_back(path(key) + ": expected a number");
      return fallback;
    }
    const double x = v.get<double>();
    if (!std::isfinite(x)) problems_.push_back(path(key) + ": must be finite");
    return x;
  }

  long long integer(const char* key, long long fallback) {
    if (!obj_.contains(key)) return fallback;
    const json& v = obj_.at(key);
    if (v.is_number_integer()) return v.get<long long>();
    if (v.is_number_float()) {
      const double x = v.get<double>();
      if (std::isfinite(x) && x == std::floor(x) && std::abs(x) < 9e15) return static_cast<long long>(x);
    }
    problems_.push_back(path(key) + ": expected an integer");
    return fallback;
  }

  std::uint64_t unsigned_integer(const char* key, std::uint64_t fallback) {
    if (!obj_.contains(key)) return fallback;
    const json& v = obj_.at(key);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<long long>() >= 0) return static_cast<std::uint64_t>(v.get<long long>());
    problems_.push_back(path(key) + ": expected a non-negative integer");
    return fallback;
  }

  bool boolean(const char* key, bool fallback) {
    if (!obj_.contains(key)) return fallback;
    const json& v = obj_.at(key);
    if (!v.is_boolean()) {
      problems_.push_back(path(key) + ": expected true or false");
      return fallback;
    }
    return v.get<bool>();
  }

  std::string string(const char* key, const std::string& fallback) {
    if (!obj_.contains(key)) return fallback;
    const json& v = obj_.at(key);
    if (!v.is_string()) {
      problems_.push_back(path(key) + ": expected a string");
      return fallback;
    }
    return v.get<std::string>();
  }

  void check(bool ok, const char* key, const std::string& rule, double got) {
    if (!ok) problems_.push_back(path(key) + ": " + rule + " (got " + num(got) + ")");
  }

  std::string path(const std::string& key) const { return where_.empty() ? key : where_ + "." + key; }

 private:
  const json& obj_;
  std::string where_;
  std::vector<std::string>& problems_;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double to_double(const std::string& s, const std::string& what) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v)) {
    throw InvalidArgument(what + ": '" + s + "' is not a finite number");
  }
  return v;
}

long long to_int(const std::string& s, const std::string& what) {
  char* end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size()) throw InvalidArgument(what + ": '" + s + "' is not an integer");
  return v;
}

std::vector<CMatrix> kraus_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw InvalidArgument(where + ": expected a nonempty list of matrices");
  std::vector<CMatrix> ops;
  for (std::size_t i = 0; i < j.size(); ++i) ops.push_back(matrix_from_json(j[i], where + "[" + std::to_string(i) + "]"));
  return ops;
}

void check_channel(const channels::ChannelSpec& s, const std::string& where, std::vector<std::string>& problems) {
  using K = channels::ChannelSpec::Kind;
  auto bad = [&](const std::string& field, const std::string& rule, double got) {
    problems.push_back(where + "." + field + ": " + rule + " (got " + num(got) + ")");
  };
  switch (s.kind) {
    case K::pure_loss:
      if (!(s.tau >= 0.0 && s.tau <= 1.0)) bad("tau", "must lie in [0, 1]", s.tau);
      break;
    case K::heterodyne_mp:
      if (!(s.gain >= 0.0)) bad("gain", "must be >= 0", s.gain);
      if (s.radial_nodes < 0) bad("radial_nodes", "must be >= 0", s.radial_nodes);
      if (s.angular_nodes < 0) bad("angular_nodes", "must be >= 0", s.angular_nodes);
      break;
    case K::qudit_depolarizing:
      if (!(s.p >= 0.0 && s.p <= 1.0)) bad("p", "must lie in [0, 1]", s.p);
      break;
    case K::rank_k_random:
      if (s.rank < 1) bad("k", "must be >= 1", s.rank);
      break;
    case K::kraus_explicit: {
      if (s.kraus.empty()) {
        problems.push_back(where + ".kraus: at least one operator required");
        break;
      }
      const auto n = s.kraus.front().cols();
      CMatrix e = CMatrix::Zero(n, n);
      bool shapes = true;
      for (const auto& k : s.kraus) {
        if (k.rows() != n || k.cols() != n) shapes = false;
        else e += k.adjoint() * k;
      }
      if (!shapes) {
        problems.push_back(where + ".kraus: operators must be square with a common dimension");
        break;
      }
      Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (e + e.adjoint()), Eigen::EigenvaluesOnly);
      if (!s.allow_non_cp && es.eigenvalues().maxCoeff() > 1.0 + 1e-9) {
        problems.push_back(where + ".kraus: sum K^dagger K exceeds the identity (max eigenvalue " +
                           num(es.eigenvalues().maxCoeff()) + "); set allow_non_cp to accept it");
      }
      break;
    }
    case K::filter_scale:
      if (!(s.q > 0.0 && s.q <= 1.0)) bad("q", "must lie in (0, 1]", s.q);
      if (s.inner.size() != 1) problems.push_back(where + ".inner: exactly one inner channel required");
      else check_channel(s.inner.front(), where + ".inner", problems);
      break;
    default:
      break;
  }
}

std::optional<channels::ChannelSpec::Kind> kind_from_name(const std::string& name) {
  using K = channels::ChannelSpec::Kind;
  for (K k : {K::identity, K::pure_loss, K::heterodyne_mp, K::qudit_depolarizing, K::z_measure_prepare,
              K::x_measure_prepare, K::rank_k_random, K::kraus_explicit, K::filter_scale}) {
    if (name == channels::kind_name(k)) return k;
  }
  return std::nullopt;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : InvalidArgument("invalid configuration: " + join(problems)), problems_(std::move(problems)) {}

const char* mode_name(Mode m) {
  switch (m) {
    case Mode::cv: return "cv";
    case Mode::dv: return "dv";
    case Mode::convert: return "convert";
    case Mode::sweep: return "sweep";
    case Mode::selftest: return "selftest";
  }
  return "?";
}

std::optional<Mode> parse_mode(const std::string& s) {
  for (Mode m : {Mode::cv, Mode::dv, Mode::convert, Mode::sweep, Mode::selftest}) {
    if (s == mode_name(m)) return m;
  }
  return std::nullopt;
}

std::pair<int, int> line_column(const std::string& text, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

CMatrix matrix_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty() || !j[0].is_array() || j[0].empty()) {
    throw InvalidArgument(where + ": expected a nonempty list of rows");
  }
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  CMatrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw InvalidArgument(where + ": rows must have equal length");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      const json& e = row[static_cast<std::size_t>(c)];
      if (e.is_number()) {
        m(r, c) = e.get<double>();
      } else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
        m(r, c) = Complex(e[0].get<double>(), e[1].get<double>());
      } else {
        throw InvalidArgument(where + ": entries must be numbers or [re, im] pairs");
      }
      if (!std::isfinite(m(r, c).real()) || !std::isfinite(m(r, c).imag())) {
        throw InvalidArgument(where + ": non-finite entry");
      }
    }
  }
  return m;
}

json matrix_to_json(const CMatrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
    rows.push_back(row);
  }
  return rows;
}

channels::ChannelSpec parse_channel(const std::string& text) {
  using namespace channels;
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : text.substr(colon + 1);
  const auto args = rest.empty() ? std::vector<std::string>{} : split(rest, ':');
  auto need = [&](std::size_t lo, std::size_t hi) {
    if (args.size() < lo || args.size() > hi) {
      throw InvalidArgument("channel '" + text + "': wrong number of parameters for " + head);
    }
  };
  if (head == "identity" || head == "id") {
    need(0, 0);
    return identity_spec();
  }
  if (head == "loss" || head == "pure_loss") {
    need(1, 1);
    return pure_loss_spec(to_double(args[0], "loss tau"));
  }
  if (head == "depolarizing" || head == "qudit_depolarizing") {
    need(1, 1);
    return depolarizing_spec(to_double(args[0], "depolarizing p"));
  }
  if (head == "heterodyne" || head == "heterodyne_mp") {
    if (args.size() != 1 && args.size() != 3) {
      throw InvalidArgument("channel '" + text + "': heterodyne takes GAIN or GAIN:RADIAL:ANGULAR");
    }
    const double g = to_double(args[0], "heterodyne gain");
    if (args.size() == 3) {
      return heterodyne_spec(g, static_cast<int>(to_int(args[1], "heterodyne radial nodes")),
                             static_cast<int>(to_int(args[2], "heterodyne angular nodes")));
    }
    return heterodyne_spec(g);
  }
  if (head == "zmp" || head == "z_measure_prepare") {
    need(0, 0);
    return z_measure_prepare_spec();
  }
  if (head == "xmp" || head == "x_measure_prepare") {
    need(0, 0);
    return x_measure_prepare_spec();
  }
  if (head == "rank_k" || head == "rank_k_random") {
    need(2, 2);
    const long long seed = to_int(args[1], "rank_k seed");
    if (seed < 0) throw InvalidArgument("rank_k seed must be >= 0");
    return rank_k_random_spec(static_cast<int>(to_int(args[0], "rank_k k")), static_cast<std::uint64_t>(seed));
  }
  if (head == "filter" || head == "filter_scale") {
    const auto c2 = rest.find(':');
    if (c2 == std::string::npos) throw InvalidArgument("channel '" + text + "': filter takes Q:INNER");
    return filter_scale_spec(to_double(rest.substr(0, c2), "filter q"), parse_channel(rest.substr(c2 + 1)));
  }
  if (head == "kraus" || head == "kraus_explicit") {
    need(1, 2);
    bool allow = false;
    if (args.size() == 2) {
      if (args[1] != "allow_non_cp") throw InvalidArgument("kraus: second field must be allow_non_cp");
      allow = true;
    }
    std::ifstream in(args[0]);
    if (!in) throw InvalidArgument("kraus: cannot read '" + args[0] + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    const json j = parse_document(ss.str(), "kraus: " + args[0]);
    if (j.is_object()) {
      if (j.contains("allow_non_cp") && j["allow_non_cp"].is_boolean()) allow = allow || j["allow_non_cp"].get<bool>();
      return kraus_explicit_spec(kraus_from_json(j.value("kraus", json()), args[0] + ".kraus"), allow);
    }
    return kraus_explicit_spec(kraus_from_json(j, args[0]), allow);
  }
  throw InvalidArgument("unknown channel '" + text + "'");
}

channels::ChannelSpec channel_from_json(const json& j, const std::string& where) {
  if (j.is_string()) return parse_channel(j.get<std::string>());
  if (!j.is_object()) throw InvalidArgument(where + ": expected a shorthand string or an object");
  if (!j.contains("kind") || !j["kind"].is_string()) throw InvalidArgument(where + ".kind: required string");
  const auto kind = kind_from_name(j["kind"].get<std::string>());
  if (!kind) throw InvalidArgument(where + ".kind: unknown channel kind '" + j["kind"].get<std::string>() + "'");
  std::vector<std::string> problems;
  Reader r(j, where, problems);
  channels::ChannelSpec s;
  s.kind = *kind;
  using K = channels::ChannelSpec::Kind;
  switch (*kind) {
    case K::identity:
    case K::z_measure_prepare:
    case K::x_measure_prepare:
      r.allow({"kind"});
      break;
    case K::pure_loss:
      r.allow({"kind", "tau"});
      s.tau = r.number("tau", s.tau);
      break;
    case K::heterodyne_mp:
      r.allow({"kind", "gain", "radial_nodes", "angular_nodes"});
      s.gain = r.number("gain", s.gain);
      s.radial_nodes = static_cast<int>(r.integer("radial_nodes", 0));
      s.angular_nodes = static_cast<int>(r.integer("angular_nodes", 0));
      break;
    case K::qudit_depolarizing:
      r.allow({"kind", "p"});
      s.p = r.number("p", s.p);
      break;
    case K::rank_k_random:
      r.allow({"kind", "k", "seed"});
      s.rank = static_cast<int>(r.integer("k", s.rank));
      s.seed = r.unsigned_integer("seed", s.seed);
      break;
    case K::kraus_explicit:
      r.allow({"kind", "kraus", "allow_non_cp"});
      s.allow_non_cp = r.boolean("allow_non_cp", false);
      if (!j.contains("kraus")) problems.push_back(where + ".kraus: required");
      else s.kraus = kraus_from_json(j["kraus"], where + ".kraus");
      break;
    case K::filter_scale:
      r.allow({"kind", "q", "inner"});
      s.q = r.number("q", s.q);
      if (!j.contains("inner")) problems.push_back(where + ".inner: required");
      else s.inner.push_back(channel_from_json(j["inner"], where + ".inner"));
      break;
  }
  if (!problems.empty()) throw ConfigError(problems);
  return s;
}

json channel_to_json(const channels::ChannelSpec& s) {
  using K = channels::ChannelSpec::Kind;
  json j;
  j["kind"] = channels::kind_name(s.kind);
  switch (s.kind) {
    case K::pure_loss: j["tau"] = s.tau; break;
    case K::heterodyne_mp:
      j["gain"] = s.gain;
      j["radial_nodes"] = s.radial_nodes;
      j["angular_nodes"] = s.angular_nodes;
      break;
    case K::qudit_depolarizing: j["p"] = s.p; break;
    case K::rank_k_random:
      j["k"] = s.rank;
      j["seed"] = s.seed;
      break;
    case K::kraus_explicit: {
      json ops = json::array();
      for (const auto& k : s.kraus) ops.push_back(matrix_to_json(k));
      j["kraus"] = ops;
      j["allow_non_cp"] = s.allow_non_cp;
      break;
    }
    case K::filter_scale:
      j["q"] = s.q;
      j["inner"] = channel_to_json(s.inner.front());
      break;
    default: break;
  }
  return j;
}

RunConfig config_from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError({"top level: expected a JSON object"});
  std::vector<std::string> problems;
  Reader r(doc, "", problems);
  r.allow({"mode", "channel", "lambda", "eta", "cutoff", "radial", "angular", "alpha_max", "d", "k", "witness",
           "xi", "sweep", "output", "format", "seed", "timing"});
  RunConfig c;

  const std::string mode = r.string("mode", mode_name(c.mode));
  if (auto m = parse_mode(mode)) c.mode = *m;
  else problems.push_back("mode: must be one of cv, dv, convert, sweep, selftest (got '" + mode + "')");

  if (doc.contains("channel")) {
    try {
      c.channel = channel_from_json(doc["channel"], "channel");
      check_channel(c.channel, "channel", problems);
    } catch (const ConfigError& e) {
      problems.insert(problems.end(), e.problems().begin(), e.problems().end());
    } catch (const InvalidArgument& e) {
      problems.push_back(std::string("channel: ") + e.what());
    }
  }

  c.lambda = r.number("lambda", c.lambda);
  r.check(c.lambda >= 0.0, "lambda", "must be >= 0", c.lambda);
  c.eta = r.number("eta", c.eta);
  r.check(c.eta >= 0.0, "eta", "must be >= 0", c.eta);
  c.cutoff = static_cast<int>(r.integer("cutoff", c.cutoff));
  r.check(c.cutoff >= 1 && c.cutoff <= 400, "cutoff", "must lie in [1, 400]", c.cutoff);
  c.radial = static_cast<int>(r.integer("radial", c.radial));
  r.check(c.radial >= 2 && c.radial <= 1024, "radial", "must lie in [2, 1024]", c.radial);
  c.angular = static_cast<int>(r.integer("angular", c.angular));
  r.check(c.angular >= 2 && c.angular <= 4096, "angular", "must lie in [2, 4096]", c.angular);
  c.alpha_max = r.number("alpha_max", c.alpha_max);
  r.check(c.alpha_max >= 0.0, "alpha_max", "must be >= 0", c.alpha_max);
  c.d = static_cast<int>(r.integer("d", c.d));
  r.check(c.d >= 2 && c.d <= 64, "d", "must lie in [2, 64]", c.d);
  c.k = static_cast<int>(r.integer("k", c.k));
  c.witness = r.string("witness", c.witness);
  c.xi = r.number("xi", c.xi);
  r.check(c.xi == 0.0 || (c.xi > 0.0 && c.xi < 1.0), "xi", "must lie in (0, 1) (0 = derived from lambda)", c.xi);

  if (doc.contains("sweep")) {
    const json& sj = doc["sweep"];
    if (!sj.is_object()) {
      problems.push_back("sweep: expected an object");
    } else {
      Reader s(sj, "sweep", problems);
      s.allow({"param", "from", "to", "steps", "mode"});
      SweepConfig sw;
      sw.param = s.string("param", "");
      static const std::set<std::string> params = {"lambda", "eta", "tau", "p", "k", "gain"};
      if (!params.count(sw.param)) {
        problems.push_back("sweep.param: must be one of lambda, eta, tau, p, k, gain (got '" + sw.param + "')");
      }
      sw.from = s.number("from", sw.from);
      sw.to = s.number("to", sw.to);
      sw.steps = static_cast<int>(s.integer("steps", sw.steps));
      s.check(sw.steps >= 1 && sw.steps <= 100000, "steps", "must lie in [1, 100000]", sw.steps);
      const bool dv_param = sw.param == "k" || sw.param == "p";
      const std::string base = s.string("mode", dv_param ? "dv" : "cv");
      if (base == "cv") sw.base = Mode::cv;
      else if (base == "dv") sw.base = Mode::dv;
      else problems.push_back("sweep.mode: must be cv or dv (got '" + base + "')");
      if (sw.param == "k") {
        if (sw.from != std::floor(sw.from) || sw.to != std::floor(sw.to)) {
          problems.push_back("sweep: k endpoints must be integers");
        }
        if (sw.base != Mode::dv) problems.push_back("sweep: k requires mode dv");
      }
      if ((sw.param == "lambda" || sw.param == "eta") && sw.base != Mode::cv) {
        problems.push_back("sweep: " + sw.param + " requires mode cv");
      }
      c.sweep = sw;
    }
  }
  if (c.mode == Mode::sweep && !c.sweep) problems.push_back("sweep: required in sweep mode");

  c.output = r.string("output", c.output);
  const std::string fmt = r.string("format", c.mode == Mode::sweep ? "csv" : "json");
  if (fmt == "json") c.format = Format::json;
  else if (fmt == "csv") c.format = Format::csv;
  else problems.push_back("format: must be json or csv (got '" + fmt + "')");

  std::uint64_t env_seed = 1;
  if (const char* e = std::getenv("EBENCH_SEED")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(e, &end, 10);
    if (*e != '\0' && *end == '\0') env_seed = v;
    else problems.push_back("EBENCH_SEED: expected a non-negative integer (got '" + std::string(e) + "')");
  }
  c.seed = r.unsigned_integer("seed", env_seed);
  c.timing = r.boolean("timing", c.timing);

  const bool dv_run = c.mode == Mode::dv || (c.mode == Mode::sweep && c.sweep && c.sweep->base == Mode::dv);
  if (dv_run && !(c.sweep && c.sweep->param == "k")) {
    r.check(c.k >= 1 && c.k <= c.d - 1, "k", "must lie in [1, d-1]", c.k);
  }
  if (c.sweep && c.sweep->param == "k") {
    const double lo = std::min(c.sweep->from, c.sweep->to), hi = std::max(c.sweep->from, c.sweep->to);
    if (lo < 1 || hi > c.d - 1) problems.push_back("sweep: k range must lie in [1, d-1]");
  }
  if (c.mode == Mode::convert && c.witness.empty()) problems.push_back("witness: required in convert mode");

  if (!problems.empty()) throw ConfigError(problems);
  return c;
}

json parse_document(const std::string& text, const std::string& where) {
  try {
    return json::parse(text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte == 0 ? 0 : e.byte - 1);
    std::string msg = e.what();
    const auto pos = msg.find("parse error");
    throw ConfigError({(where.empty() ? "" : where + ": ") + "line " + std::to_string(line) + ", column " +
                       std::to_string(col) + ": " + (pos == std::string::npos ? msg : msg.substr(pos))});
  }
}

RunConfig parse_config(const std::string& text) { return config_from_json(parse_document(text)); }

json config_to_json(const RunConfig& c) {
  json j;
  j["mode"] = mode_name(c.mode);
  j["channel"] = channel_to_json(c.channel);
  j["lambda"] = c.lambda;
  j["eta"] = c.eta;
  j["cutoff"] = c.cutoff;
  j["radial"] = c.radial;
  j["angular"] = c.angular;
  j["alpha_max"] = c.alpha_max;
  j["d"] = c.d;
  j["k"] = c.k;
  j["witness"] = c.witness;
  j["xi"] = c.xi;
  if (c.sweep) {
    j["sweep"] = {{"param", c.sweep->param},
                  {"from", c.sweep->from},
                  {"to", c.sweep->to},
                  {"steps", c.sweep->steps},
                  {"mode", mode_name(c.sweep->base)}};
  }
  j["output"] = c.output;
  j["format"] = c.format == Format::json ? "json" : "csv";
  j["seed"] = c.seed;
  j["timing"] = c.timing;
  return j;
}

std::string serialize_config(const RunConfig& c) { return config_to_json(c).dump(2); }

}  // namespace ebench::cli
