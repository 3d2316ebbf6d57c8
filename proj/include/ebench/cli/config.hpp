#pragma once
// Run configuration: JSON document (comments allowed) plus command-line
// overrides, validated into a RunConfig.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ebench/channels.hpp"
#include "ebench/core.hpp"
#include "json.hpp"

namespace ebench::cli {

using nlohmann::json;

/// Schema or range violation; `problems` lists every failed check.
class ConfigError : public InvalidArgument {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

enum class Mode { cv, dv, convert, sweep, selftest };
enum class Format { json, csv };

const char* mode_name(Mode m);
std::optional<Mode> parse_mode(const std::string& s);

struct SweepConfig {
  std::string param;  // lambda | eta | tau | p | k | gain
  double from = 0.0;
  double to = 1.0;
  int steps = 11;
  Mode base = Mode::dv;  // mode each step runs in

  bool operator==(const SweepConfig&) const = default;
};

struct RunConfig {
  Mode mode = Mode::cv;
  channels::ChannelSpec channel;

  // cv
  double lambda = 1.0;
  double eta = 1.0;
  int cutoff = 40;
  int radial = 64;
  int angular = 64;
  double alpha_max = 0.0;  // flat ensemble radius, 0 = default

  // dv
  int d = 3;
  int k = 1;

  // convert
  std::string witness;   // mini-language or built-in
  double xi = 0.0;       // two-mode squeezed reference, 0 = derived from lambda

  std::optional<SweepConfig> sweep;

  std::string output;  // empty = stdout
  Format format = Format::json;
  std::uint64_t seed = 1;
  bool timing = true;

  bool operator==(const RunConfig&) const = default;
};

/// JSON text (comments allowed); errors carry line and column, prefixed by
/// `where` when given.
json parse_document(const std::string& text, const std::string& where = "");

/// Parses and validates a JSON config. Parse errors carry line and column.
RunConfig parse_config(const std::string& text);

/// Validates a JSON object (already merged with overrides).
RunConfig config_from_json(const json& doc);

json config_to_json(const RunConfig& cfg);
std::string serialize_config(const RunConfig& cfg);

/// Shorthand: identity | loss:TAU | depolarizing:P | heterodyne:G[:NR:NT] |
/// zmp | xmp | rank_k:K:SEED | filter:Q:INNER | kraus:FILE[:allow_non_cp]
channels::ChannelSpec parse_channel(const std::string& text);
channels::ChannelSpec channel_from_json(const json& j, const std::string& where);
json channel_to_json(const channels::ChannelSpec& spec);

/// Complex matrix from [[re, ...], ...] or [[[re, im], ...], ...].
CMatrix matrix_from_json(const json& j, const std::string& where);
json matrix_to_json(const CMatrix& m);

/// 1-based line and column of a byte offset.
std::pair<int, int> line_column(const std::string& text, std::size_t byte);

}  // namespace ebench::cli
