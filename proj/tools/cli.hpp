#pragma once

// Experiment orchestration for the holobec command line: typed configs with
// strict key checking, one runner per experiment, JSON result records and
// CSV parameter sweeps.

#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"

namespace holobec::cli {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kLibraryVersion = "0.1.0";

using Value = std::variant<bool, long long, double, std::string>;

enum class Kind { boolean, integer, real, text };

struct KeySpec {
  std::string name;
  Kind kind;
  Value fallback;
  std::string help;
};

/// Names the offending key.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string key, const std::string& what) : std::invalid_argument(what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

struct ExperimentConfig {
  std::string experiment;
  std::map<std::string, Value> values;

  double real(const std::string& key) const;
  long long integer(const std::string& key) const;
  bool flag(const std::string& key) const;
  const std::string& text(const std::string& key) const;

  /// Canonical echo: sorted keys, every key present, shortest round-trip numbers.
  nlohmann::json to_json() const;
  std::string canonical() const { return to_json().dump(); }
};

const std::vector<std::string>& experiment_names();

/// Keys accepted by an experiment. Sweeps accept their own keys plus those of
/// the base experiment.
std::vector<KeySpec> schema(const std::string& experiment, const std::string& base = "berry");

using Overrides = std::vector<std::pair<std::string, std::string>>;

/// Defaults, then file values, then flag overrides; unknown keys and
/// violated preconditions throw ConfigError.
ExperimentConfig make_config(const std::string& experiment, const nlohmann::json& file = nlohmann::json::object(),
                             const Overrides& overrides = {});

/// Rebuilds a config from its canonical echo.
ExperimentConfig config_from_echo(const nlohmann::json& echo);

struct Comparison {
  enum class Mode { match, circular, at_most, at_least };

  std::string name;
  double value = 0.0;
  double reference = 0.0;
  double tolerance = 0.0;
  Mode mode = Mode::match;
  double abs_error = 0.0;
  double rel_error = 0.0;
  bool pass = false;

  static Comparison make(std::string name, double value, double reference, double tolerance, Mode mode);
  nlohmann::json to_json() const;
};

struct ResultRecord {
  ExperimentConfig config;
  nlohmann::json results = nlohmann::json::object();
  std::vector<Comparison> comparisons;
  std::vector<std::string> warnings;
  double wall_time_s = 0.0;

  bool passed() const;
  /// Throws std::domain_error if any numeric field is not finite.
  nlohmann::json to_json() const;
};

/// Runs one (non-sweep) experiment.
ResultRecord run(const ExperimentConfig& config);

struct SweepOutput {
  std::string csv;
  nlohmann::json summary;
  std::size_t rows = 0;
  bool any_error = false;
  bool all_passed = true;
};

/// Parses "a,b,c" or "start:stop:count" (reals, inclusive) for the given key.
std::vector<Value> parse_axis(const KeySpec& spec, const std::string& text);

/// Cartesian product of up to two axes, evaluated by `workers` threads.
/// Rows come out in input order.
SweepOutput sweep(const ExperimentConfig& config, int workers);

/// Worker count: explicit > HOLOBEC_WORKERS > hardware concurrency.
int resolve_workers(int requested);

/// Process entry point. Exit codes: 0 pass, 2 tolerance failure, 1 error.
int main_entry(int argc, char** argv);

}  // namespace holobec::cli
