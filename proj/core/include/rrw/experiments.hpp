#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace rrw::experiments {

inline constexpr const char* kToolName = "rrw";
inline constexpr const char* kToolVersion = "1.0.0";

enum class Format { csv, json };
enum class Grid { all, log };

/// Parameters of one run. Which fields matter depends on `command`.
struct RunConfig {
  std::string command;
  double a = 1.0;
  std::vector<double> a_list;
  long L = 1000;
  std::vector<long> L_list;
  double horizon_mult = 10.0;
  std::vector<double> horizon_list;
  long s_max = 0;  ///< 0: use horizon_mult * L^2
  int terms = 1000;
  std::uint64_t seed = 1;
  long walkers = 1000000;
  unsigned threads = 1;
  bool with_continuum = false;
  std::optional<double> q;  ///< imposed q for delta-scan
  Grid grid = Grid::log;
  int points_per_decade = 100;
  std::string out;
  Format format = Format::csv;

  bool operator==(const RunConfig&) const = default;
};

/// Names accepted as config keys; identical to the long CLI flags without
/// the leading dashes.
const std::vector<std::string>& config_keys();

/// Flat `key = value` text, one entry per line, '#' comments allowed.
/// Lists are comma separated. Unknown keys are rejected.
std::map<std::string, std::string> parse_config_text(const std::string& text);

/// Assigns one key. Throws ContractError on an unknown key or bad value.
void set_config_value(RunConfig& config, const std::string& key, const std::string& value);

RunConfig config_from_text(const std::string& text);

/// Writes every key; parsing the result gives back an equal config.
std::string config_to_text(const RunConfig& config);

/// Checks all parameters against the module preconditions for `command`.
void validate(const RunConfig& config);

using Cell = std::variant<long, double, std::string>;

/// A result table plus the metadata that goes around it.
struct Table {
  std::string schema;  ///< "<command>/<version>"
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  std::vector<std::pair<std::string, Cell>> footer;
};

std::string render_csv(const Table& table, const RunConfig& config);
std::string render_json(const Table& table, const RunConfig& config);
std::string render(const Table& table, const RunConfig& config);

/// Shortest decimal form that reads back to the same double.
std::string format_double(double value);

Table cmd_return_dist(const RunConfig& config);
Table cmd_continuum(const RunConfig& config);
Table cmd_table1(const RunConfig& config);
Table cmd_delta_scan(const RunConfig& config);
Table cmd_mean_return(const RunConfig& config);
Table cmd_simulate(const RunConfig& config);

/// Validates and dispatches on config.command.
Table run(const RunConfig& config);

const std::vector<std::string>& commands();

}  // namespace rrw::experiments
