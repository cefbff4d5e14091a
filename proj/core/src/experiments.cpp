#include "rrw/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "rrw/chain.hpp"
#include "rrw/continuum.hpp"
#include "rrw/error.hpp"
#include "rrw/qstats.hpp"

namespace rrw::experiments {
namespace {

constexpr const char* kModule = "experiments";

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const std::string s = trim(text);
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if constexpr (std::is_integral_v<T>) {
    // accept integral values written in scientific form, e.g. 1e6
    if (ec == std::errc() && ptr != end) {
      double d = 0.0;
      auto [dptr, dec] = std::from_chars(begin, end, d);
      if (dec == std::errc() && dptr == end && d == std::floor(d) && std::abs(d) < 9e18) {
        return static_cast<T>(d);
      }
    }
  }
  detail::require(ec == std::errc() && ptr == end && !s.empty(), kModule,
                  "cannot parse value '" + text + "' for key '" + key + "'");
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string s = trim(text);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ContractError(kModule, "cannot parse boolean '" + text + "' for key '" + key + "'");
}

template <typename T>
std::string join(const std::vector<T>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    if constexpr (std::is_floating_point_v<T>) {
      out += format_double(values[i]);
    } else {
      out += std::to_string(values[i]);
    }
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& c) {
  return {
      {"command", c.command},
      {"a", format_double(c.a)},
      {"a-list", join(c.a_list)},
      {"L", std::to_string(c.L)},
      {"L-list", join(c.L_list)},
      {"horizon-mult", format_double(c.horizon_mult)},
      {"horizon-list", join(c.horizon_list)},
      {"s-max", std::to_string(c.s_max)},
      {"terms", std::to_string(c.terms)},
      {"seed", std::to_string(c.seed)},
      {"walkers", std::to_string(c.walkers)},
      {"threads", std::to_string(c.threads)},
      {"with-continuum", c.with_continuum ? "true" : "false"},
      {"q", c.q ? format_double(*c.q) : std::string()},
      {"grid", c.grid == Grid::all ? "all" : "log"},
      {"points-per-decade", std::to_string(c.points_per_decade)},
      {"out", c.out},
      {"format", c.format == Format::csv ? "csv" : "json"},
  };
}

std::string cell_text(const Cell& cell) {
  if (const long* v = std::get_if<long>(&cell)) return std::to_string(*v);
  if (const double* v = std::get_if<double>(&cell)) return format_double(*v);
  return std::get<std::string>(cell);
}

nlohmann::ordered_json cell_json(const Cell& cell) {
  if (const long* v = std::get_if<long>(&cell)) return *v;
  if (const double* v = std::get_if<double>(&cell)) {
    if (!std::isfinite(*v)) return nullptr;
    return *v;
  }
  return std::get<std::string>(cell);
}

long horizon(const RunConfig& c, long size) {
  if (c.s_max > 0) return c.s_max;
  return std::max<long>(
      1, std::lround(c.horizon_mult * static_cast<double>(size) * static_cast<double>(size)));
}

std::vector<long> grid_steps(const RunConfig& c, long s_max) {
  std::vector<long> steps;
  if (c.grid == Grid::all) {
    steps.resize(static_cast<std::size_t>(s_max));
    for (long s = 1; s <= s_max; ++s) steps[static_cast<std::size_t>(s - 1)] = s;
    return steps;
  }
  const double span = std::log10(static_cast<double>(s_max));
  const int count = std::max(2, static_cast<int>(std::ceil(span * c.points_per_decade)) + 1);
  for (int i = 0; i < count; ++i) {
    const long s = std::clamp<long>(
        std::lround(std::pow(10.0, span * static_cast<double>(i) / (count - 1))), 1, s_max);
    if (steps.empty() || s > steps.back()) steps.push_back(s);
  }
  return steps;
}

std::vector<double> or_default(const std::vector<double>& list, double fallback) {
  return list.empty() ? std::vector<double>{fallback} : list;
}

std::vector<long> or_default(const std::vector<long>& list, long fallback) {
  return list.empty() ? std::vector<long>{fallback} : list;
}

std::string one_line(std::string text) {
  std::replace(text.begin(), text.end(), ',', ';');
  std::replace(text.begin(), text.end(), '\n', ' ');
  return text;
}

void require_exponent(double a) {
  detail::require(std::isfinite(a) && a >= 0.0 && a < 2.0, kModule,
                  "a must satisfy 0 <= a < 2, got " + format_double(a));
}

void require_size(long size) {
  detail::require(size >= 2, kModule, "L must be >= 2, got " + std::to_string(size));
}

void require_increasing(const std::vector<long>& sizes) {
  for (long size : sizes) require_size(size);
  detail::require(std::adjacent_find(sizes.begin(), sizes.end(), std::greater_equal<>()) ==
                      sizes.end(),
                  kModule, "L-list must be strictly increasing");
}

// Parameters echoed into the output; the destination path is left out so the
// same run written to different files gives identical bytes.
std::vector<std::pair<std::string, std::string>> echoed_entries(const RunConfig& config) {
  auto entries = config_entries(config);
  std::erase_if(entries, [](const auto& entry) { return entry.first == "out"; });
  return entries;
}

}  // namespace

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buffer[64];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, ptr);
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> out;
    for (const auto& [key, value] : config_entries(RunConfig{})) out.push_back(key);
    return out;
  }();
  return keys;
}

const std::vector<std::string>& commands() {
  static const std::vector<std::string> names = {"return-dist", "continuum",   "table1",
                                                 "delta-scan",  "mean-return", "simulate"};
  return names;
}

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> entries;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string body = trim(line);
    if (body.empty() || body[0] == '#') continue;
    const auto eq = body.find('=');
    detail::require(eq != std::string::npos, kModule,
                    "config line " + std::to_string(number) + " is not key=value");
    const std::string key = trim(body.substr(0, eq));
    detail::require(std::find(config_keys().begin(), config_keys().end(), key) !=
                        config_keys().end(),
                    kModule, "unknown config key '" + key + "'");
    entries[key] = trim(body.substr(eq + 1));
  }
  return entries;
}

void set_config_value(RunConfig& c, const std::string& key, const std::string& value) {
  if (key == "command") {
    c.command = value;
  } else if (key == "a") {
    c.a = parse_number<double>(key, value);
  } else if (key == "a-list") {
    c.a_list.clear();
    for (const auto& item : split_list(value)) c.a_list.push_back(parse_number<double>(key, item));
  } else if (key == "L") {
    c.L = parse_number<long>(key, value);
  } else if (key == "L-list") {
    c.L_list.clear();
    for (const auto& item : split_list(value)) c.L_list.push_back(parse_number<long>(key, item));
  } else if (key == "horizon-mult") {
    c.horizon_mult = parse_number<double>(key, value);
  } else if (key == "horizon-list") {
    c.horizon_list.clear();
    for (const auto& item : split_list(value)) {
      c.horizon_list.push_back(parse_number<double>(key, item));
    }
  } else if (key == "s-max") {
    c.s_max = parse_number<long>(key, value);
  } else if (key == "terms") {
    c.terms = parse_number<int>(key, value);
  } else if (key == "seed") {
    c.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "walkers") {
    c.walkers = parse_number<long>(key, value);
  } else if (key == "threads") {
    c.threads = parse_number<unsigned>(key, value);
  } else if (key == "with-continuum") {
    c.with_continuum = parse_bool(key, value);
  } else if (key == "q") {
    if (trim(value).empty()) {
      c.q.reset();
    } else {
      c.q = parse_number<double>(key, value);
    }
  } else if (key == "grid") {
    const std::string v = trim(value);
    detail::require(v == "all" || v == "log", kModule, "grid must be 'all' or 'log'");
    c.grid = v == "all" ? Grid::all : Grid::log;
  } else if (key == "points-per-decade") {
    c.points_per_decade = parse_number<int>(key, value);
  } else if (key == "out") {
    c.out = trim(value);
  } else if (key == "format") {
    const std::string v = trim(value);
    detail::require(v == "csv" || v == "json", kModule, "format must be 'csv' or 'json'");
    c.format = v == "csv" ? Format::csv : Format::json;
  } else {
    throw ContractError(kModule, "unknown config key '" + key + "'");
  }
}

RunConfig config_from_text(const std::string& text) {
  RunConfig config;
  for (const auto& [key, value] : parse_config_text(text)) set_config_value(config, key, value);
  return config;
}

std::string config_to_text(const RunConfig& config) {
  std::string out;
  for (const auto& [key, value] : config_entries(config)) out += key + " = " + value + "\n";
  return out;
}

void validate(const RunConfig& c) {
  detail::require(std::find(commands().begin(), commands().end(), c.command) != commands().end(),
                  kModule, "unknown command '" + c.command + "'");
  detail::require(c.points_per_decade >= 1, kModule, "points-per-decade must be >= 1");
  detail::require(c.threads >= 1, kModule, "threads must be >= 1");
  detail::require(c.s_max >= 0, kModule, "s-max must be >= 0 (0 selects the horizon rule)");
  detail::require(std::isfinite(c.horizon_mult) && c.horizon_mult > 0.0, kModule,
                  "horizon-mult must be positive");

  const std::string& cmd = c.command;
  if (cmd == "return-dist" || cmd == "continuum" || cmd == "simulate") {
    require_exponent(c.a);
    require_size(c.L);
    detail::require(horizon(c, c.L) >= 1, kModule, "horizon must be >= 1");
  }
  if (cmd == "continuum" || (cmd == "return-dist" && c.with_continuum)) {
    detail::require(c.terms >= 1, kModule, "terms must be >= 1");
  }
  if (cmd == "simulate") {
    detail::require(c.walkers >= 1, kModule, "walkers must be >= 1");
  }
  if (cmd == "table1") {
    require_exponent(c.a);
    require_increasing(or_default(c.L_list, c.L));
    for (double h : or_default(c.horizon_list, c.horizon_mult)) {
      detail::require(std::isfinite(h) && h > 0.0, kModule, "horizon-list entries must be positive");
    }
    detail::require(c.s_max == 0, kModule, "table1 uses the horizon rule; s-max must be 0");
  }
  if (cmd == "delta-scan") {
    for (double a : or_default(c.a_list, c.a)) require_exponent(a);
    require_increasing(or_default(c.L_list, c.L));
    detail::require(c.s_max == 0, kModule, "delta-scan uses the horizon rule; s-max must be 0");
    if (c.q) detail::require(*c.q > 1.0 && *c.q < 2.0, kModule, "q must satisfy 1 < q < 2");
  }
  if (cmd == "mean-return") {
    for (double a : or_default(c.a_list, c.a)) require_exponent(a);
    require_increasing(or_default(c.L_list, c.L));
  }
}

std::string render_csv(const Table& table, const RunConfig& config) {
  std::string out;
  out += std::string("# ") + kToolName + " " + kToolVersion + "\n";
  out += "# schema: " + table.schema + "\n";
  for (const auto& [key, value] : echoed_entries(config)) {
    out += "# config: " + key + "=" + value + "\n";
  }
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (i) out += ',';
    out += table.columns[i];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += cell_text(row[i]);
    }
    out += '\n';
  }
  for (const auto& [key, value] : table.footer) out += "# " + key + "=" + cell_text(value) + "\n";
  return out;
}

std::string render_json(const Table& table, const RunConfig& config) {
  nlohmann::ordered_json doc;
  doc["tool"] = std::string(kToolName) + " " + kToolVersion;
  doc["schema"] = table.schema;
  nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
  for (const auto& [key, value] : echoed_entries(config)) cfg[key] = value;
  doc["config"] = cfg;
  doc["columns"] = table.columns;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : table.rows) {
    nlohmann::ordered_json r = nlohmann::ordered_json::array();
    for (const auto& cell : row) r.push_back(cell_json(cell));
    rows.push_back(std::move(r));
  }
  doc["rows"] = std::move(rows);
  nlohmann::ordered_json footer = nlohmann::ordered_json::object();
  for (const auto& [key, value] : table.footer) footer[key] = cell_json(value);
  doc["footer"] = footer;
  return doc.dump(1) + "\n";
}

std::string render(const Table& table, const RunConfig& config) {
  return config.format == Format::json ? render_json(table, config) : render_csv(table, config);
}

Table cmd_return_dist(const RunConfig& c) {
  const long s_max = horizon(c, c.L);
  const chain::ReturnSeries series = chain::return_distribution(chain::WalkSpec(c.a, c.L), s_max);
  std::vector<double> continuum_series;
  if (c.with_continuum) {
    continuum_series = continuum::ContinuumModel(c.a, c.L, c.terms).return_series(s_max);
  }

  Table t;
  t.schema = "return-dist/1";
  t.columns = {"s", "p_r_discrete"};
  if (c.with_continuum) t.columns.push_back("p_r_continuum");
  for (long s : grid_steps(c, s_max)) {
    std::vector<Cell> row{s, series(s)};
    if (c.with_continuum) row.emplace_back(continuum_series[static_cast<std::size_t>(s)]);
    t.rows.push_back(std::move(row));
  }
  t.footer = {{"s_max", s_max}, {"captured_mass", series.captured_mass}};
  return t;
}

Table cmd_continuum(const RunConfig& c) {
  const long s_max = horizon(c, c.L);
  const continuum::ContinuumModel model(c.a, c.L, c.terms);
  const double dt = 1.0 / static_cast<double>(c.L);

  Table t;
  t.schema = "continuum/1";
  t.columns = {"s", "t", "return_density", "p_r_continuum", "truncation_bound"};
  for (long s : grid_steps(c, s_max)) {
    const double time = static_cast<double>(s) * dt;
    const continuum::SeriesValue v = model.evaluate_return_density(time);
    t.rows.push_back({s, time, v.value, v.value * dt, v.truncation_bound});
  }
  t.footer = {{"nu", model.order()}, {"terms", static_cast<long>(model.terms())}};
  return t;
}

Table cmd_table1(const RunConfig& c) {
  std::vector<double> multipliers = or_default(c.horizon_list, c.horizon_mult);
  std::sort(multipliers.begin(), multipliers.end());

  Table t;
  t.schema = "table1/1";
  t.columns = {"L", "horizon_mult", "s_max", "captured_mass"};
  for (long size : or_default(c.L_list, c.L)) {
    const double l2 = static_cast<double>(size) * static_cast<double>(size);
    const long longest = std::max<long>(1, std::lround(multipliers.back() * l2));
    const chain::ReturnSeries series =
        chain::return_distribution(chain::WalkSpec(c.a, size), longest);
    // Shorter horizons are prefixes of the longest run.
    long s = 0;
    double mass = 0.0;
    for (double m : multipliers) {
      const long s_max = std::max<long>(1, std::lround(m * l2));
      for (; s < s_max; ++s) mass += series.p[static_cast<std::size_t>(s + 1)];
      t.rows.push_back({size, m, s_max, mass});
    }
  }
  return t;
}

Table cmd_delta_scan(const RunConfig& c) {
  qstats::ScanOptions options;
  options.fixed_q = c.q;
  options.threads = c.threads;
  const std::vector<long> sizes = or_default(c.L_list, c.L);

  Table t;
  t.schema = "delta-scan/1";
  t.columns = {"a", "L", "s_max", "q", "q_stderr", "beta", "delta", "captured_mass", "status"};
  for (double a : or_default(c.a_list, c.a)) {
    for (const auto& row : qstats::delta_scan(a, sizes, c.horizon_mult, options)) {
      t.rows.push_back({row.a, row.size, row.s_max, row.q, row.q_stderr, row.beta, row.delta,
                        row.captured_mass, row.ok ? std::string("ok") : one_line(row.error)});
    }
  }
  return t;
}

Table cmd_mean_return(const RunConfig& c) {
  Table t;
  t.schema = "mean-return/1";
  t.columns = {"a", "L", "t1", "t1_over_L", "t1_over_L_lnL", "log2_ratio"};
  for (double a : or_default(c.a_list, c.a)) {
    long previous_size = 0;
    double previous_t1 = 0.0;
    for (long size : or_default(c.L_list, c.L)) {
      const double t1 = chain::mean_return_exact(chain::WalkSpec(a, size)).first_return();
      const double l = static_cast<double>(size);
      const double ratio = previous_size * 2 == size ? std::log2(t1 / previous_t1)
                                                     : std::numeric_limits<double>::quiet_NaN();
      t.rows.push_back({a, size, t1, t1 / l, t1 / (l * std::log(l)), ratio});
      previous_size = size;
      previous_t1 = t1;
    }
  }
  return t;
}

Table cmd_simulate(const RunConfig& c) {
  const long s_max = horizon(c, c.L);
  const chain::WalkSpec spec(c.a, c.L);
  const chain::ReturnSeries mc = chain::simulate_walkers(spec, c.walkers, s_max, c.seed, c.threads);
  const chain::ReturnSeries exact = chain::return_distribution(spec, s_max);

  Table t;
  t.schema = "simulate/1";
  t.columns = {"s", "p_r_mc", "p_r_exact"};
  for (long s : grid_steps(c, s_max)) t.rows.push_back({s, mc(s), exact(s)});
  t.footer = {{"s_max", s_max},
              {"walkers", c.walkers},
              {"captured_mass_mc", mc.captured_mass},
              {"captured_mass_exact", exact.captured_mass}};
  return t;
}

Table run(const RunConfig& config) {
  validate(config);
  const std::string& cmd = config.command;
  if (cmd == "return-dist") return cmd_return_dist(config);
  if (cmd == "continuum") return cmd_continuum(config);
  if (cmd == "table1") return cmd_table1(config);
  if (cmd == "delta-scan") return cmd_delta_scan(config);
  if (cmd == "mean-return") return cmd_mean_return(config);
  return cmd_simulate(config);
}

}  // namespace rrw::experiments
