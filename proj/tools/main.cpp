#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "rrw/error.hpp"
#include "rrw/experiments.hpp"

namespace {

namespace ex = rrw::experiments;

struct Help {
  const char* key;
  const char* text;
};

constexpr Help kOptions[] = {
    {"a", "walk exponent, 0 <= a < 2"},
    {"a-list", "comma-separated exponents (delta-scan, mean-return)"},
    {"L", "system size"},
    {"L-list", "comma-separated increasing sizes"},
    {"horizon-mult", "horizon multiplier c, s_max = c L^2"},
    {"horizon-list", "comma-separated horizon multipliers (table1)"},
    {"s-max", "explicit horizon; 0 selects the horizon rule"},
    {"terms", "Fourier-Bessel terms N"},
    {"seed", "Monte Carlo seed"},
    {"walkers", "Monte Carlo walkers"},
    {"threads", "worker threads; results do not depend on it"},
    {"q", "impose q instead of estimating it (delta-scan)"},
    {"grid", "output steps: all or log"},
    {"points-per-decade", "density of the log grid"},
    {"out", "output file (default stdout)"},
    {"format", "csv or json"},
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw rrw::ContractError("experiments", "cannot open config file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Restricted random walk first-return experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(ex::kToolName) + " " + ex::kToolVersion);

  struct Command {
    CLI::App* app = nullptr;
    std::map<std::string, std::string> values;
    std::map<std::string, CLI::Option*> options;
    bool with_continuum = false;
    CLI::Option* with_continuum_opt = nullptr;
    std::string config_path;
    bool dump_config = false;
  };
  std::map<std::string, Command> commands;

  const std::map<std::string, std::string> descriptions = {
      {"return-dist", "exact first-return distribution from the Master Equation"},
      {"continuum", "analytic Fourier-Bessel return density"},
      {"table1", "captured probability mass against horizon"},
      {"delta-scan", "q-exponential fit quality Delta across system sizes"},
      {"mean-return", "exact mean first-return time and its scaling"},
      {"simulate", "seeded Monte Carlo return histogram"},
  };
  for (const std::string& name : ex::commands()) {
    Command& cmd = commands[name];
    cmd.app = app.add_subcommand(name, descriptions.at(name));
    for (const Help& h : kOptions) {
      cmd.options[h.key] = cmd.app->add_option(std::string("--") + h.key, cmd.values[h.key], h.text);
    }
    cmd.with_continuum_opt =
        cmd.app->add_flag("--with-continuum", cmd.with_continuum, "add the analytic column");
    cmd.app->add_option("--config", cmd.config_path, "flat key=value file; flags override it");
    cmd.app->add_flag("--dump-config", cmd.dump_config, "print the effective config and exit");
  }

  CLI11_PARSE(app, argc, argv);

  try {
    for (auto& [name, cmd] : commands) {
      if (!cmd.app->parsed()) continue;
      ex::RunConfig config;
      if (!cmd.config_path.empty()) config = ex::config_from_text(read_file(cmd.config_path));
      config.command = name;
      for (const auto& [key, option] : cmd.options) {
        if (option->count() > 0) ex::set_config_value(config, key, cmd.values[key]);
      }
      if (cmd.with_continuum_opt->count() > 0) config.with_continuum = cmd.with_continuum;

      if (cmd.dump_config) {
        std::cout << ex::config_to_text(config);
        return 0;
      }

      const auto start = std::chrono::steady_clock::now();
      const ex::Table table = ex::run(config);
      const std::string text = ex::render(table, config);
      const double seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

      if (config.out.empty()) {
        std::cout << text;
      } else {
        std::ofstream out(config.out, std::ios::binary);
        if (!out) throw rrw::ContractError("experiments", "cannot write '" + config.out + "'");
        out << text;
      }
      std::fprintf(stderr, "%s: runtime %.3f s\n", name.c_str(), seconds);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
