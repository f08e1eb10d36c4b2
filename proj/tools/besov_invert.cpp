#include <iostream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "besov_invert/besov_invert.hpp"

namespace bi = besov_invert;

int main(int argc, char** argv) {
  CLI::App app{"Bayesian inversion with Besov and Gaussian priors on periodic grids"};
  app.set_version_flag("--version", std::string("besov_invert ") + bi::version());
  app.allow_extras();

  std::string subcommand, config_path;
  std::vector<std::string> assignments;
  app.add_option("subcommand", subcommand, "sample-prior | forward | reconstruct | converge-study | stability-probe | "
                                           "appendix-example | deblur-demo");
  app.add_option("-c,--config", config_path, "key=value config file");
  app.add_option("--set", assignments, "key=value override (repeatable)");

  std::map<std::string, std::string> flag_values;
  for (const auto& f : bi::config_schema()) {
    if (f.name == "subcommand") continue;
    app.add_option("--" + f.name, flag_values[f.name], f.type);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : bi::kExitConfig;
  }

  try {
    std::vector<std::pair<std::string, std::string>> overrides;
    for (const auto& extra : app.remaining()) {
      std::string key = extra;
      if (key.rfind("--", 0) == 0) key = key.substr(2);
      const auto eq = key.find('=');
      if (eq == std::string::npos) {
        const std::string hint = bi::suggest_key(key);
        throw bi::ConfigError("unknown argument '" + extra + "'" +
                              (hint.empty() ? "" : " (did you mean '--" + hint + "'?)"));
      }
      overrides.emplace_back(key.substr(0, eq), key.substr(eq + 1));
    }
    for (const auto& a : assignments) {
      const auto eq = a.find('=');
      if (eq == std::string::npos) throw bi::ConfigError("--set expects key=value, got '" + a + "'");
      overrides.emplace_back(a.substr(0, eq), a.substr(eq + 1));
    }
    for (const auto& f : bi::config_schema()) {
      if (f.name != "subcommand" && app.count("--" + f.name) > 0) overrides.emplace_back(f.name, flag_values[f.name]);
    }
    if (!subcommand.empty()) overrides.emplace_back("subcommand", subcommand);

    const bi::RunConfig cfg = config_path.empty() ? bi::parse_config(bi::io::KeyValue{}, overrides)
                                                  : bi::parse_config(config_path, overrides);
    return bi::dispatch(cfg, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "besov_invert: " << e.what() << '\n';
    return bi::exit_code_for(e);
  }
}
