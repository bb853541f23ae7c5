// SPDX-License-Identifier: Apache-2.0
// Command-line front end for the experiment runner.

#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "entconc/cli.hpp"

namespace {

struct Flags {
  std::string K, n, reps, seed, workers, delta, base, gen, out, format, p, groups, c_be, curves;
  std::vector<std::string> eps, lambda;
  std::string config;
};

void add_flags(CLI::App& sub, Flags& f) {
  sub.add_option("--K", f.K, "alphabet size (exponent: comma-separated list)");
  sub.add_option("--n", f.n, "number of variables or block length (exponent: list)");
  sub.add_option("--eps", f.eps, "tail threshold; repeatable")->delimiter(',');
  sub.add_option("--reps", f.reps, "Monte Carlo replicates");
  sub.add_option("--seed", f.seed, "64-bit seed");
  sub.add_option("--workers", f.workers, "worker threads");
  sub.add_option("--delta", f.delta, "essential bit content tolerance");
  sub.add_option("--base", f.base, "nat or bit");
  sub.add_option("--gen", f.gen, "uniform, counterexample, random or boundary");
  sub.add_option("--out", f.out, "output path; stdout when omitted");
  sub.add_option("--format", f.format, "csv or json");
  sub.add_option("--p", f.p, "comma-separated source distribution");
  sub.add_option("--lambda", f.lambda, "MGF argument; repeatable")->delimiter(',');
  sub.add_option("--groups", f.groups, "number of groups for the misspecified model");
  sub.add_option("--c-be", f.c_be, "Berry-Esseen constant");
  sub.add_option("--curves", f.curves, "write long-format plot data to this path");
  sub.add_option("--config", f.config, "flat key=value file; flags override its entries");
}

std::string join(const std::vector<std::string>& items) {
  std::string s;
  for (const auto& i : items) s += (s.empty() ? "" : ",") + i;
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Concentration bounds for discrete-entropy log-likelihoods"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(entconc::kVersion));
  Flags flags;
  const std::map<std::string_view, std::string> about = {
      {"bounds", "evaluate every tail bound at (K, n, eps)"},
      {"mc-tail", "Monte Carlo tail frequencies against the bounds"},
      {"mgf-verify", "check the uniform MGF bound on sampled distributions"},
      {"oracle", "numerical maxima of the variance and F objectives"},
      {"counterexample", "exact tail of the two-level counterexample"},
      {"misspecified", "grouped misspecified model: tails and MGF chain"},
      {"coding", "typical sets, essential bit content and the block code"},
      {"exponent", "error exponent and classical vs new coding bounds"},
  };
  for (auto name : entconc::command_names()) {
    add_flags(*app.add_subcommand(std::string(name), about.at(name)), flags);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return entconc::kExitConfig;
  }

  try {
    std::map<std::string, std::string> values;
    if (!flags.config.empty()) {
      std::ifstream in(flags.config);
      if (!in) throw entconc::ConfigError("cannot read config file '" + flags.config + "'");
      values = entconc::parse_config_text(in);
    }
    const std::string command = app.get_subcommands().front()->get_name();
    if (auto it = values.find("command"); it != values.end() && it->second != command) {
      throw entconc::ConfigError("config file is for '" + it->second + "', not '" + command + "'");
    }
    values["command"] = command;
    const std::pair<const char*, std::string> given[] = {
        {"K", flags.K},         {"n", flags.n},           {"reps", flags.reps},
        {"seed", flags.seed},   {"workers", flags.workers}, {"delta", flags.delta},
        {"base", flags.base},   {"gen", flags.gen},       {"out", flags.out},
        {"format", flags.format}, {"p", flags.p},         {"groups", flags.groups},
        {"c_be", flags.c_be},   {"curves", flags.curves}, {"eps", join(flags.eps)},
        {"lambda", join(flags.lambda)}};
    for (const auto& [key, value] : given) {
      if (!value.empty()) values[key] = value;
    }
    return entconc::run(entconc::make_run_config(values), std::cout, std::cerr);
  } catch (const entconc::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return entconc::kExitConfig;
  }
}
