#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "berwald/cli.hpp"

namespace bc = berwald::cli;

namespace {

struct Common {
  std::string config;
  std::string out;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol_scale;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "flat key = value config file");
  sub->add_option("--out", c.out, "write the JSON report here instead of stdout");
  sub->add_option("--seed", c.seed, "random seed (overrides the config)");
  sub->add_option("--tol-scale", c.tol_scale, "multiply every check tolerance");
  sub->add_option("--set", c.sets, "override a config key, key=value (repeatable)");
}

bool write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) return false;
  f << text;
  return static_cast<bool>(f);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generalized Berwald spacetime toolkit"};
  app.require_subcommand(1);
  Common common;
  const std::vector<std::string> names = {"verify", "geodesic", "curvature", "cones", "lambda-series"};
  const std::vector<std::string> help = {"regularity, Berwald, Einstein-tensor and flatness checks",
                                         "integrate an autoparallel and export CSV", "curvature tensors at events",
                                         "null cone coincidence sampling", "expansion of Lambda / (1 + phi)"};
  for (std::size_t i = 0; i < names.size(); ++i) add_common(app.add_subcommand(names[i], help[i]), common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : bc::kExitConfigError;
  }
  std::string command = app.get_subcommands().front()->get_name();

  bc::Outcome outcome;
  try {
    bc::RunConfig cfg = common.config.empty() ? bc::RunConfig{} : bc::RunConfig::load(common.config);
    for (const auto& s : common.sets) cfg.set_override(s);
    if (common.seed) cfg.set("seed", std::to_string(*common.seed), "--seed");
    if (common.tol_scale) cfg.set("tol_scale", bc::format_double(*common.tol_scale), "--tol-scale");
    outcome = bc::run(command, cfg);
    if (!outcome.csv.empty()) {
      std::string csv_path = cfg.get("geodesic.csv");
      if (csv_path.empty() && !common.out.empty()) csv_path = common.out + ".csv";
      if (csv_path.empty()) csv_path = "trajectory.csv";
      if (!write_file(csv_path, outcome.csv)) {
        std::cerr << "berwald: cannot write " << csv_path << "\n";
        return bc::kExitConfigError;
      }
    }
  } catch (const berwald::ParseError& e) {
    std::cerr << "berwald: phi does not parse: " << e.what() << "\n";
    return bc::kExitConfigError;
  } catch (const berwald::Error& e) {
    std::cerr << "berwald: " << e.what() << "\n";
    return bc::kExitConfigError;
  }

  std::string text = bc::dump(outcome.report);
  if (common.out.empty()) {
    std::cout << text;
  } else if (!write_file(common.out, text)) {
    std::cerr << "berwald: cannot write " << common.out << "\n";
    return bc::kExitConfigError;
  }
  return outcome.exit_code;
}
