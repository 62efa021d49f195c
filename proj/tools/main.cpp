// entroflow — run, validate, and plot density-flow scenarios.

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "entroflow/config.hpp"
#include "entroflow/csv.hpp"
#include "entroflow/errors.hpp"
#include "entroflow/scenario.hpp"
#include "entroflow/svg.hpp"

namespace {

std::string strip(const std::string& s) {
  const auto a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

std::map<std::string, std::string> load_kv(
    const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw entroflow::ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  auto kv = entroflow::parse_config_text(ss.str());
  for (const auto& ov : overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos)
      throw entroflow::ConfigError("override must look like key=value: " +
                                   ov);
    const std::string key = strip(ov.substr(0, eq));
    const std::string value = strip(ov.substr(eq + 1));
    if (key.empty() || value.empty())
      throw entroflow::ConfigError("override must look like key=value: " +
                                   ov);
    kv[key] = value;
  }
  return kv;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"density-flow scenario runner"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::vector<std::string> overrides;

  CLI::App* run = app.add_subcommand("run", "execute a scenario config");
  run->add_option("config", config_path, "config file (key = value lines)")
      ->required();
  run->add_option("--out", out_dir, "output directory (sets output.dir)");
  run->add_option("--override", overrides,
                  "key=value pairs that replace config entries");

  CLI::App* validate = app.add_subcommand(
      "validate", "parse a config and print the effective settings");
  validate->add_option("config", config_path, "config file")->required();
  validate->add_option("--override", overrides,
                       "key=value pairs that replace config entries");

  std::string csv_path, x_col, svg_out = "plot.svg", title;
  std::vector<std::string> y_cols;
  CLI::App* plot =
      app.add_subcommand("plot", "render columns of a CSV file to SVG");
  plot->add_option("csv", csv_path, "CSV file with a header row")->required();
  plot->add_option("--x", x_col, "column for the horizontal axis")
      ->required();
  plot->add_option("--y", y_cols, "columns to draw (one series each)")
      ->required();
  plot->add_option("-o,--out", svg_out, "output SVG path");
  plot->add_option("--title", title, "plot title");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*run) {
      auto kv = load_kv(config_path, overrides);
      if (!out_dir.empty()) kv["output.dir"] = out_dir;
      const entroflow::ScenarioConfig cfg = entroflow::load_scenario(kv);
      entroflow::run_scenario(cfg);
      std::cout << "wrote " << cfg.out_dir << "\n";
    } else if (*validate) {
      const entroflow::ScenarioConfig cfg =
          entroflow::load_scenario(load_kv(config_path, overrides));
      for (const auto& [k, v] : cfg.effective)
        std::cout << k << " = " << v << "\n";
    } else if (*plot) {
      const entroflow::CsvTable t = entroflow::read_csv(csv_path);
      const int xc = t.column(x_col);
      if (xc < 0)
        throw entroflow::ConfigError("no column named " + x_col + " in " +
                                     csv_path);
      std::vector<entroflow::PlotSeries> series;
      std::string y_label;
      for (const auto& name : y_cols) {
        const int yc = t.column(name);
        if (yc < 0)
          throw entroflow::ConfigError("no column named " + name + " in " +
                                       csv_path);
        entroflow::PlotSeries s;
        s.name = name;
        for (const auto& row : t.rows) {
          s.x.push_back(row[xc]);
          s.y.push_back(row[yc]);
        }
        series.push_back(std::move(s));
        y_label += (y_label.empty() ? "" : ", ") + name;
      }
      entroflow::write_svg_plot(svg_out, title.empty() ? csv_path : title,
                                x_col, y_label, series);
      std::cout << "wrote " << svg_out << "\n";
    }
  } catch (const entroflow::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const entroflow::InvariantViolation& e) {
    std::cerr << "invariant violated: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
