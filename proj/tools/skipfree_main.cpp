#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "skipfree/engine.hpp"

namespace {

using namespace skipfree;

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("JSON parse error in ") + path + ": " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  if (path == "-" || path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << text;
}

void emit_report(const Report& report, const OutputSpec& spec) {
  if (spec.format == "json")
    write_text(spec.path, report_to_json(report).dump(2) + "\n");
  else
    write_text(spec.path, report_to_csv(report));
}

ScalarMode parse_mode(const std::string& mode) {
  if (mode == "float") return ScalarMode::Float;
  if (mode == "rational") return ScalarMode::Rational;
  throw ConfigError("--mode: expected float | rational");
}

int cmd_run(const std::string& config_path, const std::string& mode, double tol,
            std::optional<std::uint64_t> seed, const std::string& output,
            const std::string& format) {
  const RunConfig cfg = run_config_from_json(load_json(config_path));
  RunOptions opts;
  opts.mode = parse_mode(mode);
  opts.tol = tol;
  opts.seed_override = seed;
  const Report report = run_config(cfg, opts);
  OutputSpec spec = cfg.output;
  if (!output.empty()) spec.path = output;
  if (!format.empty()) spec.format = format;
  emit_report(report, spec);
  return report.all_pass() ? 0 : 1;
}

int cmd_validate(const std::string& panel_path, const std::string& mode, double tol,
                 std::optional<std::uint64_t> seed, const std::string& output,
                 const std::string& format) {
  PanelSpec spec = panel_from_json(load_json(panel_path));
  if (seed) spec.seed = *seed;
  RunOptions opts;
  opts.mode = parse_mode(mode);
  opts.tol = tol;
  const Report report = run_panel(spec, opts);
  OutputSpec out;
  out.path = output.empty() ? "-" : output;
  out.format = format.empty() ? "csv" : format;
  emit_report(report, out);
  std::size_t passed = 0;
  for (const auto& r : report.rows) passed += r.pass ? 1 : 0;
  std::cerr << "panel: " << passed << "/" << report.rows.size() << " checks passed\n";
  return report.all_pass() ? 0 : 1;
}

int cmd_simulate(const std::string& config_path, std::optional<std::uint64_t> seed,
                 const std::string& output) {
  const RunConfig cfg = run_config_from_json(load_json(config_path));
  if (!cfg.sim) throw ConfigError("simulate: config needs a \"sim\" block");
  RunOptions opts;
  opts.seed_override = seed;
  const Report report = run_config(cfg, opts);
  json records = json::array();
  for (const auto& r : report.rows) {
    json record{{"query_kind", r.kind}, {"args", r.args}, {"closed_form", r.closed_value}};
    if (r.mc) record["estimate"] = estimate_to_json(*r.mc);
    records.push_back(std::move(record));
  }
  write_text(output.empty() ? cfg.output.path : output, records.dump(2) + "\n");
  return report.all_pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact fluctuation identities for skip-free downward Markov chains"};
  app.require_subcommand(1);

  std::string config_path, panel_path, mode = "float", output, format;
  double tol = 1e-9;
  std::optional<std::uint64_t> seed;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--mode", mode, "scalar mode: float | rational")->capture_default_str();
    cmd->add_option("--tol", tol, "oracle comparison tolerance")->capture_default_str();
    cmd->add_option("--seed", seed, "override the Monte Carlo seed");
    cmd->add_option("--output", output, "output path ('-' = stdout)");
    cmd->add_option("--format", format, "output format: csv | json");
  };

  auto* run = app.add_subcommand("run", "evaluate the queries of a model config");
  run->add_option("--config", config_path, "RunConfig JSON file")->required();
  add_common(run);

  auto* validate = app.add_subcommand("validate", "run the randomized regression panel");
  validate->add_option("--panel", panel_path, "panel spec JSON file")->required();
  add_common(validate);

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo estimates for the queries");
  simulate->add_option("--config", config_path, "RunConfig JSON file (sim block required)")
      ->required();
  simulate->add_option("--seed", seed, "override the Monte Carlo seed");
  simulate->add_option("--output", output, "output path ('-' = stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (run->parsed()) return cmd_run(config_path, mode, tol, seed, output, format);
    if (validate->parsed()) return cmd_validate(panel_path, mode, tol, seed, output, format);
    return cmd_simulate(config_path, seed, output);
  } catch (const skipfree::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const skipfree::Error& e) {
    std::cerr << "model error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
