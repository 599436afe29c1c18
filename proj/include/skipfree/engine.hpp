#pragma once

#include "skipfree/report.hpp"

namespace skipfree {

enum class ScalarMode { Float, Rational };

struct RunOptions {
  ScalarMode mode = ScalarMode::Float;
  double tol = 1e-9;  // closed form vs oracle tolerance for PASS
  std::optional<std::uint64_t> seed_override;
};

// Evaluates every query of the config against the requested model: closed
// form, an exact independent oracle where one exists, and a Monte Carlo
// estimate when a sim block is present.
Report run_config(const RunConfig& cfg, const RunOptions& opts = {});

struct PanelFamily {
  std::string model;  // chain | cpp | mbi
  int count = 10;
  int states = 8;  // chain size
};

struct PanelSpec {
  std::uint64_t seed = 20240901;
  std::vector<PanelFamily> families;
  std::optional<SimConfig> mc;
};

PanelSpec panel_from_json(const json& j);

// Randomized regression panel: identity residuals and oracle comparisons on
// random instances, plus Monte Carlo rows when mc is configured.
Report run_panel(const PanelSpec& spec, const RunOptions& opts = {});

}  // namespace skipfree
