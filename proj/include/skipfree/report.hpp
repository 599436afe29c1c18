#pragma once

#include <optional>
#include <string>
#include <vector>

#include "skipfree/json_io.hpp"

namespace skipfree {

struct Query {
  std::string kind;  // hit | two_sided | exit_interval | passage_up | resolvent | transient_gf
  long long x = 0, y = 0, a = 0, b = 0;
  double t = 0.0, s = 0.0;
};

struct OutputSpec {
  std::string format = "csv";  // csv | json
  std::string path = "-";      // "-" = stdout
};

struct RunConfig {
  std::string model;  // chain | cpp | mbi
  json params;
  std::vector<Query> queries;
  std::optional<SimConfig> sim;
  OutputSpec output;
};

struct ReportRow {
  std::string kind;
  std::string args;
  std::string closed_form;
  double closed_value = 0.0;
  std::optional<double> oracle;
  std::optional<Estimate> mc;
  std::optional<double> abs_diff;
  bool pass = true;
};

struct Report {
  std::vector<ReportRow> rows;

  bool all_pass() const {
    for (const auto& r : rows)
      if (!r.pass) return false;
    return true;
  }
};

RunConfig run_config_from_json(const json& j);

std::string report_to_csv(const Report& report);
json report_to_json(const Report& report, bool with_timestamp = true);

}  // namespace skipfree
