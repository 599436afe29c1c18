#include "skipfree/report.hpp"

#include <chrono>
#include <sstream>

namespace skipfree {

namespace {

Query query_from_json(const json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("kind"))
    throw ConfigError(where + ": expected {\"kind\": ..., \"args\": {...}}");
  Query q;
  q.kind = j["kind"].get<std::string>();
  static const std::vector<std::string> kinds = {"hit",        "two_sided",    "exit_interval",
                                                 "passage_up", "resolvent",    "transient_gf"};
  if (std::find(kinds.begin(), kinds.end(), q.kind) == kinds.end())
    throw ConfigError(where + ".kind: unknown query kind '" + q.kind + "'");
  const json args = j.value("args", json::object());
  q.x = args.value("x", 0LL);
  q.y = args.value("y", 0LL);
  q.a = args.value("a", 0LL);
  q.b = args.value("b", 0LL);
  q.t = args.value("t", 0.0);
  q.s = args.value("s", 0.0);
  return q;
}

}  // namespace

RunConfig run_config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  RunConfig cfg;
  if (!j.contains("model")) throw ConfigError("config: missing field 'model'");
  cfg.model = j["model"].get<std::string>();
  if (cfg.model != "chain" && cfg.model != "cpp" && cfg.model != "mbi")
    throw ConfigError("config.model: expected chain | cpp | mbi, got '" + cfg.model + "'");
  if (!j.contains("params")) throw ConfigError("config: missing field 'params'");
  cfg.params = j["params"];
  const json queries = j.value("queries", json::array());
  if (!queries.is_array()) throw ConfigError("config.queries: expected an array");
  for (size_t i = 0; i < queries.size(); ++i)
    cfg.queries.push_back(query_from_json(queries[i], "config.queries[" + std::to_string(i) + "]"));
  if (j.contains("sim")) cfg.sim = sim_config_from_json(j["sim"], "config.sim");
  if (j.contains("output")) {
    cfg.output.format = j["output"].value("format", std::string("csv"));
    cfg.output.path = j["output"].value("path", std::string("-"));
    if (cfg.output.format != "csv" && cfg.output.format != "json")
      throw ConfigError("config.output.format: expected csv | json");
  }
  return cfg;
}

std::string report_to_csv(const Report& report) {
  std::ostringstream out;
  out << "query_kind,args,closed_form,oracle,mc_p_hat,mc_stderr,abs_diff,verdict\n";
  for (const auto& r : report.rows) {
    out << r.kind << ',' << r.args << ',' << r.closed_form << ',';
    if (r.oracle) out << format_scalar(*r.oracle);
    out << ',';
    if (r.mc) out << format_scalar(r.mc->p_hat);
    out << ',';
    if (r.mc) out << format_scalar(r.mc->std_err);
    out << ',';
    if (r.abs_diff) out << format_scalar(*r.abs_diff);
    out << ',' << (r.pass ? "PASS" : "FAIL") << '\n';
  }
  return out.str();
}

json report_to_json(const Report& report, bool with_timestamp) {
  json rows = json::array();
  for (const auto& r : report.rows) {
    json row{{"query_kind", r.kind}, {"args", r.args},
             {"closed_form", r.closed_form}, {"verdict", r.pass ? "PASS" : "FAIL"}};
    if (r.oracle) row["oracle"] = *r.oracle;
    if (r.mc) row["mc"] = estimate_to_json(*r.mc);
    if (r.abs_diff) row["abs_diff"] = *r.abs_diff;
    rows.push_back(std::move(row));
  }
  json out{{"rows", rows}, {"all_pass", report.all_pass()}};
  if (with_timestamp) {
    // metadata only; excluded from diffs by consumers
    const auto now = std::chrono::system_clock::now().time_since_epoch();
    out["meta"] = {{"generated_at_unix_ms",
                    std::chrono::duration_cast<std::chrono::milliseconds>(now).count()}};
  }
  return out;
}

}  // namespace skipfree
