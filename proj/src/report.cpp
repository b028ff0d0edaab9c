#include "kcurv/report.hpp"

#include <cmath>
#include <sstream>
#include <utility>

#include "json.hpp"
#include "kcurv/errors.hpp"

namespace kcurv {

namespace {

using njson = nlohmann::ordered_json;

// shortest round-trip representation; locale-independent, so renders are
// reproducible byte for byte
std::string num(double v) { return njson(v).dump(); }

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    out += c;
    if (c == '"') out += '"';
  }
  out += '"';
  return out;
}

njson config_json(const RunConfig& c) {
  njson j;
  j["command"] = c.command;
  j["n"] = c.n;
  j["k"] = c.k;
  j["levi_scale"] = c.levi_scale;
  j["frame_sign"] = c.frame_sign;
  j["grid_level"] = c.grid_level;
  j["field"] = c.field;
  j["catalog"] = c.catalog;
  j["direction"] = c.direction;
  j["lambda"] = c.lambda;
  j["seed"] = c.seed;
  j["samples"] = c.samples;
  j["tol"] = c.tol;
  j["format"] = c.format;
  j["workers"] = c.workers;
  j["strict"] = c.strict;
  j["allow_large_n"] = c.allow_large_n;
  j["matrix"] = c.matrix;
  j["matrix_file"] = c.matrix_file;
  return j;
}

}  // namespace

CheckRow make_check(std::string name, double value, double target,
                    double tolerance, std::string note) {
  CheckRow row;
  row.name = std::move(name);
  row.value = value;
  row.target = target;
  row.tolerance = tolerance;
  // NaN anywhere fails the comparison, hence the row
  row.pass = std::abs(value - target) <= tolerance;
  row.note = std::move(note);
  return row;
}

bool RunReport::all_pass() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

std::string RunReport::to_json() const {
  njson j;
  j["schema_version"] = schema_version;
  j["command"] = config.command;
  j["config"] = config_json(config);
  njson rows = njson::array();
  for (const auto& c : checks) {
    njson r;
    r["name"] = c.name;
    r["value"] = c.value;
    r["target"] = c.target;
    r["tolerance"] = c.tolerance;
    r["pass"] = c.pass;
    r["note"] = c.note;
    rows.push_back(std::move(r));
  }
  j["checks"] = std::move(rows);
  njson inf = njson::array();
  for (const auto& i : info) {
    njson r;
    r["name"] = i.name;
    r["value"] = i.value;
    r["note"] = i.note;
    inf.push_back(std::move(r));
  }
  j["info"] = std::move(inf);
  if (!table_columns.empty()) {
    njson t;
    t["columns"] = table_columns;
    t["rows"] = table_rows;
    j["table"] = std::move(t);
  }
  j["summary"] = summary;
  j["all_pass"] = all_pass();
  j["wall_time_ms"] = wall_time_ms;
  return j.dump(2) + "\n";
}

std::string RunReport::to_csv() const {
  std::ostringstream os;
  const njson cfg = config_json(config);
  os << "# schema_version " << schema_version << "\n";
  for (const auto& [key, val] : cfg.items())
    os << "# " << key << " " << (val.is_string() ? val.get<std::string>()
                                                 : val.dump())
       << "\n";
  os << "# summary " << summary << "\n";
  os << "# all_pass " << (all_pass() ? "true" : "false") << "\n";
  os << "# wall_time_ms " << num(wall_time_ms) << "\n";
  os << "section,name,value,target,tolerance,pass,note\n";
  for (const auto& c : checks)
    os << "check," << csv_escape(c.name) << "," << num(c.value) << ","
       << num(c.target) << "," << num(c.tolerance) << "," << (c.pass ? 1 : 0)
       << "," << csv_escape(c.note) << "\n";
  for (const auto& i : info)
    os << "info," << csv_escape(i.name) << "," << num(i.value) << ",,,,"
       << csv_escape(i.note) << "\n";
  if (!table_columns.empty()) {
    os << "\n";
    for (std::size_t c = 0; c < table_columns.size(); ++c)
      os << (c ? "," : "") << csv_escape(table_columns[c]);
    os << "\n";
    for (const auto& row : table_rows) {
      for (std::size_t c = 0; c < row.size(); ++c)
        os << (c ? "," : "") << num(row[c]);
      os << "\n";
    }
  }
  return os.str();
}

std::string RunReport::render(const std::string& format) const {
  if (format == "json") return to_json();
  if (format == "csv") return to_csv();
  throw validation_error("format must be json or csv; got '" + format + "'");
}

}  // namespace kcurv
