#pragma once

// Result tables: rows of named scalars plus string tags, rendered as CSV
// (17 significant digits, '.' decimal, no locale) with a JSON mirror of
// the same content.  Fixed config and seed give byte-identical bodies
// once the runtime columns are stripped.

#include <map>
#include <string>
#include <vector>

namespace fracorn {

struct ReportRow {
  std::string label;
  std::map<std::string, double> values;
  std::map<std::string, std::string> tags;
};

class Report {
 public:
  ReportRow& add(std::string label);

  const std::vector<ReportRow>& rows() const { return rows_; }
  bool empty() const { return rows_.empty(); }

  // Columns: 'row', then the union of value keys, then the union of tag
  // keys, each group alphabetical.  include_runtime=false drops every
  // column whose name ends in '_ms' (the determinism comparison form).
  std::string to_csv(bool include_runtime = true) const;
  std::string to_json() const;

  // CSV at the given path plus a JSON mirror with the extension swapped;
  // a path already ending in .json gets the JSON form only.
  void write(const std::string& path) const;

 private:
  std::vector<ReportRow> rows_;
};

// printf %.17g, the report-wide number rendering.
std::string format_g17(double v);

}  // namespace fracorn
