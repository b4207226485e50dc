#include "fracorn/report.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "fracorn/core.hpp"

namespace fracorn {

namespace {

bool runtime_column(const std::string& key) {
  return key.size() > 3 && key.compare(key.size() - 3, 3, "_ms") == 0;
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

}  // namespace

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ReportRow& Report::add(std::string label) {
  rows_.push_back(ReportRow{std::move(label), {}, {}});
  return rows_.back();
}

std::string Report::to_csv(bool include_runtime) const {
  std::set<std::string> vkeys, tkeys;
  for (const auto& r : rows_) {
    for (const auto& [k, v] : r.values) {
      (void)v;
      if (include_runtime || !runtime_column(k)) vkeys.insert(k);
    }
    for (const auto& [k, v] : r.tags) {
      (void)v;
      tkeys.insert(k);
    }
  }
  std::ostringstream out;
  out << "row";
  for (const auto& k : vkeys) out << ',' << csv_quote(k);
  for (const auto& k : tkeys) out << ',' << csv_quote(k);
  out << '\n';
  for (const auto& r : rows_) {
    out << csv_quote(r.label);
    for (const auto& k : vkeys) {
      out << ',';
      auto it = r.values.find(k);
      if (it != r.values.end()) out << format_g17(it->second);
    }
    for (const auto& k : tkeys) {
      out << ',';
      auto it = r.tags.find(k);
      if (it != r.tags.end()) out << csv_quote(it->second);
    }
    out << '\n';
  }
  return out.str();
}

std::string Report::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows_) {
    nlohmann::json e;
    e["row"] = r.label;
    e["values"] = r.values;
    e["tags"] = r.tags;
    arr.push_back(e);
  }
  return arr.dump(2) + "\n";
}

void Report::write(const std::string& path) const {
  auto dump = [](const std::string& p, const std::string& body) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw ConfigError("cannot write report file '" + p + "'");
    out << body;
  };
  bool json_only = path.size() > 5 && path.compare(path.size() - 5, 5, ".json") == 0;
  if (json_only) {
    dump(path, to_json());
    return;
  }
  dump(path, to_csv());
  size_t dot = path.find_last_of("./");
  std::string mirror = (dot != std::string::npos && path[dot] == '.')
                           ? path.substr(0, dot) + ".json"
                           : path + ".json";
  dump(mirror, to_json());
}

}  // namespace fracorn
