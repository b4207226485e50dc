#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "fracorn/config.hpp"
#include "fracorn/core.hpp"

using namespace fracorn;
namespace fs = std::filesystem;

namespace {

fs::path work_dir() {
  static fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("fracorn_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string write_file(const std::string& name, const std::string& text) {
  fs::path p = work_dir() / name;
  std::ofstream out(p);
  out << text;
  return p.string();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  std::string cmd = std::string(FRACORN_CLI_PATH) + " " + args;
  int rc = std::system(cmd.c_str());
  REQUIRE(rc != -1);
  return WEXITSTATUS(rc);
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

// Drop every column whose header ends in _ms (the runtime columns).
std::string strip_runtime_columns(const std::string& csv) {
  auto lines = split(csv, '\n');
  if (lines.empty()) return csv;
  auto header = split(lines[0], ',');
  std::vector<size_t> keep;
  for (size_t i = 0; i < header.size(); ++i)
    if (!header[i].ends_with("_ms")) keep.push_back(i);
  std::string out;
  for (const auto& line : lines) {
    if (line.empty()) continue;
    auto cols = split(line, ',');
    std::string row;
    for (size_t k : keep) {
      if (!row.empty()) row += ',';
      if (k < cols.size()) row += cols[k];
    }
    out += row;
    out += '\n';
  }
  return out;
}

const char* kSeminormConfig = R"({
  "subcommand": "seminorm",
  "params": {"s": 0.5, "p": 2.0},
  "domain": {"kind": "box", "lo": [0, 0], "hi": [1, 1]},
  "fields": [{"name": "constant", "params": {"c1": 0.25, "c2": -1.0}}],
  "grid": {"h": [0.125]}
})";

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("config round-trip is stable") {
  std::string text = R"({
    "subcommand": "extend",
    "seed": 7,
    "params": {"s": 0.4, "p": 2.5},
    "domain": {"kind": "epigraph", "lo": [0, 0], "hi": [1, 1.5],
               "graph": {"kind": "affine", "a": [0.5], "b": 0.1}},
    "aux_domain": {"kind": "box", "lo": [0, -1], "hi": [1, 0]},
    "fields": [{"name": "shear"}, {"name": "trig", "params": {"comp": 2, "d1": 1}}],
    "grid": {"h": [0.25, 0.125], "refine_depth": 3},
    "options": {"delta": 0.5},
    "labels": {"variant": "two_plus_M"}
  })";
  ExperimentConfig c1 = parse_config_text(text);
  CHECK(c1.subcommand == "extend");
  CHECK(c1.seed == 7);
  CHECK(c1.grid.h.size() == 2);
  CHECK(c1.aux_domain.has_value());
  std::string s1 = serialize_config(c1);
  ExperimentConfig c2 = parse_config_text(s1);
  std::string s2 = serialize_config(c2);
  CHECK(s1 == s2);
  CHECK(c2.subcommand == c1.subcommand);
  CHECK(c2.s == c1.s);
  CHECK(c2.fields.size() == c1.fields.size());
}

TEST_CASE("config validation names the offending field") {
  std::string bad = R"({"subcommand": "seminorm", "bogus": 1,
    "domain": {"kind": "box", "lo": [0, 0], "hi": [1, 1]},
    "fields": [{"name": "shear"}], "grid": {"h": [0.25]}})";
  bool threw = false;
  try {
    parse_config_text(bad);
  } catch (const ConfigError& e) {
    threw = true;
    CHECK(std::string(e.what()).find("bogus") != std::string::npos);
  }
  CHECK(threw);

  std::string unknown_field = R"({"subcommand": "seminorm",
    "domain": {"kind": "box", "lo": [0, 0], "hi": [1, 1]},
    "fields": [{"name": "vortex"}], "grid": {"h": [0.25]}})";
  CHECK_THROWS_AS(parse_config_text(unknown_field), ConfigError);

  std::string empty_h = R"({"subcommand": "seminorm",
    "domain": {"kind": "box", "lo": [0, 0], "hi": [1, 1]},
    "fields": [{"name": "shear"}], "grid": {"h": []}})";
  CHECK_THROWS_AS(parse_config_text(empty_h), ConfigError);

  std::string bad_depth = R"({"subcommand": "seminorm",
    "domain": {"kind": "box", "lo": [0, 0], "hi": [1, 1]},
    "fields": [{"name": "shear"}], "grid": {"h": [0.25], "refine_depth": 20}})";
  CHECK_THROWS_AS(parse_config_text(bad_depth), ConfigError);

  CHECK_THROWS_AS(parse_config_text("{not json"), ConfigError);
}

TEST_CASE("missing config file exits with the config error code") {
  CHECK(run_cli("seminorm --config /nonexistent/fracorn.json >/dev/null 2>&1") == 2);
}

TEST_CASE("subcommand mismatch exits with the config error code") {
  std::string cfg = write_file("mismatch.json", kSeminormConfig);
  CHECK(run_cli("extend --config " + cfg + " >/dev/null 2>&1") == 2);
}

TEST_CASE("sabotaged coefficient check is reported as a failure") {
  CHECK(run_cli("acceptance --only 4 >/dev/null 2>&1") == 0);
  CHECK(run_cli("acceptance --only 4 --corrupt-coefficient >/dev/null 2>&1") == 4);
}

TEST_CASE("seminorm run reports a vanishing seminorm for constant fields") {
  std::string cfg = write_file("const.json", kSeminormConfig);
  std::string out = (work_dir() / "const_out.csv").string();
  CHECK(run_cli("seminorm --config " + cfg + " > " + out) == 0);
  std::string csv = read_file(out);
  auto lines = split(csv, '\n');
  REQUIRE(lines.size() >= 2);
  auto header = split(lines[0], ',');
  auto first = split(lines[1], ',');
  bool found = false;
  for (size_t i = 0; i < header.size(); ++i) {
    if (header[i] == "gagliardo") {
      found = true;
      REQUIRE(i < first.size());
      CHECK(std::stod(first[i]) == 0.0);
    }
  }
  CHECK(found);
}

TEST_CASE("repeated runs are identical up to runtime columns") {
  std::string cfg = write_file("repeat.json", kSeminormConfig);
  std::string o1 = (work_dir() / "r1.csv").string();
  std::string o2 = (work_dir() / "r2.csv").string();
  CHECK(run_cli("seminorm --config " + cfg + " > " + o1) == 0);
  CHECK(run_cli("seminorm --config " + cfg + " > " + o2) == 0);
  std::string a = strip_runtime_columns(read_file(o1));
  std::string b = strip_runtime_columns(read_file(o2));
  CHECK(a == b);
  CHECK(!a.empty());
}

TEST_CASE("convergence run emits one row per spacing plus the extrapolate row") {
  std::string text = R"({
    "subcommand": "convergence",
    "params": {"s": 0.5},
    "domain": {"kind": "box", "lo": [0, 0], "hi": [1, 1]},
    "fields": [{"name": "shear"}],
    "grid": {"h": [0.25, 0.125, 0.0625]}
  })";
  std::string cfg = write_file("conv.json", text);
  std::string out = (work_dir() / "conv.csv").string();
  CHECK(run_cli("convergence --config " + cfg + " > " + out) == 0);
  auto lines = split(read_file(out), '\n');
  int nonempty = 0;
  for (const auto& l : lines)
    if (!l.empty()) ++nonempty;
  CHECK(nonempty == 5);  // header + three spacings + extrapolate
}

TEST_CASE("out path writes the csv and a json mirror") {
  std::string cfg = write_file("mirror.json", kSeminormConfig);
  std::string out = (work_dir() / "report.csv").string();
  CHECK(run_cli("seminorm --config " + cfg + " --out " + out + " >/dev/null") == 0);
  CHECK(fs::exists(out));
  std::string mirror = (work_dir() / "report.json").string();
  REQUIRE(fs::exists(mirror));
  std::string j = read_file(mirror);
  CHECK(!j.empty());
  CHECK(j.front() == '[');  // one object per report row
  CHECK(j.find("gagliardo") != std::string::npos);
}

}  // TEST_SUITE
