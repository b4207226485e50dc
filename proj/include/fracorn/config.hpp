#pragma once

// Experiment configuration: a JSON document describing the domain, the
// fields, the fractional parameters and the per-subcommand knobs.  Parsing
// validates eagerly (every referenced field name must build) and the
// serialized form of a parsed config re-parses to the same config.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fracorn/fields.hpp"
#include "fracorn/geometry.hpp"
#include "fracorn/grid.hpp"

namespace fracorn {

struct DomainConfig {
  std::string kind;  // box | epigraph | hypograph | halfspace | angular | polygon
  int dim = 2;
  std::vector<double> lo, hi;        // window bounds (all graph-type kinds and box)
  double alpha = 1.0, radius = 1.0;  // angular sector
  std::string graph_kind;            // affine | pwl (epigraph / hypograph only)
  std::vector<double> graph_a;       // affine slope coefficients
  double graph_b = 0.0;              // affine offset
  std::vector<double> graph_xs, graph_ys;  // pwl knots (dim = 2 graphs)
  std::vector<std::vector<double>> vertices;  // polygon

  Domain build() const;
};

struct FieldConfig {
  std::string name;  // one of the field-library names
  std::map<std::string, double> params;

  VectorField build(int dim) const;
};

struct GridConfig {
  std::vector<double> h;  // one experiment pass per entry
  int refine_depth = 4;
  int mc_samples = 4096;

  Grid build(const Domain& dom, double hval) const;
};

struct ExperimentConfig {
  std::string subcommand;  // seminorm | extend | korn-constant | hardy | cover |
                           // convergence | perisolve | probe-ps-lt-1
  uint64_t seed = 20260822ull;
  int threads = 0;  // 0 = leave the OpenMP default in place
  std::string out;  // report path; empty writes to stdout only
  double s = 0.5;
  double p = 2.0;
  DomainConfig domain;
  std::optional<DomainConfig> aux_domain;  // extend: region below the graph;
                                           // perisolve: constrained region
  std::vector<FieldConfig> fields;
  GridConfig grid;
  std::map<std::string, double> options;       // numeric knobs, subcommand-specific
  std::map<std::string, std::string> labels;   // string knobs (method, constant, cutoff)

  double option_or(const std::string& key, double fallback) const;
  std::string label_or(const std::string& key, const std::string& fallback) const;
};

// Throws ConfigError with a field path (and, for malformed JSON, the byte
// offset) on any problem.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);
// Canonical form: 2-space indent, alphabetical keys, shortest round-trip
// number rendering.  parse(serialize(c)) reproduces c exactly.
std::string serialize_config(const ExperimentConfig& c);

}  // namespace fracorn
