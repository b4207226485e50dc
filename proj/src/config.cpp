#include "fracorn/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace fracorn {

namespace {

using nlohmann::json;

const std::set<std::string>& subcommand_names() {
  static const std::set<std::string> names = {
      "seminorm",    "extend",    "korn-constant", "hardy",
      "cover",       "convergence", "perisolve",   "probe-ps-lt-1"};
  return names;
}

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError("config field '" + path + "': " + what);
}

void reject_unknown(const json& j, const std::set<std::string>& allowed,
                    const std::string& path) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) fail(path + "." + it.key(), "unknown key");
}

double get_num(const json& j, const std::string& key, const std::string& path) {
  if (!j.contains(key)) fail(path + "." + key, "missing");
  if (!j.at(key).is_number()) fail(path + "." + key, "expected a number");
  return j.at(key).get<double>();
}

double get_num_or(const json& j, const std::string& key, double fallback,
                  const std::string& path) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) fail(path + "." + key, "expected a number");
  return j.at(key).get<double>();
}

std::string get_str(const json& j, const std::string& key, const std::string& path) {
  if (!j.contains(key)) fail(path + "." + key, "missing");
  if (!j.at(key).is_string()) fail(path + "." + key, "expected a string");
  return j.at(key).get<std::string>();
}

std::vector<double> get_num_list(const json& j, const std::string& key,
                                 const std::string& path) {
  if (!j.contains(key)) fail(path + "." + key, "missing");
  const json& a = j.at(key);
  if (!a.is_array()) fail(path + "." + key, "expected an array of numbers");
  std::vector<double> out;
  for (const auto& e : a) {
    if (!e.is_number()) fail(path + "." + key, "expected an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

DomainConfig parse_domain(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  reject_unknown(j,
                 {"kind", "dim", "lo", "hi", "alpha", "radius", "graph", "vertices"},
                 path);
  DomainConfig d;
  d.kind = get_str(j, "kind", path);
  d.dim = static_cast<int>(get_num_or(j, "dim", 2.0, path));
  if (j.contains("lo")) d.lo = get_num_list(j, "lo", path);
  if (j.contains("hi")) d.hi = get_num_list(j, "hi", path);
  if (d.kind == "angular") {
    d.alpha = get_num(j, "alpha", path);
    d.radius = get_num(j, "radius", path);
  }
  if (d.kind == "epigraph" || d.kind == "hypograph") {
    if (!j.contains("graph")) fail(path + ".graph", "missing");
    const json& g = j.at("graph");
    reject_unknown(g, {"kind", "a", "b", "xs", "ys"}, path + ".graph");
    d.graph_kind = get_str(g, "kind", path + ".graph");
    if (d.graph_kind == "affine") {
      d.graph_a = get_num_list(g, "a", path + ".graph");
      d.graph_b = get_num_or(g, "b", 0.0, path + ".graph");
    } else if (d.graph_kind == "pwl") {
      d.graph_xs = get_num_list(g, "xs", path + ".graph");
      d.graph_ys = get_num_list(g, "ys", path + ".graph");
    } else {
      fail(path + ".graph.kind", "expected 'affine' or 'pwl'");
    }
  }
  if (d.kind == "polygon") {
    if (!j.contains("vertices")) fail(path + ".vertices", "missing");
    const json& vs = j.at("vertices");
    if (!vs.is_array()) fail(path + ".vertices", "expected an array of points");
    for (size_t i = 0; i < vs.size(); ++i) {
      if (!vs[i].is_array()) fail(path + ".vertices", "expected an array of points");
      std::vector<double> pt;
      for (const auto& e : vs[i]) {
        if (!e.is_number()) fail(path + ".vertices", "expected numeric coordinates");
        pt.push_back(e.get<double>());
      }
      d.vertices.push_back(std::move(pt));
    }
  }
  // build once now so a bad domain surfaces as a parse-stage error
  try {
    d.build();
  } catch (const ConfigError& e) {
    fail(path, e.what());
  }
  return d;
}

json domain_to_json(const DomainConfig& d) {
  json j;
  j["kind"] = d.kind;
  j["dim"] = d.dim;
  if (!d.lo.empty()) j["lo"] = d.lo;
  if (!d.hi.empty()) j["hi"] = d.hi;
  if (d.kind == "angular") {
    j["alpha"] = d.alpha;
    j["radius"] = d.radius;
  }
  if (d.kind == "epigraph" || d.kind == "hypograph") {
    json g;
    g["kind"] = d.graph_kind;
    if (d.graph_kind == "affine") {
      g["a"] = d.graph_a;
      g["b"] = d.graph_b;
    } else {
      g["xs"] = d.graph_xs;
      g["ys"] = d.graph_ys;
    }
    j["graph"] = g;
  }
  if (d.kind == "polygon") j["vertices"] = d.vertices;
  return j;
}

Vec vec_from(const std::vector<double>& v, const std::string& what) {
  if (v.size() < 2 || v.size() > static_cast<size_t>(kMaxDim))
    throw ConfigError(what + ": expected 2 to " + std::to_string(kMaxDim) + " coordinates");
  Vec out = Vec::zero(static_cast<int>(v.size()));
  for (size_t i = 0; i < v.size(); ++i) out[static_cast<int>(i)] = v[i];
  return out;
}

}  // namespace

Domain DomainConfig::build() const {
  if (kind == "angular") return Domain::angular(alpha, radius);
  if (kind == "polygon") {
    std::vector<Vec> vs;
    for (const auto& p : vertices) vs.push_back(vec_from(p, "polygon vertex"));
    return Domain::polygon(vs);
  }
  Vec vlo = vec_from(lo, "domain lo");
  Vec vhi = vec_from(hi, "domain hi");
  if (kind == "box") return Domain::box(vlo, vhi);
  if (kind == "halfspace") return Domain::halfspace(vlo, vhi);
  if (kind == "epigraph" || kind == "hypograph") {
    LipschitzFn f = [&] {
      if (graph_kind == "affine") return LipschitzFn::affine(graph_a, graph_b);
      if (graph_kind == "pwl") return LipschitzFn::pwl(graph_xs, graph_ys);
      throw ConfigError("domain graph kind '" + graph_kind + "' unknown");
    }();
    return kind == "epigraph" ? Domain::epigraph(std::move(f), vlo, vhi)
                              : Domain::hypograph(std::move(f), vlo, vhi);
  }
  throw ConfigError("domain kind '" + kind + "' unknown");
}

VectorField FieldConfig::build(int dim) const { return field_library(name, params, dim); }

Grid GridConfig::build(const Domain& dom, double hval) const {
  return Grid::make(dom, hval, 0x9e3779b97f4a7c15ull, mc_samples);
}

double ExperimentConfig::option_or(const std::string& key, double fallback) const {
  auto it = options.find(key);
  return it == options.end() ? fallback : it->second;
}

std::string ExperimentConfig::label_or(const std::string& key,
                                       const std::string& fallback) const {
  auto it = labels.find(key);
  return it == labels.end() ? fallback : it->second;
}

ExperimentConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config root: expected an object");
  reject_unknown(j,
                 {"subcommand", "seed", "threads", "out", "params", "domain", "aux_domain",
                  "fields", "grid", "options", "labels"},
                 "config");

  ExperimentConfig c;
  c.subcommand = get_str(j, "subcommand", "config");
  if (!subcommand_names().count(c.subcommand))
    fail("config.subcommand", "'" + c.subcommand + "' is not a subcommand");
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned() && !j.at("seed").is_number_integer())
      fail("config.seed", "expected a non-negative integer");
    c.seed = j.at("seed").get<uint64_t>();
  }
  c.threads = static_cast<int>(get_num_or(j, "threads", 0.0, "config"));
  if (c.threads < 0) fail("config.threads", "must be non-negative");
  if (j.contains("out")) c.out = get_str(j, "out", "config");

  if (!j.contains("params")) fail("config.params", "missing");
  const json& pj = j.at("params");
  reject_unknown(pj, {"s", "p"}, "config.params");
  c.s = get_num(pj, "s", "config.params");
  c.p = get_num_or(pj, "p", 2.0, "config.params");
  if (!(c.s > 0.0) || !(c.s < 1.0)) fail("config.params.s", "must lie in (0, 1)");
  if (!(c.p > 1.0)) fail("config.params.p", "must exceed 1");

  if (!j.contains("domain")) fail("config.domain", "missing");
  c.domain = parse_domain(j.at("domain"), "config.domain");
  if (j.contains("aux_domain"))
    c.aux_domain = parse_domain(j.at("aux_domain"), "config.aux_domain");

  if (j.contains("fields")) {
    const json& fj = j.at("fields");
    if (!fj.is_array()) fail("config.fields", "expected an array");
    int dim = c.domain.build().n();
    for (size_t i = 0; i < fj.size(); ++i) {
      std::string path = "config.fields[" + std::to_string(i) + "]";
      const json& e = fj[i];
      if (!e.is_object()) fail(path, "expected an object");
      reject_unknown(e, {"name", "params"}, path);
      FieldConfig fc;
      fc.name = get_str(e, "name", path);
      if (e.contains("params")) {
        const json& fp = e.at("params");
        if (!fp.is_object()) fail(path + ".params", "expected an object");
        for (auto it = fp.begin(); it != fp.end(); ++it) {
          if (!it.value().is_number()) fail(path + ".params." + it.key(), "expected a number");
          fc.params[it.key()] = it.value().get<double>();
        }
      }
      try {
        fc.build(dim);  // the whitelist check: every referenced field must build
      } catch (const ConfigError& err) {
        fail(path, err.what());
      }
      c.fields.push_back(std::move(fc));
    }
  }

  if (!j.contains("grid")) fail("config.grid", "missing");
  const json& gj = j.at("grid");
  reject_unknown(gj, {"h", "refine_depth", "mc_samples"}, "config.grid");
  c.grid.h = get_num_list(gj, "h", "config.grid");
  if (c.grid.h.empty()) fail("config.grid.h", "needs at least one spacing");
  for (double hv : c.grid.h)
    if (!(hv > 0.0)) fail("config.grid.h", "spacings must be positive");
  c.grid.refine_depth = static_cast<int>(get_num_or(gj, "refine_depth", 4.0, "config.grid"));
  if (c.grid.refine_depth < 0 || c.grid.refine_depth > 12)
    fail("config.grid.refine_depth", "must lie in 0..12");
  c.grid.mc_samples = static_cast<int>(get_num_or(gj, "mc_samples", 4096.0, "config.grid"));
  if (c.grid.mc_samples < 16) fail("config.grid.mc_samples", "must be at least 16");

  if (j.contains("options")) {
    const json& oj = j.at("options");
    if (!oj.is_object()) fail("config.options", "expected an object");
    for (auto it = oj.begin(); it != oj.end(); ++it) {
      if (!it.value().is_number()) fail("config.options." + it.key(), "expected a number");
      c.options[it.key()] = it.value().get<double>();
    }
  }
  if (j.contains("labels")) {
    const json& lj = j.at("labels");
    if (!lj.is_object()) fail("config.labels", "expected an object");
    for (auto it = lj.begin(); it != lj.end(); ++it) {
      if (!it.value().is_string()) fail("config.labels." + it.key(), "expected a string");
      c.labels[it.key()] = it.value().get<std::string>();
    }
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string serialize_config(const ExperimentConfig& c) {
  json j;
  j["subcommand"] = c.subcommand;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  if (!c.out.empty()) j["out"] = c.out;
  j["params"] = {{"s", c.s}, {"p", c.p}};
  j["domain"] = domain_to_json(c.domain);
  if (c.aux_domain) j["aux_domain"] = domain_to_json(*c.aux_domain);
  json fields = json::array();
  for (const auto& f : c.fields) {
    json e;
    e["name"] = f.name;
    if (!f.params.empty()) e["params"] = f.params;
    fields.push_back(e);
  }
  j["fields"] = fields;
  j["grid"] = {{"h", c.grid.h},
               {"refine_depth", c.grid.refine_depth},
               {"mc_samples", c.grid.mc_samples}};
  if (!c.options.empty()) j["options"] = c.options;
  if (!c.labels.empty()) j["labels"] = c.labels;
  return j.dump(2) + "\n";
}

}  // namespace fracorn
