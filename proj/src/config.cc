#include "cycleperturb/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace cycleperturb {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw ConfigError(msg); }

double as_number(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(where + ": non-finite number");
  return v;
}

long long as_integer(const json& j, const std::string& where) {
  if (!j.is_number_integer()) fail(where + ": expected an integer");
  return j.get<long long>();
}

std::string as_string(const json& j, const std::string& where) {
  if (!j.is_string()) fail(where + ": expected a string");
  return j.get<std::string>();
}

bool as_bool(const json& j, const std::string& where) {
  if (!j.is_boolean()) fail(where + ": expected a boolean");
  return j.get<bool>();
}

void reject_unknown(const json& obj, const std::vector<std::string>& allowed,
                    const std::string& where) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const auto& k : allowed)
      if (item.key() == k) known = true;
    if (!known) fail(where + ": unknown key \"" + item.key() + "\"");
  }
}

void parse_system(const json& j, ExperimentConfig& cfg) {
  if (!j.is_object()) fail("system: expected an object");
  reject_unknown(j, {"id", "params"}, "system");
  if (j.contains("id")) cfg.system_id = as_string(j["id"], "system.id");
  cfg.system_params.clear();
  if (j.contains("params")) {
    const json& p = j["params"];
    if (!p.is_object()) fail("system.params: expected an object");
    for (const auto& item : p.items())
      cfg.system_params[item.key()] = as_number(item.value(), "system.params." + item.key());
  }
}

void parse_terms(const json& j, ExperimentConfig& cfg) {
  if (!j.is_array()) fail("perturbation: expected an array");
  cfg.terms.clear();
  for (std::size_t i = 0; i < j.size(); ++i) {
    const json& t = j[i];
    const std::string where = "perturbation[" + std::to_string(i) + "]";
    if (!t.is_object()) fail(where + ": expected an object");
    reject_unknown(t, {"kind", "amplitude"}, where);
    if (!t.contains("kind")) fail(where + ": missing \"kind\"");
    PerturbationTermConfig term;
    term.kind = as_string(t["kind"], where + ".kind");
    if (t.contains("amplitude")) term.amplitude = as_number(t["amplitude"], where + ".amplitude");
    cfg.terms.push_back(term);
  }
}

void parse_tolerances(const json& j, ToleranceConfig& tol) {
  if (!j.is_object()) fail("tolerances: expected an object");
  reject_unknown(j, {"integration", "shooting", "quadrature", "nondegeneracy"}, "tolerances");
  if (j.contains("integration")) tol.integration = as_number(j["integration"], "tolerances.integration");
  if (j.contains("shooting")) tol.shooting = as_number(j["shooting"], "tolerances.shooting");
  if (j.contains("quadrature")) tol.quadrature = as_number(j["quadrature"], "tolerances.quadrature");
  if (j.contains("nondegeneracy"))
    tol.nondegeneracy = as_number(j["nondegeneracy"], "tolerances.nondegeneracy");
}

void validate(const ExperimentConfig& cfg) {
  static const std::vector<std::string> catalog = {"harmonic", "duffing", "pendulum"};
  bool in_catalog = false;
  for (const auto& id : catalog)
    if (cfg.system_id == id) in_catalog = true;
  if (!in_catalog) fail("system.id \"" + cfg.system_id + "\" is not in the catalog");

  if (cfg.system_id == "duffing") {
    for (const auto& [k, v] : cfg.system_params) {
      (void)v;
      if (k != "k") fail("system.params: duffing accepts only \"k\", got \"" + k + "\"");
    }
  } else if (!cfg.system_params.empty()) {
    fail("system.params: " + cfg.system_id + " takes no parameters");
  }

  for (const auto& t : cfg.terms)
    if (t.kind != "forcing" && t.kind != "dry_friction")
      fail("perturbation.kind \"" + t.kind + "\" is not in the catalog");

  for (std::size_t i = 0; i < cfg.ladder.size(); ++i) {
    if (!(cfg.ladder[i] > 0.0)) fail("ladder: entries must be positive");
    if (i > 0 && !(cfg.ladder[i] < cfg.ladder[i - 1]))
      fail("ladder: entries must be strictly decreasing");
  }

  if (!(cfg.tol.integration > 0.0) || !(cfg.tol.shooting > 0.0) || !(cfg.tol.quadrature > 0.0) ||
      !(cfg.tol.nondegeneracy > 0.0))
    fail("tolerances: all entries must be positive");

  if (cfg.sigma != 1.0 && cfg.sigma != -1.0) fail("sigma: must be +1 or -1");
  if (cfg.profile_nodes < 8) fail("profile_nodes: must be at least 8");
  if (cfg.mc_draws < 1) fail("mc_draws: must be at least 1");
  if (cfg.threads < 1) fail("threads: must be at least 1");
  if (cfg.output_dir.empty()) fail("output_dir: must be non-empty");
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(std::string("not valid JSON: ") + e.what());
  }
  if (!j.is_object()) fail("top level: expected a JSON object");
  reject_unknown(j,
                 {"system", "seed_point", "perturbation", "ladder", "tolerances", "sigma",
                  "paper_literal", "profile_nodes", "mc_draws", "output_dir", "seed", "threads"},
                 "top level");

  ExperimentConfig cfg;
  if (j.contains("system")) parse_system(j["system"], cfg);
  if (j.contains("seed_point")) {
    const json& s = j["seed_point"];
    if (!s.is_array() || s.size() != 2) fail("seed_point: expected [x1, x2]");
    cfg.seed_point = {as_number(s[0], "seed_point[0]"), as_number(s[1], "seed_point[1]")};
  }
  if (j.contains("perturbation")) parse_terms(j["perturbation"], cfg);
  if (j.contains("ladder")) {
    const json& l = j["ladder"];
    if (!l.is_array()) fail("ladder: expected an array");
    cfg.ladder.clear();
    for (std::size_t i = 0; i < l.size(); ++i)
      cfg.ladder.push_back(as_number(l[i], "ladder[" + std::to_string(i) + "]"));
  }
  if (j.contains("tolerances")) parse_tolerances(j["tolerances"], cfg.tol);
  if (j.contains("sigma")) cfg.sigma = as_number(j["sigma"], "sigma");
  if (j.contains("paper_literal")) cfg.paper_literal = as_bool(j["paper_literal"], "paper_literal");
  if (j.contains("profile_nodes"))
    cfg.profile_nodes = static_cast<int>(as_integer(j["profile_nodes"], "profile_nodes"));
  if (j.contains("mc_draws")) cfg.mc_draws = static_cast<int>(as_integer(j["mc_draws"], "mc_draws"));
  if (j.contains("output_dir")) cfg.output_dir = as_string(j["output_dir"], "output_dir");
  if (j.contains("seed")) {
    const long long s = as_integer(j["seed"], "seed");
    if (s < 0) fail("seed: must be non-negative");
    cfg.seed = static_cast<std::uint64_t>(s);
  }
  if (j.contains("threads")) cfg.threads = static_cast<int>(as_integer(j["threads"], "threads"));

  validate(cfg);
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open config file \"" + path + "\"");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

// Covers every field that can change computed numbers; output_dir and threads
// are execution details and stay out so relocated or parallel runs hash alike.
std::string canonical_config(const ExperimentConfig& cfg) {
  json j;
  j["system"]["id"] = cfg.system_id;
  j["system"]["params"] = json::object();
  for (const auto& [k, v] : cfg.system_params) j["system"]["params"][k] = v;
  j["seed_point"] = {cfg.seed_point.x, cfg.seed_point.y};
  j["perturbation"] = json::array();
  for (const auto& t : cfg.terms)
    j["perturbation"].push_back({{"kind", t.kind}, {"amplitude", t.amplitude}});
  j["ladder"] = cfg.ladder;
  j["tolerances"] = {{"integration", cfg.tol.integration},
                     {"shooting", cfg.tol.shooting},
                     {"quadrature", cfg.tol.quadrature},
                     {"nondegeneracy", cfg.tol.nondegeneracy}};
  j["sigma"] = cfg.sigma;
  j["paper_literal"] = cfg.paper_literal;
  j["profile_nodes"] = cfg.profile_nodes;
  j["mc_draws"] = cfg.mc_draws;
  j["seed"] = cfg.seed;
  return j.dump();
}

std::string config_hash(const ExperimentConfig& cfg) {
  const std::string s = canonical_config(cfg);
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

PlanarField field_from_config(const ExperimentConfig& cfg) {
  if (cfg.system_id == "harmonic") return make_harmonic();
  if (cfg.system_id == "pendulum") return make_pendulum();
  double k = 1.0;
  auto it = cfg.system_params.find("k");
  if (it != cfg.system_params.end()) k = it->second;
  return make_duffing(k);
}

SetValuedPerturbation perturbation_from_config(const ExperimentConfig& cfg, double period) {
  std::vector<SetValuedPerturbation> parts;
  for (const auto& t : cfg.terms) {
    if (t.kind == "forcing")
      parts.push_back(make_forcing(t.amplitude, period));
    else
      parts.push_back(make_dry_friction(t.amplitude, period));
  }
  if (parts.empty()) {
    SetValuedPerturbation zero;
    zero.center = [](double, const Vec2&, double) { return Vec2{0.0, 0.0}; };
    zero.period = period;
    zero.name = "none";
    return zero;
  }
  return combine(std::move(parts), period);
}

}  // namespace cycleperturb
