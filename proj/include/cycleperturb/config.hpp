#pragma once
// Declarative experiment configuration: a single JSON file names a catalog
// system, the perturbation terms, the epsilon ladder, tolerances, and output
// options. Parse/validation failures throw ConfigError (CLI exit code 2),
// kept distinct from NumericalError (exit code 3).
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "cycleperturb/model.hpp"

namespace cycleperturb {

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct PerturbationTermConfig {
  std::string kind;  // "forcing" | "dry_friction"
  double amplitude = 0.0;
};

struct ToleranceConfig {
  double integration = 1e-10;   // cycle / adjoint / orbit solves
  double shooting = 1e-8;       // time-T map fixed-point residual
  double quadrature = 1e-8;     // support-function integrals
  double nondegeneracy = 1e-6;  // ||X(T) - I|| threshold
};

// All fields are optional in the file; the defaults below describe the
// reference experiment (cubic-restoring oscillator, cosine forcing plus dry
// friction, a dyadic epsilon ladder).
struct ExperimentConfig {
  std::string system_id = "duffing";
  std::map<std::string, double> system_params = {{"k", 1.0}};
  Vec2 seed_point{1.0, 0.0};
  std::vector<PerturbationTermConfig> terms = {{"forcing", 1.0}, {"dry_friction", 0.5}};
  std::vector<double> ladder = {0.02, 0.01, 0.005, 0.0025};
  ToleranceConfig tol;
  double sigma = -1.0;         // sign in the membership test c_eps in sigma*I
  bool paper_literal = false;  // sigma=+1 with the interval carrying the extra gamma factor
  int profile_nodes = 256;     // interval-profile resolution over one period
  int mc_draws = 2000;         // random selections per oracle test time
  std::string output_dir = "out";
  std::uint64_t seed = 0;  // Monte-Carlo seed
  int threads = 1;         // ladder fan-out
};

// Parse and validate a JSON object. Unknown keys (at any level), malformed
// values, a non-catalog system id, a non-decreasing ladder, or non-positive
// tolerances are all ConfigError.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

// Canonical serialization (sorted keys, round-trip number formatting) and the
// FNV-1a 64-bit hash of it; the hash goes into report provenance.
std::string canonical_config(const ExperimentConfig& cfg);
std::string config_hash(const ExperimentConfig& cfg);

// Instantiate the catalog objects the config names.
PlanarField field_from_config(const ExperimentConfig& cfg);
SetValuedPerturbation perturbation_from_config(const ExperimentConfig& cfg, double period);

}  // namespace cycleperturb
