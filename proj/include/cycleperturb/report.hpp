#pragma once
// Orchestration shared by the CLI subcommands and the acceptance battery: the
// cycle -> basis -> profile -> ladder pipeline, per-criterion verdicts with
// numeric witnesses, and deterministic serializers (byte-identical output for
// identical config and seed; wall time goes only to the log stream).
#include <string>
#include <vector>

#include "cycleperturb/config.hpp"

namespace cycleperturb {

inline constexpr const char* kToolVersion = "0.1.0";

struct CheckVerdict {
  std::string name;
  std::string status;  // "pass" | "fail" | "skipped"
  double witness = 0.0;
  std::string detail;
};

struct LadderRow {
  double eps = 0.0;
  double sup_ratio = 0.0;     // sup_t |x_eps(t) - x0(t)| / eps
  double sup_residual = 0.0;  // sup over profile nodes of dist(c_eps(t), sigma*I(t))
  double delta = 0.0;         // section time offset
  double v = 0.0;             // section space offset
  double shooting_residual = 0.0;
  double section_residual = 0.0;
  int winding = 0;
  int root_count = 0;
  int events = 0;  // switching events along the orbit
};

struct VerifyReport {
  std::vector<CheckVerdict> verdicts;
  std::vector<LadderRow> rows;
  std::string config_hash;
  std::string version = kToolVersion;
  bool nondegenerate = false;
  bool all_pass = false;
};

// Full verification battery. A degenerate cycle reports the nondegeneracy
// verdict, skips everything downstream, and still counts as all-pass.
VerifyReport run_verify(const ExperimentConfig& cfg);

// Deterministic serializations.
std::string report_to_json(const VerifyReport& rep);
std::string ladder_csv(const std::vector<LadderRow>& rows);

// Subcommand drivers; each writes its files under cfg.output_dir and returns
// the process exit code.
int cmd_cycle(const ExperimentConfig& cfg);
int cmd_analyze(const ExperimentConfig& cfg, double eps_override);  // <=0: ladder front
int cmd_sweep(const ExperimentConfig& cfg);
int cmd_verify(const ExperimentConfig& cfg);
int cmd_plot(const ExperimentConfig& cfg);

// Progress lines on stderr when CYCLEPERTURB_LOG is set non-empty and not "0".
void logline(const std::string& msg);

}  // namespace cycleperturb
