// Command-line front end: cycle / analyze / sweep / verify / plot over a
// declarative JSON experiment config. Exit codes: 0 success, 1 verification
// failures, 2 config/usage errors, 3 numerical failure (diagnostic JSON on
// stderr).
#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "cycleperturb/config.hpp"
#include "cycleperturb/errors.hpp"
#include "cycleperturb/report.hpp"
#include "json.hpp"

int main(int argc, char** argv) {
  using namespace cycleperturb;
  CLI::App app{"periodic perturbations of planar conservative cycles"};
  app.require_subcommand(1);

  std::string config_path, out_override;
  double eps_override = 0.0;
  long long seed_override = -1;
  int threads_override = 0;
  bool paper_literal = false;

  app.add_option("--config", config_path, "experiment config file (JSON)");
  app.add_option("--eps", eps_override, "perturbation size for analyze");
  app.add_option("--out", out_override, "output directory (overrides config)");
  app.add_flag("--paper-literal", paper_literal,
               "literal sign reading: sigma=+1 with the extra gamma factor");
  app.add_option("--seed", seed_override, "Monte-Carlo seed (overrides config)");
  app.add_option("--threads", threads_override, "ladder worker count (overrides config)");

  auto* c_cycle = app.add_subcommand("cycle", "locate the cycle, monodromy, adjoint frame");
  auto* c_analyze = app.add_subcommand("analyze", "one-epsilon orbit, section data, residuals");
  auto* c_sweep = app.add_subcommand("sweep", "run the epsilon ladder, emit CSV");
  auto* c_verify = app.add_subcommand("verify", "full acceptance battery");
  auto* c_plot = app.add_subcommand("plot", "phase portrait and ladder plots (SVG)");
  for (auto* s : {c_cycle, c_analyze, c_sweep, c_verify, c_plot}) s->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // usage errors are config errors
  }

  try {
    ExperimentConfig cfg =
        config_path.empty() ? ExperimentConfig{} : parse_config_file(config_path);
    if (!out_override.empty()) cfg.output_dir = out_override;
    if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);
    if (threads_override >= 1) cfg.threads = threads_override;
    if (paper_literal) cfg.paper_literal = true;

    if (*c_cycle) return cmd_cycle(cfg);
    if (*c_analyze) return cmd_analyze(cfg, eps_override);
    if (*c_sweep) return cmd_sweep(cfg);
    if (*c_verify) return cmd_verify(cfg);
    return cmd_plot(cfg);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const NumericalError& e) {
    nlohmann::json diag{{"error", "numerical_failure"}, {"what", e.what()}};
    std::fprintf(stderr, "%s\n", diag.dump().c_str());
    return 3;
  } catch (const std::exception& e) {
    nlohmann::json diag{{"error", "internal_failure"}, {"what", e.what()}};
    std::fprintf(stderr, "%s\n", diag.dump().c_str());
    return 3;
  }
}
