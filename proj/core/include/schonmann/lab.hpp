#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "schonmann/ising.hpp"
#include "schonmann/stats.hpp"

namespace schonmann {

inline constexpr const char* artifact_version = "1.0.0";

// Validated experiment description parsed from flat `key = value` text
// (# comments).  Unknown keys are rejected with their line number; seeds are
// mandatory for every experiment that consumes randomness.
struct RunConfig {
  std::string experiment;

  double beta = 0.0;
  double h = 0.0;
  FieldSign field_sign = FieldSign::paper_literal;
  std::vector<double> betas;  // oracle-check grid

  std::vector<int> boxes;
  uint64_t samples = 1000;
  uint64_t samples_per_word = 0;  // 0 = use `samples`
  unsigned workers = 0;           // 0 = resolve at run time
  uint64_t master_seed = 0;
  bool seed_set = false;
  std::string out_dir = ".";

  // sampling
  std::string sampler = "auto";  // auto | cftp | burnin
  int burn_in = 0;
  uint64_t cftp_max_sweeps = uint64_t{1} << 20;

  // experiment-specific
  int k_min = 1, k_max = 8;                    // vark
  std::string word;                            // g-estimate
  std::string tail = "both";                   // plus | minus | both
  std::vector<std::pair<int, int>> nl_ladder;  // g-estimate rungs
  std::vector<int> gaps;                       // mixing
  int w = 2;
  double theta_cone = 0.2;
  int run_len = 6;                             // theta / prop-domi
  int collar_n = 2;
  std::vector<int> collar_N;                   // two-sided ladder
  int dec_l = 1, dec_k = 1;                    // decimate
  int window_lo = 0, window_hi = 0;            // 0,0 = full box line
  int max_free_sites = 9;                      // oracle-check cap

  ModelParams params() const { return ModelParams{beta, h, field_sign}; }
};

RunConfig parse_config(const std::string& text);
RunConfig parse_config_file(const std::string& path);

struct StatCheck {
  std::string name;
  double statistic = 0.0;
  double p_value = 1.0;
  bool pass = true;
};

struct RunOutcome {
  int exit_status = 0;  // 0 ok, 2 a statistical check failed
  std::vector<std::string> output_files;
  std::vector<StatCheck> checks;
  DrawStats draw_stats;
};

// Executes the configured experiment, writes its CSV outputs plus an
// atomically renamed run_manifest.json into config.out_dir, and logs one-line
// progress to `log`.  Output bytes depend only on (config, master_seed),
// never on worker count.
RunOutcome run_experiment(const RunConfig& config, std::ostream& log);

// Residual ||pi K - pi||_inf of one deterministic checkerboard heat-bath
// sweep applied to the exact distribution (stationarity witness used by the
// oracle-check experiment and the acceptance suite).
double heat_bath_stationarity_residual(const ExactDistribution& dist,
                                       const ModelParams& params);

}  // namespace schonmann
