#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lspe/ledger.hpp"

namespace lspe {

/// Fully validated campaign configuration. Paths to fixtures are resolved
/// relative to the config file's directory at load time.
struct ExperimentConfig {
  std::string chain_path;
  std::string basis_path;
  double alpha = 0.0;
  double lambda = 0.0;
  double rho = 0.1;
  StepSchedule schedule;
  std::int64_t n0 = -1;  // -1 = auto sweep
  std::int64_t horizon = 100000;
  double delta = -1.0;  // -1 = (1 - beta)/4, resolved after the model build
  double epsilon = 0.1;
  int ensemble = 1000;
  std::uint64_t master_seed = 24601;
  bool diagnostics = false;
  std::string out_dir = "out";
  // verification knobs
  int t_max = 200;
  std::int64_t estimate_n_max = 2000;
  int estimate_ensemble = 200;
  std::int64_t k3_m_sup = 100000;
  std::vector<std::int64_t> lemma_checkpoints = {100, 1000, 10000};
  double convergence_tol = 0.02;
  int start_state = -1;  // -1 = draw X_0 from pi
  int threads = 0;       // 0 = hardware concurrency; never affects output
};

/// Throws ParseError on malformed JSON and ConstraintError naming the violated
/// inequality on cross-field constraint failures.
ExperimentConfig load_config(const std::string& path);

struct ClauseVerdict {
  std::string name;
  std::string status;  // PASS | FAIL | SKIPPED-VACUOUS
  std::string detail;
};

struct LemmaRow {
  std::int64_t n = 0;
  std::string family;  // b | A | B | Binv | delta | eps_pair
  double deviation = 0.0;
  double threshold = 0.0;
  double threshold2 = 0.0;
  double theory_failure = 0.0;
  double empirical = 0.0;
  std::string status;  // DOMINATED | VIOLATED | SKIPPED-VACUOUS
};

struct ExperimentReport {
  // campaign identity
  ExperimentConfig config;
  int M = 0;
  std::int64_t n0 = 0;
  double delta = 0.0;
  double epsilon = 0.0;
  double r_star_norm_H = 0.0;
  ConstantLedger ledger;

  // per-n arrays, indexed n - n0 for n in [n0, horizon]
  std::vector<double> err_median, err_p95, rhs_median, rhs_p95;
  std::vector<std::int64_t> violation_count;
  std::vector<double> theory_failure_per_n;  // raw, not clamped

  // uniform statement
  std::int64_t uniform_violations = 0;
  double theory_failure_uniform_raw = 0.0;
  bool vacuous_uniform = false;
  double tail_geometric = 0.0;
  double tail_stretched = 0.0;

  // convergence statistics at the horizon
  double final_err_median = 0.0;
  double final_err_p95 = 0.0;
  double convergence_threshold = 0.0;

  std::vector<LemmaRow> lemma_rows;

  // verdicts (filled by check_theorem)
  std::vector<ClauseVerdict> clauses;
  std::string overall;  // PASS | FAIL | VACUOUS-ONLY

  // volatile provenance; written to run_meta.json, never to report.json
  double wall_seconds = 0.0;
  int threads_used = 0;
};

/// Builds the model and ledger once, runs the seeded ensemble, aggregates
/// per-n and uniform violation statistics, the lemma tail rows, and the
/// convergence statistics. Deterministic function of the config; the thread
/// count changes the wall clock only.
ExperimentReport run_monte_carlo(const ExperimentConfig& config);

struct TheoremVerdict {
  std::vector<ClauseVerdict> clauses;
  std::string overall;
};

/// Itemized verdicts: (uniform_bound) empirical uniform violation dominated
/// by the theoretical failure probability when non-vacuous, (per_n_bound)
/// the per-n envelope, (convergence) 95th-percentile final error below the
/// configured tolerance, (lemma_tails) every non-vacuous lemma row dominated.
/// Vacuous clauses are reported SKIPPED-VACUOUS, never PASS.
TheoremVerdict check_theorem(const ExperimentReport& report);

/// Writes report.json, traces.csv, lemmas.csv into `dir` (all byte-stable for
/// a fixed config), plus run_meta.json with wall-clock provenance, which is
/// intentionally kept out of the deterministic trio.
void emit_report(const ExperimentReport& report, const std::string& dir);

/// report.json content as a string (what emit_report writes).
std::string report_to_json(const ExperimentReport& report);

}  // namespace lspe
