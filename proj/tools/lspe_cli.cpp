// Command-line front end: solve, mixing, ledger, run, verify.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "lspe/experiment.hpp"
#include "lspe/rng.hpp"

namespace {

using namespace lspe;

struct CommonArgs {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out_dir;
  int threads = -1;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "experiment config (JSON)")
      ->required();
  cmd->add_option("--seed", args.seed, "override master_seed")
      ->each([&](const std::string&) { args.seed_set = true; });
  cmd->add_option("--out", args.out_dir, "override output directory");
  cmd->add_option("--threads", args.threads,
                  "worker threads (speed only, never output)");
}

ExperimentConfig load_with_overrides(const CommonArgs& args) {
  ExperimentConfig cfg = load_config(args.config_path);
  if (args.seed_set) cfg.master_seed = args.seed;
  if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
  if (args.threads >= 0) cfg.threads = args.threads;
  return cfg;
}

struct LoadedProblem {
  MarkovRewardChain chain;
  StationaryInfo stat;
  FeatureBasis basis;
  ExactModel model;
};

LoadedProblem load_problem(const ExperimentConfig& cfg) {
  MarkovRewardChain chain = chain_from_json_file(cfg.chain_path);
  FeatureBasis basis = basis_from_json_file(cfg.basis_path);
  StationaryInfo stat = stationary_distribution(chain);
  ExactModel model = build_model(chain, stat, basis, cfg.alpha, cfg.lambda);
  return LoadedProblem{std::move(chain), std::move(stat), std::move(basis),
                       std::move(model)};
}

int cmd_solve(const CommonArgs& args) {
  const ExperimentConfig cfg = load_with_overrides(args);
  const LoadedProblem p = load_problem(cfg);
  nlohmann::ordered_json j = nlohmann::ordered_json::parse(model_to_json(p.model));
  nlohmann::ordered_json pi = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < p.stat.pi.size(); ++i) pi.push_back(p.stat.pi(i));
  j["pi"] = pi;
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_mixing(const CommonArgs& args) {
  const ExperimentConfig cfg = load_with_overrides(args);
  const MarkovRewardChain chain = chain_from_json_file(cfg.chain_path);
  const StationaryInfo stat = stationary_distribution(chain);
  const MixingProfile profile = mixing_profile(chain, stat, cfg.t_max);
  nlohmann::ordered_json j;
  j["t_max"] = profile.t_max_used;
  j["d"] = profile.d_values;
  try {
    j["tau_min"] = tau_min(profile);
  } catch (const NotMixedByTmax& e) {
    j["tau_min"] = nullptr;
    j["error"] = e.what();
  }
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_ledger(const CommonArgs& args) {
  const ExperimentConfig cfg = load_with_overrides(args);
  const LoadedProblem p = load_problem(cfg);
  LedgerOptions opt;
  opt.t_max = cfg.t_max;
  opt.estimate_n_max = cfg.estimate_n_max;
  opt.estimate_ensemble = cfg.estimate_ensemble;
  opt.k3_m_sup = cfg.k3_m_sup;
  opt.seed = derive_seed(cfg.master_seed, 0xC0u);
  opt.n0 = cfg.n0;
  opt.delta = cfg.delta > 0.0 ? cfg.delta : (1.0 - p.model.beta) / 4.0;
  const ConstantLedger ledger = build_ledger(p.chain, p.stat, p.basis, p.model,
                                             cfg.schedule, cfg.rho, opt);
  std::cout << ledger.to_json() << "\n";
  return 0;
}

int cmd_run(const CommonArgs& args) {
  const ExperimentConfig cfg = load_with_overrides(args);
  const LoadedProblem p = load_problem(cfg);
  int x0 = cfg.start_state;
  const std::uint64_t tseed = derive_seed(cfg.master_seed, 1);
  if (x0 < 0) {
    UniformStream s(derive_seed(tseed, 0x57u));
    const double u = s.next();
    double acc = 0.0;
    x0 = p.chain.num_states() - 1;
    for (int i = 0; i < p.chain.num_states(); ++i) {
      acc += p.stat.pi(i);
      if (acc > u) {
        x0 = i;
        break;
      }
    }
  }
  const TrajectoryRun run = run_trajectory(
      p.chain, p.basis, p.model, cfg.schedule, cfg.rho,
      Vector::Zero(p.model.num_features()), x0, cfg.horizon,
      derive_seed(tseed, 0x9Au), cfg.diagnostics);

  std::filesystem::create_directories(cfg.out_dir);
  const auto csv_path = std::filesystem::path(cfg.out_dir) / "run.csv";
  std::ofstream out(csv_path, std::ios::binary);
  if (!out) throw IoError("cannot write " + csv_path.string());
  char buf[64];
  if (cfg.diagnostics) {
    out << "n,err_H,delta_H,eps1_H,eps2_H\n";
    for (const auto& rec : run.records) {
      std::snprintf(buf, sizeof(buf), "%.17g", rec.err_H);
      out << rec.n << ',' << buf;
      std::snprintf(buf, sizeof(buf), "%.17g", rec.delta_H);
      out << ',' << buf;
      std::snprintf(buf, sizeof(buf), "%.17g", rec.eps1_H);
      out << ',' << buf;
      std::snprintf(buf, sizeof(buf), "%.17g", rec.eps2_H);
      out << ',' << buf << "\n";
    }
  } else {
    out << "n,err_H\n";
    for (const auto& rec : run.records) {
      std::snprintf(buf, sizeof(buf), "%.17g", rec.err_H);
      out << rec.n << ',' << buf << "\n";
    }
  }
  std::cout << "wrote " << csv_path.string() << " (" << run.records.size()
            << " rows), final err_H = " << run.records.back().err_H << "\n";
  return 0;
}

int cmd_verify(const CommonArgs& args) {
  const ExperimentConfig cfg = load_with_overrides(args);
  const ExperimentReport report = run_monte_carlo(cfg);
  emit_report(report, cfg.out_dir);
  for (const auto& clause : report.clauses)
    std::cout << clause.name << ": " << clause.status << " (" << clause.detail
              << ")\n";
  std::cout << "overall: " << report.overall << "\n";
  std::cout << "report written to " << cfg.out_dir << "\n";
  if (report.overall == "FAIL") return 2;
  if (report.overall == "VACUOUS-ONLY") return 3;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LSPE(lambda) policy evaluation and concentration-bound checks"};
  app.require_subcommand(1);

  CommonArgs solve_args, mixing_args, ledger_args, run_args, verify_args;
  auto* solve = app.add_subcommand("solve", "print the exact model quantities");
  add_common(solve, solve_args);
  auto* mixing = app.add_subcommand("mixing", "mixing profile and tau_min");
  add_common(mixing, mixing_args);
  auto* ledger = app.add_subcommand("ledger", "constants with provenance");
  add_common(ledger, ledger_args);
  auto* run = app.add_subcommand("run", "single trajectory, per-step CSV");
  add_common(run, run_args);
  auto* verify = app.add_subcommand("verify", "full Monte Carlo campaign");
  add_common(verify, verify_args);

  CLI11_PARSE(app, argc, argv);
  try {
    if (solve->parsed()) return cmd_solve(solve_args);
    if (mixing->parsed()) return cmd_mixing(mixing_args);
    if (ledger->parsed()) return cmd_ledger(ledger_args);
    if (run->parsed()) return cmd_run(run_args);
    if (verify->parsed()) return cmd_verify(verify_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
