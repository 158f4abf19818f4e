#pragma once

#include <cstdint>
#include <vector>

#include "lspe/exact_model.hpp"

namespace lspe {

/// Power-rule stepsize a(n) = c * n^{-mu2} for n >= 1, with a(0) := a(1).
/// Sandwiched between mu1/n and mu3 * n^{-mu2}; 1/2 + theta < mu2 <= 1.
struct StepSchedule {
  double c = 0.0;
  double mu1 = 0.0;
  double mu2 = 0.0;
  double mu3 = 0.0;
  double theta = 0.0;

  double a(std::int64_t n) const {
    if (n <= 1) return c;
    if (mu2 == 1.0) return c / static_cast<double>(n);
    return c * std::pow(static_cast<double>(n), -mu2);
  }
};

/// Validates every schedule constraint; throws InvalidSchedule naming the
/// violated clause. The sandwich bounds are checked analytically for the
/// power rule and spot-checked on a grid up to n = 10^6.
StepSchedule build_schedule(double c, double mu1, double mu2, double mu3,
                            double theta);

/// chi(n, m) = prod_{k=m}^{n} (1 - a(k)), 1 when n < m.
double chi_product(const StepSchedule& schedule, std::int64_t n, std::int64_t m);

/// psi(n, m) = prod_{k=m}^{n-1} (1 - (1-beta) a(k)), 1 when n <= m.
double psi_product(const StepSchedule& schedule, double beta, std::int64_t n,
                   std::int64_t m);

struct DecayProducts {
  double chi = 1.0;
  double psi = 1.0;
};

DecayProducts decay_products(const StepSchedule& schedule, double beta,
                             std::int64_t n, std::int64_t m);

/// Online iterate. After k update steps the state holds the running averages
/// of index n = k-1 (n = -1 before the first step) and the iterate r_{n+1}:
///   z      = z_n
///   A_bar  = A_n,  b_bar = b_n
///   G      = rho I + sum_{m<=n} phi(X_m) phi(X_m)^T,  G_inv = G^{-1}
///   r      = r_{n+1}
/// B_n = G/(n+1) and B_n^{-1} = (n+1) G_inv.
struct RunnerState {
  std::int64_t n = -1;
  Vector r;
  Vector z;
  Matrix A_bar;
  Vector b_bar;
  Matrix G;
  Matrix G_inv;
  double rho = 0.0;
};

/// Performs the per-transition work: trace and running-average updates, the
/// rank-one inverse update, and the iterate update
/// r_{n+1} = r_n + a(n) B_n^{-1} (A_n r_n + b_n).
class LspeRunner {
 public:
  LspeRunner(const MarkovRewardChain& chain, const FeatureBasis& basis,
             double alpha, double lambda, StepSchedule schedule, double rho);

  RunnerState initial_state(const Vector& r0) const;

  /// Consumes the transition (X_m, X_{m+1}) at m = state.n + 1.
  /// Throws NumericalBreakdown if the rank-one update denominator collapses.
  void step(RunnerState& state, int x_m, int x_m1) const;

  /// Same update with the stepsize supplied by the caller (ensemble loops
  /// precompute a(n) tables instead of re-evaluating the power rule).
  void step(RunnerState& state, int x_m, int x_m1, double a_m) const;

  const StepSchedule& schedule() const { return schedule_; }
  double rho() const { return rho_; }
  double alpha() const { return alpha_; }
  double lambda() const { return lambda_; }
  const FeatureBasis& basis() const { return basis_; }

 private:
  FeatureBasis basis_;
  Vector cost_;
  double alpha_;
  double lambda_;
  StepSchedule schedule_;
  double rho_;
};

struct StepRecord {
  std::int64_t n = 0;
  double err_H = 0.0;
  double delta_H = 0.0;
  double eps1_H = 0.0;
  double eps2_H = 0.0;
};

struct TrajectoryRun {
  std::vector<StepRecord> records;  // n = 0..horizon
  RunnerState final_state;
  std::uint64_t seed = 0;
};

/// Proof diagnostics at the state's current averages index n.
struct Diagnostics {
  Matrix delta;
  Matrix eps1;
  Vector eps2;
  double delta_H = 0.0;
  double eps1_H = 0.0;
  double eps2_H = 0.0;
};

Diagnostics diagnostics(const RunnerState& state, const ExactModel& model,
                        const HMetric& metric);

/// Runs one seeded trajectory for `horizon` steps from r_0 = r0 and X_0 = x0,
/// recording n and ||r_n - r*||_H for n = 0..horizon. With diagnostics on,
/// row n additionally carries ||delta(n)||_H, ||eps1(n)||_H, ||eps2(n)||_H —
/// the quantities formed from the averages of index n, which produce r_{n+1} —
/// at the cost of one extra sampled transition and dense per-step recomputation.
TrajectoryRun run_trajectory(const MarkovRewardChain& chain,
                             const FeatureBasis& basis, const ExactModel& model,
                             const StepSchedule& schedule, double rho,
                             const Vector& r0, int x0, std::int64_t horizon,
                             std::uint64_t seed, bool with_diagnostics);

struct ReferenceRecord {
  std::int64_t n = 0;
  double err_H = 0.0;   // ||y_n - r*||_H
  double norm_H = 0.0;  // ||y_n||_H
};

/// Deterministic reference iterate y_{n+1} = y_n + a(n) B^{-1} (A y_n + b),
/// seeded at y_{n0} = y0; records n = n0..horizon.
std::vector<ReferenceRecord> run_reference(const ExactModel& model,
                                           const StepSchedule& schedule,
                                           const Vector& y0, std::int64_t n0,
                                           std::int64_t horizon);

}  // namespace lspe
