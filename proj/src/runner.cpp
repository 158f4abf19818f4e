#include "lspe/runner.hpp"

#include <cmath>

namespace lspe {

StepSchedule build_schedule(double c, double mu1, double mu2, double mu3,
                            double theta) {
  if (!(theta > 0.0 && theta < 0.5))
    throw InvalidSchedule("theta must lie in (0, 1/2)");
  if (!(mu2 > 0.5 + theta))
    throw InvalidSchedule("mu2 must exceed 1/2 + theta");
  if (!(mu2 <= 1.0)) throw InvalidSchedule("mu2 must be <= 1");
  if (!(c > 0.0 && c < 1.0))
    throw InvalidSchedule("c must lie in (0,1) so that a(n) < 1");
  if (!(mu1 > 0.0 && mu3 > 0.0))
    throw InvalidSchedule("mu1 and mu3 must be positive");
  // Power rule: mu1/n <= c n^{-mu2} for all n >= 1 iff mu1 <= c (worst case
  // n = 1, since 1 - mu2 >= 0), and c n^{-mu2} <= mu3 n^{-mu2} iff c <= mu3.
  if (!(mu1 <= c)) throw InvalidSchedule("mu1 must be <= c (lower sandwich)");
  if (!(c <= mu3)) throw InvalidSchedule("c must be <= mu3 (upper sandwich)");

  StepSchedule schedule{c, mu1, mu2, mu3, theta};
  // Spot grid up to 10^6 on top of the analytic argument.
  for (std::int64_t n = 1; n <= 1000000; n = (n < 16 ? n + 1 : n + n / 7)) {
    const double a = schedule.a(n);
    const double nd = static_cast<double>(n);
    if (!(a < 1.0)) throw InvalidSchedule("a(n) must stay below 1");
    if (a < mu1 / nd * (1.0 - 1e-12) ||
        a > mu3 * std::pow(nd, -mu2) * (1.0 + 1e-12))
      throw InvalidSchedule("sandwich bound failed at n = " + std::to_string(n));
  }
  return schedule;
}

double chi_product(const StepSchedule& schedule, std::int64_t n,
                   std::int64_t m) {
  if (n < m) return 1.0;
  double prod = 1.0;
  for (std::int64_t k = m; k <= n; ++k) prod *= 1.0 - schedule.a(k);
  return prod;
}

double psi_product(const StepSchedule& schedule, double beta, std::int64_t n,
                   std::int64_t m) {
  if (n <= m) return 1.0;
  double prod = 1.0;
  for (std::int64_t k = m; k <= n - 1; ++k)
    prod *= 1.0 - (1.0 - beta) * schedule.a(k);
  return prod;
}

DecayProducts decay_products(const StepSchedule& schedule, double beta,
                             std::int64_t n, std::int64_t m) {
  return DecayProducts{chi_product(schedule, n, m),
                       psi_product(schedule, beta, n, m)};
}

LspeRunner::LspeRunner(const MarkovRewardChain& chain, const FeatureBasis& basis,
                       double alpha, double lambda, StepSchedule schedule,
                       double rho)
    : basis_(basis),
      cost_(chain.cost),
      alpha_(alpha),
      lambda_(lambda),
      schedule_(schedule),
      rho_(rho) {
  if (basis.num_states() != chain.num_states())
    throw DimensionMismatch("basis rows must match chain states");
  if (!(rho > 0.0)) throw Error("rho must be positive");
  if (alpha * lambda >= 1.0) throw Error("alpha*lambda must be below 1");
}

RunnerState LspeRunner::initial_state(const Vector& r0) const {
  const int M = basis_.num_features();
  if (r0.size() != M) throw DimensionMismatch("r0 length must equal M");
  RunnerState s;
  s.n = -1;
  s.r = r0;
  s.z = Vector::Zero(M);
  s.A_bar = Matrix::Zero(M, M);
  s.b_bar = Vector::Zero(M);
  s.G = rho_ * Matrix::Identity(M, M);
  s.G_inv = (1.0 / rho_) * Matrix::Identity(M, M);
  s.rho = rho_;
  return s;
}

void LspeRunner::step(RunnerState& state, int x_m, int x_m1) const {
  step(state, x_m, x_m1, schedule_.a(state.n + 1));
}

void LspeRunner::step(RunnerState& state, int x_m, int x_m1, double a_m) const {
  const std::int64_t m = state.n + 1;
  const double weight = 1.0 / static_cast<double>(m + 1);
  const Vector phi_m = basis_.row(x_m);
  const Vector phi_m1 = basis_.row(x_m1);

  if (m == 0)
    state.z = phi_m;
  else
    state.z = (alpha_ * lambda_) * state.z + phi_m;

  state.A_bar += weight * (state.z * (alpha_ * phi_m1 - phi_m).transpose() -
                           state.A_bar);
  state.b_bar += weight * (state.z * cost_(x_m) - state.b_bar);

  // Rank-one inverse update for G <- G + phi phi^T (G symmetric PD).
  const Vector w = state.G_inv * phi_m;
  const double denom = 1.0 + phi_m.dot(w);
  if (denom <= 1e-14)
    throw NumericalBreakdown("rank-one update denominator collapsed");
  state.G_inv -= (w * w.transpose()) / denom;
  state.G += phi_m * phi_m.transpose();

  // r_{m+1} = r_m + a(m) B_m^{-1} (A_m r_m + b_m), with B_m^{-1} = (m+1) G_inv.
  state.r += a_m * static_cast<double>(m + 1) *
             (state.G_inv * (state.A_bar * state.r + state.b_bar));
  state.n = m;
}

Diagnostics diagnostics(const RunnerState& state, const ExactModel& model,
                        const HMetric& metric) {
  if (state.n < 0) throw Error("diagnostics need at least one step");
  const double scale = static_cast<double>(state.n + 1);
  const Matrix Bn_inv = scale * state.G_inv;
  const Matrix B_inv = model.B.llt().solve(
      Matrix::Identity(model.B.rows(), model.B.cols()));

  Diagnostics d;
  d.delta = (Bn_inv - B_inv) * state.A_bar + B_inv * (state.A_bar - model.A);
  d.eps1 = Bn_inv * (state.A_bar - model.A) + (Bn_inv - B_inv) * model.A;
  d.eps2 = Bn_inv * (state.b_bar - model.b) + (Bn_inv - B_inv) * model.b;
  d.delta_H = metric.opnorm(d.delta);
  d.eps1_H = metric.opnorm(d.eps1);
  d.eps2_H = metric.norm(d.eps2);
  return d;
}

TrajectoryRun run_trajectory(const MarkovRewardChain& chain,
                             const FeatureBasis& basis, const ExactModel& model,
                             const StepSchedule& schedule, double rho,
                             const Vector& r0, int x0, std::int64_t horizon,
                             std::uint64_t seed, bool with_diagnostics) {
  if (horizon < 1) throw Error("horizon must be >= 1");
  LspeRunner runner(chain, basis, model.alpha, model.lambda, schedule, rho);
  HMetric metric(model.H);

  // Diagnostics at index n need the averages of index n, hence one extra
  // transition beyond those that produce r_horizon.
  const std::int64_t last_step = with_diagnostics ? horizon : horizon - 1;
  Trajectory path = sample_path(chain, x0, last_step, seed);

  TrajectoryRun run;
  run.seed = seed;
  run.records.resize(static_cast<size_t>(horizon) + 1);
  RunnerState state = runner.initial_state(r0);

  for (std::int64_t m = 0; m <= last_step; ++m) {
    if (m <= horizon) {
      run.records[static_cast<size_t>(m)].n = m;
      run.records[static_cast<size_t>(m)].err_H =
          metric.norm(state.r - model.r_star);
    }
    runner.step(state, path.states[static_cast<size_t>(m)],
                path.states[static_cast<size_t>(m) + 1]);
    if (with_diagnostics) {
      const Diagnostics d = diagnostics(state, model, metric);
      auto& rec = run.records[static_cast<size_t>(m)];
      rec.delta_H = d.delta_H;
      rec.eps1_H = d.eps1_H;
      rec.eps2_H = d.eps2_H;
    }
  }
  if (!with_diagnostics) {
    run.records.back().n = horizon;
    run.records.back().err_H = metric.norm(state.r - model.r_star);
  }
  run.final_state = std::move(state);
  return run;
}

std::vector<ReferenceRecord> run_reference(const ExactModel& model,
                                           const StepSchedule& schedule,
                                           const Vector& y0, std::int64_t n0,
                                           std::int64_t horizon) {
  if (horizon < n0) throw Error("horizon must be >= n0");
  HMetric metric(model.H);
  Eigen::LLT<Matrix> lltB(model.B);

  std::vector<ReferenceRecord> out;
  out.reserve(static_cast<size_t>(horizon - n0) + 1);
  Vector y = y0;
  for (std::int64_t n = n0; n <= horizon; ++n) {
    out.push_back({n, metric.norm(y - model.r_star), metric.norm(y)});
    if (n < horizon)
      y += schedule.a(n) * lltB.solve(model.A * y + model.b);
  }
  return out;
}

}  // namespace lspe
