#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lspe/runner.hpp"

namespace lspe {

enum class Provenance { closed_form, estimated };

/// Result of maximizing an (n+1)-scaled bias curve over n and over initial
/// distributions. `certified` is false when the curve was still rising at the
/// end of the scanned range, i.e. the reported maximum is not a plateau.
struct EstimatedConstant {
  double value = 0.0;
  std::int64_t argmax_n = 0;
  int argmax_initial = -1;  // -1 = stationary start, otherwise point mass
  bool certified = true;
};

/// Bounded-difference coefficients, Paulin constants, and model norms that
/// have explicit formulas.
struct DerivedConstants {
  double d1 = 0.0, d2 = 0.0, d3 = 0.0;
  double gamma1 = 0.0, gamma2 = 0.0, gamma3 = 0.0;
  double C5 = 0.0;
  double m1 = 0.0;  // max_i ||phi(i)||_H
};

DerivedConstants derived_constants(const ExactModel& model,
                                   const FeatureBasis& basis,
                                   const MarkovRewardChain& chain,
                                   double tau_min_value);

/// Exact path-expectation of the running averages at index n, by forward
/// recursion on the discounted feature mass (no path enumeration).
struct ExactMoments {
  Vector E_b;
  Matrix E_A;
  Matrix E_B;
};

ExactMoments exact_expectations(const MarkovRewardChain& chain,
                                const FeatureBasis& basis, const Vector& initial,
                                double alpha, double lambda, double rho,
                                std::int64_t n,
                                std::int64_t oracle_cap = 5000);

/// Externally cited constants, estimated numerically:
/// C1..C3 from the exact-expectation bias curves (worst case over point-mass
/// and stationary initial distributions), C' from an observed ensemble sup of
/// ||B_n^{-1}||_H inflated by 1.25, and C4 = C' ||B^{-1}||_H C3.
struct CitedConstants {
  EstimatedConstant C1, C2, C3;
  double C_prime = 0.0;
  double C_prime_raw = 0.0;
  double C4 = 0.0;
};

CitedConstants estimate_cited_constants(const MarkovRewardChain& chain,
                                        const FeatureBasis& basis,
                                        const ExactModel& model, double rho,
                                        std::int64_t N_max, int ensemble,
                                        std::uint64_t seed);

/// xi_n(eps) = eps (n-1)^{1/2+theta-mu2} + (n-1)^{-mu2}; needs n >= 2.
double xi_of_n(const StepSchedule& schedule, std::int64_t n, double eps);

/// b_m(n) = sum_{k=m}^{n} a(k); zero when n < m.
double stepsize_sum(const StepSchedule& schedule, std::int64_t m, std::int64_t n);

/// Numerically certified suprema behind the weighted-sum bounds:
///   sum_{k=n0}^m chi(m,k+1) a(k) / (k+1)^{1/2-theta} <= K3_star m^{1/2+theta-mu2}
///   sum_{k=n0}^m chi(m,k+1) a(k) / (k+1)          <= K3_dstar m^{-mu2}
/// maximized over m in [n0, m_sup] with a flat-tail check.
struct K3Constants {
  double K3_star = 0.0;
  double K3_dstar = 0.0;
  double K3 = 0.0;  // K3_prime * max(K3_star, K3_dstar)
  std::int64_t argmax_star = 0;
  std::int64_t argmax_dstar = 0;
  bool flat_tail = true;
};

K3Constants k3_constants(const StepSchedule& schedule, std::int64_t n0,
                         double K3_prime, std::int64_t m_sup = 100000);

/// Every named constant of the concentration bound, with provenance.
struct ConstantLedger {
  // Paulin machinery
  double tau_min = 0.0;
  // model norms and contraction data
  double beta = 0.0;
  double m1 = 0.0;
  double B_inv_H = 0.0;
  double A_H = 0.0;
  double b_H = 0.0;
  double B_inv_b_H = 0.0;
  double lambda_max_H = 0.0;
  double lambda_min_H = 0.0;
  // bounded differences
  double d1 = 0.0, d2 = 0.0, d3 = 0.0;
  double gamma1 = 0.0, gamma2 = 0.0, gamma3 = 0.0;
  // cited constants (estimated)
  EstimatedConstant C1, C2, C3;
  double C_prime = 0.0, C_prime_raw = 0.0;
  double C4 = 0.0, C5 = 0.0;
  // K family
  double K1 = 0.0, K2 = 0.0, K4 = 0.0, K5 = 0.0, K6 = 0.0, K7 = 0.0, K8 = 0.0;
  double K3_prime = 0.0;
  double K3_star = 0.0, K3_dstar = 0.0, K3 = 0.0;
  std::int64_t k3_argmax_star = 0, k3_argmax_dstar = 0;
  bool k3_flat_tail = true;
  // anchors
  std::int64_t n0 = 0;
  std::int64_t k3_m_sup = 0;
  StepSchedule schedule;

  std::string to_json() const;
};

struct LedgerOptions {
  int t_max = 200;
  std::int64_t estimate_n_max = 2000;
  int estimate_ensemble = 200;
  std::int64_t k3_m_sup = 100000;
  std::uint64_t seed = 0x1ed9e5;
  std::int64_t n0 = -1;      // -1: smallest n0 with K1/(n0+1) <= (1-beta-delta)/2
  double delta = -1.0;       // -1: (1-beta)/4, used only for the n0 sweep
};

/// Assembles the full ledger: mixing profile and tau_min, derived constants,
/// estimated cited constants, the K family, and the schedule-dependent
/// suprema anchored at the resolved n0.
ConstantLedger build_ledger(const MarkovRewardChain& chain,
                            const StationaryInfo& stat, const FeatureBasis& basis,
                            const ExactModel& model, const StepSchedule& schedule,
                            double rho, const LedgerOptions& options);

/// K1, K2, K4..K8 and K3' by direct formula evaluation; requires the derived
/// and cited constants plus the model norms already present in the ledger.
void k_constants(ConstantLedger& ledger);

/// Paulin tail 2 exp(-2 t^2 / (||c||_2^2 tau_min)); not clamped.
double paulin_tail(double c_norm_sq, double tau_min_value, double t);

enum class LemmaSelector { b, A, B, Binv, delta, eps_pair };

/// Deviation threshold and failure probability of one per-quantity tail
/// statement. For eps_pair, `deviation` is the epsilon parameter and both
/// thresholds are returned (threshold for eps1, threshold2 for eps2); the
/// failure probability covers the pair jointly.
struct LemmaTail {
  double threshold = 0.0;
  double threshold2 = 0.0;
  double failure_prob = 0.0;
};

LemmaTail lemma_tail_bounds(const ConstantLedger& ledger, int M, std::int64_t n,
                            double deviation, LemmaSelector which);

struct TheoremInputs {
  std::int64_t n0 = 0;
  std::int64_t n = 0;
  double delta = 0.0;
  double epsilon = 0.0;
  int M = 0;
  const ConstantLedger* ledger = nullptr;
  double r_n0_norm_H = 0.0;
  double r_n0_err_H = 0.0;
};

struct TheoremEvaluation {
  double rhs = 0.0;
  double failure_per_n_raw = 0.0;
  double failure_uniform_raw = 0.0;
  double success_prob_per_n = 0.0;    // floored at 0
  double success_prob_uniform = 0.0;  // floored at 0
  bool vacuous_per_n = false;
  bool vacuous_uniform = false;
  double tail_geometric = 0.0;   // remainder bound for the first series
  double tail_stretched = 0.0;   // integral-comparison bound for the second
};

/// The two-term bound and both probability displays. The infinite series is
/// summed until increments are machine-negligible; the geometric remainder is
/// added in closed form and the stretched-exponential remainder by integral
/// comparison (upper incomplete gamma).
TheoremEvaluation theorem_evaluate(const TheoremInputs& inputs);

/// Raw failure mass of the uniform display (independent of the iterate).
struct UniformFailure {
  double raw = 0.0;
  double tail_geometric = 0.0;
  double tail_stretched = 0.0;
  bool vacuous = false;
};

UniformFailure theorem_uniform_failure(const ConstantLedger& ledger, int M,
                                       std::int64_t n0, double delta,
                                       double epsilon);

}  // namespace lspe
