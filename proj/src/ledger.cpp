#include "lspe/ledger.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>

#include "json.hpp"
#include "lspe/rng.hpp"

namespace lspe {

namespace {

constexpr double kPlateauTie = 1e-12;  // relative tie when tracking argmax

// Tracks max over n of a scaled bias curve, remembering where it peaked and
// whether it was still setting records near the end of the range.
struct CurveMax {
  double value = 0.0;
  std::int64_t argmax_n = 0;
  int argmax_initial = -1;
  std::int64_t last_record_n = 0;

  void offer(double v, std::int64_t n, int initial) {
    if (v > value * (1.0 + kPlateauTie)) {
      value = v;
      argmax_n = n;
      argmax_initial = initial;
      last_record_n = n;
    }
  }
};

}  // namespace

DerivedConstants derived_constants(const ExactModel& model,
                                   const FeatureBasis& basis,
                                   const MarkovRewardChain& chain,
                                   double tau_min_value) {
  if (!(tau_min_value > 0.0)) throw Error("tau_min must be positive");
  const double al = model.alpha * model.lambda;
  const double phi_max = basis.phi_max();
  const double k_max = chain.cost_max();
  HMetric metric(model.H);

  DerivedConstants out;
  out.d1 = 2.0 * phi_max * k_max * (1.0 + 2.0 * al / (1.0 - al));
  out.d2 = 2.0 * phi_max * phi_max;
  out.d3 = 2.0 * phi_max * phi_max * (1.0 + 2.0 * (1.0 + al) / (1.0 - al));
  out.gamma1 = metric.lambda_max() * out.d1 * out.d1 * tau_min_value / 2.0;
  out.gamma2 = metric.lambda_max() * out.d3 * out.d3 * tau_min_value /
               (2.0 * metric.lambda_min());
  out.gamma3 = metric.lambda_max() * out.d2 * out.d2 * tau_min_value /
               (2.0 * metric.lambda_min());
  double m1 = 0.0;
  for (int i = 0; i < basis.num_states(); ++i)
    m1 = std::max(m1, metric.norm(basis.row(i)));
  out.m1 = m1;
  out.C5 = m1 * m1 * (1.0 + model.alpha) / (1.0 - al);
  return out;
}

ExactMoments exact_expectations(const MarkovRewardChain& chain,
                                const FeatureBasis& basis, const Vector& initial,
                                double alpha, double lambda, double rho,
                                std::int64_t n, std::int64_t oracle_cap) {
  if (n < 0) throw Error("exact_expectations: n must be >= 0");
  if (n > oracle_cap)
    throw HorizonTooLarge("exact_expectations: n exceeds the oracle cap");
  if (initial.size() != chain.transition.rows())
    throw DimensionMismatch("initial length must match chain");

  const auto M = basis.phi.cols();
  const double al = alpha * lambda;
  const Matrix PPhi = chain.transition * basis.phi;  // row j = E[phi(X')|X=j]

  // W_m is s x M with row j = E[z_m 1{X_m = j}]^T.
  Vector mu = initial;
  Matrix W = mu.asDiagonal() * basis.phi;

  Vector S_b = Vector::Zero(M);
  Matrix S_A = Matrix::Zero(M, M);
  Matrix S_B = Matrix::Zero(M, M);
  for (std::int64_t m = 0;; ++m) {
    S_b += W.transpose() * chain.cost;
    S_A += W.transpose() * (alpha * PPhi - basis.phi);
    S_B += basis.phi.transpose() * mu.asDiagonal() * basis.phi;
    if (m == n) break;
    mu = chain.transition.transpose() * mu;
    W = al * (chain.transition.transpose() * W) + mu.asDiagonal() * basis.phi;
  }
  const double scale = 1.0 / static_cast<double>(n + 1);
  ExactMoments out;
  out.E_b = scale * S_b;
  out.E_A = scale * S_A;
  out.E_B = scale * (rho * Matrix::Identity(M, M) + S_B);
  return out;
}

CitedConstants estimate_cited_constants(const MarkovRewardChain& chain,
                                        const FeatureBasis& basis,
                                        const ExactModel& model, double rho,
                                        std::int64_t N_max, int ensemble,
                                        std::uint64_t seed) {
  if (ensemble < 100)
    throw Error("estimate_cited_constants: ensemble must be >= 100");
  if (N_max < 10) throw Error("estimate_cited_constants: N_max too small");

  const auto M = basis.phi.cols();
  const int s = chain.num_states();
  const double al = model.alpha * model.lambda;
  const Matrix PPhi = chain.transition * basis.phi;
  HMetric metric(model.H);
  StationaryInfo stat = stationary_distribution(chain);

  CurveMax c1_max, c2_max, c3_max;
  // Worst initial distribution over each point mass and the stationary one.
  for (int init_id = -1; init_id < s; ++init_id) {
    Vector mu = (init_id < 0) ? stat.pi
                              : Vector(Vector::Unit(s, init_id));
    Matrix W = mu.asDiagonal() * basis.phi;
    Vector S_b = Vector::Zero(M);
    Matrix S_A = Matrix::Zero(M, M);
    Matrix S_B = Matrix::Zero(M, M);
    for (std::int64_t m = 0; m <= N_max; ++m) {
      S_b += W.transpose() * chain.cost;
      S_A += W.transpose() * (model.alpha * PPhi - basis.phi);
      S_B += basis.phi.transpose() * mu.asDiagonal() * basis.phi;
      const double scale = 1.0 / static_cast<double>(m + 1);
      const Vector E_b = scale * S_b;
      const Matrix E_A = scale * S_A;
      const Matrix E_B =
          scale * (rho * Matrix::Identity(M, M) + S_B);
      const double w = static_cast<double>(m + 1);
      c1_max.offer(w * metric.norm(E_b - model.b), m, init_id);
      c2_max.offer(w * metric.opnorm(E_A - model.A), m, init_id);
      c3_max.offer(w * metric.opnorm(E_B - model.B), m, init_id);
      if (m < N_max) {
        mu = chain.transition.transpose() * mu;
        W = al * (chain.transition.transpose() * W) + mu.asDiagonal() * basis.phi;
      }
    }
  }

  // Observed sup of ||B_n^{-1}||_H over a seeded ensemble; the feature
  // accumulation does not depend on the stepsize.
  double sup_binv = 0.0;
  for (int i = 0; i < ensemble; ++i) {
    Trajectory path =
        sample_path(chain, i % s, N_max, derive_seed(seed, static_cast<std::uint64_t>(i)));
    Matrix G_inv = (1.0 / rho) * Matrix::Identity(M, M);
    for (std::int64_t m = 0; m <= N_max; ++m) {
      const Vector phi_m = basis.row(path.states[static_cast<size_t>(m)]);
      const Vector w = G_inv * phi_m;
      const double denom = 1.0 + phi_m.dot(w);
      G_inv -= (w * w.transpose()) / denom;
      sup_binv = std::max(
          sup_binv, static_cast<double>(m + 1) * metric.opnorm(G_inv));
    }
  }

  const double B_inv_H = metric.opnorm(
      model.B.llt().solve(Matrix::Identity(M, M)));

  auto finish = [&](const CurveMax& cm) {
    EstimatedConstant e;
    e.value = cm.value;
    e.argmax_n = cm.argmax_n;
    e.argmax_initial = cm.argmax_initial;
    e.certified = cm.last_record_n <
                  N_max - std::max<std::int64_t>(1, N_max / 50);
    return e;
  };

  CitedConstants out;
  out.C1 = finish(c1_max);
  out.C2 = finish(c2_max);
  out.C3 = finish(c3_max);
  out.C_prime_raw = sup_binv;
  out.C_prime = 1.25 * sup_binv;
  out.C4 = out.C_prime * B_inv_H * out.C3.value;
  return out;
}

double xi_of_n(const StepSchedule& schedule, std::int64_t n, double eps) {
  if (n < 2) throw Error("xi_of_n: n must be >= 2");
  const double base = static_cast<double>(n - 1);
  return eps * std::pow(base, 0.5 + schedule.theta - schedule.mu2) +
         std::pow(base, -schedule.mu2);
}

double stepsize_sum(const StepSchedule& schedule, std::int64_t m,
                    std::int64_t n) {
  double sum = 0.0;
  for (std::int64_t k = m; k <= n; ++k) sum += schedule.a(k);
  return sum;
}

K3Constants k3_constants(const StepSchedule& schedule, std::int64_t n0,
                         double K3_prime, std::int64_t m_sup) {
  if (n0 < 2) throw Error("k3_constants: n0 must be >= 2");
  if (m_sup <= n0 + 10) throw Error("k3_constants: m_sup too small");
  if (!(K3_prime > 0.0)) throw MissingConstant("K3_prime must be positive");

  // S(m) = (1 - a(m)) S(m-1) + a(m) g(m) reproduces
  // sum_{k=n0}^m chi(m,k+1) a(k) g(k) incrementally.
  double S1 = 0.0, S2 = 0.0;
  K3Constants out;
  const std::int64_t window = m_sup - std::max<std::int64_t>(1, m_sup / 20);
  double star_window_min = std::numeric_limits<double>::infinity();
  double star_window_max = 0.0;
  double dstar_window_min = std::numeric_limits<double>::infinity();
  double dstar_window_max = 0.0;
  for (std::int64_t m = n0; m <= m_sup; ++m) {
    const double a_m = schedule.a(m);
    const double md = static_cast<double>(m);
    const double g1 = std::pow(static_cast<double>(m + 1),
                               -(0.5 - schedule.theta));
    const double g2 = 1.0 / static_cast<double>(m + 1);
    if (m == n0) {
      S1 = a_m * g1;
      S2 = a_m * g2;
    } else {
      S1 = (1.0 - a_m) * S1 + a_m * g1;
      S2 = (1.0 - a_m) * S2 + a_m * g2;
    }
    const double ratio1 =
        S1 / std::pow(md, 0.5 + schedule.theta - schedule.mu2);
    const double ratio2 = S2 * std::pow(md, schedule.mu2);
    if (ratio1 > out.K3_star) {
      out.K3_star = ratio1;
      out.argmax_star = m;
    }
    if (ratio2 > out.K3_dstar) {
      out.K3_dstar = ratio2;
      out.argmax_dstar = m;
    }
    if (m >= window) {
      star_window_min = std::min(star_window_min, ratio1);
      star_window_max = std::max(star_window_max, ratio1);
      dstar_window_min = std::min(dstar_window_min, ratio2);
      dstar_window_max = std::max(dstar_window_max, ratio2);
    }
  }
  auto tail_ok = [&](double max_global, std::int64_t argmax, double wmin,
                     double wmax) {
    if (argmax < window) return true;  // interior argmax
    return (wmax - wmin) <= 1e-3 * max_global;
  };
  out.flat_tail = tail_ok(out.K3_star, out.argmax_star, star_window_min,
                          star_window_max) &&
                  tail_ok(out.K3_dstar, out.argmax_dstar, dstar_window_min,
                          dstar_window_max);
  out.K3 = K3_prime * std::max(out.K3_star, out.K3_dstar);
  return out;
}

void k_constants(ConstantLedger& lg) {
  // Zero-cost chains legitimately zero out the cost-dependent entries, so
  // require finite non-negative rather than strictly positive.
  for (double v : {lg.C1.value, lg.C2.value, lg.C3.value, lg.C4, lg.C5,
                   lg.C_prime, lg.gamma1, lg.gamma2, lg.gamma3, lg.B_inv_H,
                   lg.A_H, lg.b_H})
    if (!(v >= 0.0) || !std::isfinite(v))
      throw MissingConstant("k_constants: inputs incomplete");
  for (double v : {lg.C5, lg.C_prime, lg.gamma2, lg.gamma3, lg.B_inv_H})
    if (!(v > 0.0)) throw MissingConstant("k_constants: inputs incomplete");

  const double binv2 = lg.B_inv_H * lg.B_inv_H;
  const double cp2 = lg.C_prime * lg.C_prime;
  lg.K1 = lg.C5 * lg.C4 + lg.B_inv_H * lg.C2.value;
  lg.K2 = std::max(4.0 * lg.C5 * lg.C5 * cp2 * binv2 * lg.gamma3,
                   4.0 * binv2 * lg.gamma2);
  lg.K5 = lg.C2.value * lg.C_prime + lg.C4 * lg.A_H;
  lg.K6 = lg.C1.value * lg.C_prime + lg.C4 * lg.b_H;
  lg.K7 = std::max(4.0 * cp2 * lg.gamma2,
                   4.0 * cp2 * binv2 * lg.gamma3 * lg.A_H * lg.A_H);
  lg.K8 = std::max(4.0 * cp2 * lg.gamma1,
                   4.0 * cp2 * binv2 * lg.gamma3 * lg.b_H * lg.b_H);
  lg.K4 = std::max(lg.K7, lg.K8);
  const double pull = lg.B_inv_b_H / (1.0 - lg.beta);
  lg.K3_prime =
      std::max({2.0, 2.0 * pull, lg.K5, lg.K5 * pull + lg.K6});
}

ConstantLedger build_ledger(const MarkovRewardChain& chain,
                            const StationaryInfo& stat, const FeatureBasis& basis,
                            const ExactModel& model, const StepSchedule& schedule,
                            double rho, const LedgerOptions& options) {
  ConstantLedger lg;
  lg.schedule = schedule;
  lg.beta = model.beta;

  MixingProfile profile = mixing_profile(chain, stat, options.t_max);
  lg.tau_min = tau_min(profile);

  HMetric metric(model.H);
  lg.lambda_max_H = metric.lambda_max();
  lg.lambda_min_H = metric.lambda_min();
  const auto M = model.A.rows();
  const Matrix B_inv = model.B.llt().solve(Matrix::Identity(M, M));
  lg.B_inv_H = metric.opnorm(B_inv);
  lg.A_H = metric.opnorm(model.A);
  lg.b_H = metric.norm(model.b);
  lg.B_inv_b_H = metric.norm(B_inv * model.b);

  const DerivedConstants dc = derived_constants(model, basis, chain, lg.tau_min);
  lg.d1 = dc.d1;
  lg.d2 = dc.d2;
  lg.d3 = dc.d3;
  lg.gamma1 = dc.gamma1;
  lg.gamma2 = dc.gamma2;
  lg.gamma3 = dc.gamma3;
  lg.C5 = dc.C5;
  lg.m1 = dc.m1;

  const CitedConstants cc = estimate_cited_constants(
      chain, basis, model, rho, options.estimate_n_max,
      options.estimate_ensemble, options.seed);
  lg.C1 = cc.C1;
  lg.C2 = cc.C2;
  lg.C3 = cc.C3;
  lg.C_prime = cc.C_prime;
  lg.C_prime_raw = cc.C_prime_raw;
  lg.C4 = cc.C4;

  k_constants(lg);

  // Resolve n0: requested, or the smallest n0 >= 2 for which K1/(n0+1) eats
  // at most three quarters of the contraction gap left after delta.
  double delta = options.delta > 0.0 ? options.delta : (1.0 - lg.beta) / 4.0;
  if (options.n0 >= 2) {
    lg.n0 = options.n0;
  } else {
    const double slack = 0.75 * (1.0 - lg.beta - delta);
    if (!(slack > 0.0))
      throw ConditionViolated("no n0 can satisfy beta + delta < 1");
    lg.n0 = std::max<std::int64_t>(
        2, static_cast<std::int64_t>(std::ceil(lg.K1 / slack)) - 1);
  }

  lg.k3_m_sup = options.k3_m_sup;
  const K3Constants k3 =
      k3_constants(schedule, lg.n0, lg.K3_prime, options.k3_m_sup);
  lg.K3_star = k3.K3_star;
  lg.K3_dstar = k3.K3_dstar;
  lg.K3 = k3.K3;
  lg.k3_argmax_star = k3.argmax_star;
  lg.k3_argmax_dstar = k3.argmax_dstar;
  lg.k3_flat_tail = k3.flat_tail;
  return lg;
}

double paulin_tail(double c_norm_sq, double tau_min_value, double t) {
  if (!(c_norm_sq > 0.0)) throw Error("paulin_tail: c_norm_sq must be > 0");
  if (!(tau_min_value > 0.0)) throw Error("paulin_tail: tau_min must be > 0");
  if (t < 0.0) throw Error("paulin_tail: t must be >= 0");
  return 2.0 * std::exp(-2.0 * t * t / (c_norm_sq * tau_min_value));
}

namespace {

// count * exp(-x / den) with the degenerate den = 0 read as the limit:
// deviation-free quantities never deviate.
double tail_mass(double count, double x, double den) {
  if (den > 0.0) return count * std::exp(-x / den);
  return x > 0.0 ? 0.0 : count;
}

}  // namespace

LemmaTail lemma_tail_bounds(const ConstantLedger& lg, int M, std::int64_t n,
                            double deviation, LemmaSelector which) {
  if (M < 1 || n < 0) throw Error("lemma_tail_bounds: bad M or n");
  const double Md = static_cast<double>(M);
  const double np1 = static_cast<double>(n + 1);
  const double a = deviation;
  LemmaTail out;
  switch (which) {
    case LemmaSelector::b:
      out.threshold = a + lg.C1.value / np1;
      out.failure_prob = tail_mass(2.0 * Md, np1 * a * a, Md * lg.gamma1);
      break;
    case LemmaSelector::A:
      out.threshold = a + lg.C2.value / np1;
      out.failure_prob =
          tail_mass(2.0 * Md * Md, np1 * a * a, Md * Md * lg.gamma2);
      break;
    case LemmaSelector::B:
      out.threshold = a + lg.C3.value / np1;
      out.failure_prob =
          tail_mass(2.0 * Md * Md, np1 * a * a, Md * Md * lg.gamma3);
      break;
    case LemmaSelector::Binv:
      out.threshold = a + lg.C4 / np1;
      out.failure_prob =
          tail_mass(2.0 * Md * Md, np1 * a * a,
                    Md * Md * lg.C_prime * lg.C_prime * lg.B_inv_H *
                        lg.B_inv_H * lg.gamma3);
      break;
    case LemmaSelector::delta:
      out.threshold = a + lg.K1 / np1;
      out.failure_prob =
          tail_mass(4.0 * Md * Md, np1 * a * a, Md * Md * lg.K2);
      break;
    case LemmaSelector::eps_pair: {
      const double damp = std::pow(np1, 0.5 - lg.schedule.theta);
      out.threshold = a / damp + lg.K5 / np1;
      out.threshold2 = a / damp + lg.K6 / np1;
      out.failure_prob =
          tail_mass(8.0 * Md * Md,
                    std::pow(np1, 2.0 * lg.schedule.theta) * a * a,
                    Md * Md * lg.K4);
      break;
    }
    default:
      throw UnknownSelector("lemma_tail_bounds: unknown selector");
  }
  return out;
}

TheoremEvaluation theorem_evaluate(const TheoremInputs& in) {
  if (in.ledger == nullptr) throw MissingConstant("theorem_evaluate: no ledger");
  const ConstantLedger& lg = *in.ledger;
  if (in.n0 < 2 || in.n < in.n0)
    throw Error("theorem_evaluate: need n >= n0 >= 2");
  if (!(in.delta > 0.0 && in.delta < 1.0))
    throw Error("theorem_evaluate: delta must be in (0,1)");
  const double margin =
      lg.beta + in.delta + lg.K1 / static_cast<double>(in.n0 + 1);
  if (!(margin < 1.0))
    throw ConditionViolated("beta + delta + K1/(n0+1) must be below 1");

  const double Md = static_cast<double>(in.M);
  TheoremEvaluation out;
  const double b_sum = stepsize_sum(lg.schedule, in.n0, in.n - 1);
  out.rhs = std::exp(-(1.0 - lg.beta) * b_sum) * in.r_n0_err_H +
            lg.K3 * (in.r_n0_norm_H + 1.0) *
                xi_of_n(lg.schedule, in.n, in.epsilon) / (1.0 - margin);

  const double c1 = in.delta * in.delta / (Md * Md * lg.K2);
  const double c2 = in.epsilon * in.epsilon / (Md * Md * lg.K4);
  const double two_theta = 2.0 * lg.schedule.theta;

  double finite_sum = 0.0;
  for (std::int64_t k = in.n0; k <= in.n - 1; ++k) {
    const double kp1 = static_cast<double>(k + 1);
    finite_sum += std::exp(-kp1 * c1) + std::exp(-std::pow(kp1, two_theta) * c2);
  }
  out.failure_per_n_raw = 8.0 * Md * Md * finite_sum;
  out.success_prob_per_n = std::max(0.0, 1.0 - out.failure_per_n_raw);
  out.vacuous_per_n = out.failure_per_n_raw >= 1.0;

  const UniformFailure uf =
      theorem_uniform_failure(lg, in.M, in.n0, in.delta, in.epsilon);
  out.tail_geometric = uf.tail_geometric;
  out.tail_stretched = uf.tail_stretched;
  out.failure_uniform_raw = uf.raw;
  out.success_prob_uniform = std::max(0.0, 1.0 - uf.raw);
  out.vacuous_uniform = uf.vacuous;
  return out;
}

UniformFailure theorem_uniform_failure(const ConstantLedger& lg, int M,
                                       std::int64_t n0, double delta,
                                       double epsilon) {
  const double Md = static_cast<double>(M);
  const double c1 = delta * delta / (Md * Md * lg.K2);
  const double c2 = epsilon * epsilon / (Md * Md * lg.K4);
  const double two_theta = 2.0 * lg.schedule.theta;

  // Sum explicitly until increments are negligible, then close with a
  // geometric remainder (first series) and an integral-comparison remainder
  // (second series).
  double inf_sum = 0.0;
  std::int64_t K = n0 - 1;
  const std::int64_t cap = n0 + 2000000;
  for (std::int64_t k = n0; k <= cap; ++k) {
    const double kp1 = static_cast<double>(k + 1);
    const double term =
        std::exp(-kp1 * c1) + std::exp(-std::pow(kp1, two_theta) * c2);
    inf_sum += term;
    K = k;
    if (term < 1e-18 * std::max(1.0, inf_sum)) break;
    if (8.0 * Md * Md * inf_sum >= 2.0) break;  // deep in vacuous territory
  }
  const double Kd = static_cast<double>(K);
  UniformFailure out;
  // Remainder of sum_{k>K} exp(-(k+1) c1): exact geometric tail.
  out.tail_geometric =
      c1 > 0.0 ? std::exp(-(Kd + 2.0) * c1) / (1.0 - std::exp(-c1))
               : std::numeric_limits<double>::infinity();
  // Remainder of sum_{k>K} exp(-(k+1)^{2 theta} c2), bounded by the integral
  // from K to infinity: Gamma(1/(2 theta), c2 (K+1)^{2 theta}) /
  // (2 theta c2^{1/(2 theta)}).
  const double z = c2 * std::pow(Kd + 1.0, two_theta);
  double tail2 = std::numeric_limits<double>::infinity();
  if (c2 > 0.0 && z > 0.0) {
    const double a_gamma = 1.0 / two_theta;
    double upper = boost::math::tgamma(a_gamma, z);
    tail2 = upper / (two_theta * std::pow(c2, a_gamma));
  }
  out.tail_stretched = tail2;

  out.raw = 8.0 * Md * Md * (inf_sum + out.tail_geometric + out.tail_stretched);
  if (!std::isfinite(out.raw))
    out.raw = std::numeric_limits<double>::infinity();
  out.vacuous = !(out.raw < 1.0);
  return out;
}

std::string ConstantLedger::to_json() const {
  nlohmann::ordered_json j;
  auto entry = [](double value, Provenance prov, const std::string& formula) {
    nlohmann::ordered_json e;
    e["value"] = value;
    e["provenance"] =
        prov == Provenance::closed_form ? "closed_form" : "estimated";
    e["formula_id"] = formula;
    return e;
  };
  const auto cf = Provenance::closed_form;
  const auto est = Provenance::estimated;

  j["tau_min"] = entry(tau_min, cf, "inf_eps tau(eps)((2-eps)/(1-eps))^2");
  j["beta"] = entry(beta, cf, "sqrt(1 - 1/lambda_max(H))");
  j["m1"] = entry(m1, cf, "max_i |phi(i)|_H");
  j["norm_B_inv_H"] = entry(B_inv_H, cf, "|B^-1|_H");
  j["norm_A_H"] = entry(A_H, cf, "|A|_H");
  j["norm_b_H"] = entry(b_H, cf, "|b|_H");
  j["norm_B_inv_b_H"] = entry(B_inv_b_H, cf, "|B^-1 b|_H");
  j["lambda_max_H"] = entry(lambda_max_H, cf, "lambda_max(H)");
  j["lambda_min_H"] = entry(lambda_min_H, cf, "lambda_min(H)");
  j["d1"] = entry(d1, cf, "2 Phi_max k_max (1 + 2 al/(1-al))");
  j["d2"] = entry(d2, cf, "2 Phi_max^2");
  j["d3"] = entry(d3, cf, "2 Phi_max^2 (1 + 2(1+al)/(1-al))");
  j["gamma1"] = entry(gamma1, cf, "lambda_max(H) d1^2 tau_min / 2");
  j["gamma2"] =
      entry(gamma2, cf, "lambda_max(H) d3^2 tau_min / (2 lambda_min(H))");
  j["gamma3"] =
      entry(gamma3, cf, "lambda_max(H) d2^2 tau_min / (2 lambda_min(H))");
  j["C1"] = entry(C1.value, est, "max_n (n+1)|E b_n - b|_H");
  j["C2"] = entry(C2.value, est, "max_n (n+1)|E A_n - A|_H");
  j["C3"] = entry(C3.value, est, "max_n (n+1)|E B_n - B|_H");
  j["C4"] = entry(C4, est, "C' |B^-1|_H C3");
  j["C5"] = entry(C5, cf, "m1^2 (1+alpha)/(1-al)");
  j["C_prime"] = entry(C_prime, est, "1.25 sup_ensemble |B_n^-1|_H");
  j["K1"] = entry(K1, cf, "C5 C4 + |B^-1|_H C2");
  j["K2"] =
      entry(K2, cf, "max(4 C5^2 C'^2 |B^-1|_H^2 gamma3, 4 |B^-1|_H^2 gamma2)");
  j["K3_prime"] = entry(
      K3_prime, cf, "max(2, 2|B^-1 b|_H/(1-beta), K5, K5|B^-1 b|_H/(1-beta)+K6)");
  j["K3_star"] =
      entry(K3_star, est, "sup_m sum chi(m,k+1)a(k)/(k+1)^{1/2-theta} / m^{1/2+theta-mu2}");
  j["K3_dstar"] =
      entry(K3_dstar, est, "sup_m sum chi(m,k+1)a(k)/(k+1) / m^{-mu2}");
  j["K3"] = entry(K3, cf, "K3' max(K3_star, K3_dstar)");
  j["K4"] = entry(K4, cf, "max(K7, K8)");
  j["K5"] = entry(K5, cf, "C2 C' + C4 |A|_H");
  j["K6"] = entry(K6, cf, "C1 C' + C4 |b|_H");
  j["K7"] = entry(K7, cf, "max(4 C'^2 gamma2, 4 C'^2 |B^-1|_H^2 gamma3 |A|_H^2)");
  j["K8"] = entry(K8, cf, "max(4 C'^2 gamma1, 4 C'^2 |B^-1|_H^2 gamma3 |b|_H^2)");

  nlohmann::ordered_json meta;
  meta["n0"] = n0;
  meta["C_prime_raw"] = C_prime_raw;
  auto est_meta = [](const EstimatedConstant& e) {
    nlohmann::ordered_json m;
    m["argmax_n"] = e.argmax_n;
    m["argmax_initial"] = e.argmax_initial;
    m["plateau_certified"] = e.certified;
    return m;
  };
  meta["C1"] = est_meta(C1);
  meta["C2"] = est_meta(C2);
  meta["C3"] = est_meta(C3);
  meta["k3_m_sup"] = k3_m_sup;
  meta["k3_argmax_star"] = k3_argmax_star;
  meta["k3_argmax_dstar"] = k3_argmax_dstar;
  meta["k3_flat_tail"] = k3_flat_tail;
  nlohmann::ordered_json sched;
  sched["c"] = schedule.c;
  sched["mu1"] = schedule.mu1;
  sched["mu2"] = schedule.mu2;
  sched["mu3"] = schedule.mu3;
  sched["theta"] = schedule.theta;
  meta["schedule"] = sched;
  j["meta"] = meta;
  return j.dump(2);
}

}  // namespace lspe
