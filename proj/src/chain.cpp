#include "lspe/chain.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "json.hpp"
#include "lspe/rng.hpp"

namespace lspe {

namespace {

// Strong connectivity of the positive-entry digraph: every state reachable
// from state 0 and state 0 reachable from every state.
bool strongly_connected(const Matrix& P) {
  const int s = static_cast<int>(P.rows());
  auto reach = [&](bool forward) {
    std::vector<char> seen(static_cast<size_t>(s), 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (int v = 0; v < s; ++v) {
        double p = forward ? P(u, v) : P(v, u);
        if (p > 0.0 && !seen[static_cast<size_t>(v)]) {
          seen[static_cast<size_t>(v)] = 1;
          stack.push_back(v);
        }
      }
    }
    for (char c : seen)
      if (!c) return false;
    return true;
  };
  return reach(true) && reach(false);
}

}  // namespace

MarkovRewardChain make_chain(Matrix transition, Vector cost) {
  const auto s = transition.rows();
  if (s == 0 || transition.cols() != s)
    throw DimensionMismatch("transition matrix must be square and non-empty");
  if (cost.size() != s)
    throw DimensionMismatch("cost vector length must match state count");
  for (Eigen::Index i = 0; i < s; ++i) {
    double row_sum = 0.0;
    for (Eigen::Index j = 0; j < s; ++j) {
      double p = transition(i, j);
      if (!(p >= 0.0) || p > 1.0 + 1e-12)
        throw NotStochastic("transition entry outside [0,1] at row " +
                            std::to_string(i));
      row_sum += p;
    }
    if (std::abs(row_sum - 1.0) > 1e-12)
      throw NotStochastic("row " + std::to_string(i) +
                          " sums to " + std::to_string(row_sum));
  }
  if (!strongly_connected(transition))
    throw NotIrreducible("positive-entry graph is not strongly connected");
  return MarkovRewardChain{std::move(transition), std::move(cost)};
}

MarkovRewardChain chain_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open chain fixture: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  if (!j.contains("transition") || !j.contains("cost"))
    throw ParseError(path + ": expected keys \"transition\" and \"cost\"");
  const auto& rows = j.at("transition");
  const auto s = static_cast<Eigen::Index>(rows.size());
  Matrix P(s, s);
  for (Eigen::Index i = 0; i < s; ++i) {
    const auto& row = rows.at(static_cast<size_t>(i));
    if (static_cast<Eigen::Index>(row.size()) != s)
      throw ParseError(path + ": transition row " + std::to_string(i) +
                       " has wrong length");
    for (Eigen::Index k = 0; k < s; ++k)
      P(i, k) = row.at(static_cast<size_t>(k)).get<double>();
  }
  const auto& cj = j.at("cost");
  if (static_cast<Eigen::Index>(cj.size()) != s)
    throw ParseError(path + ": cost length must match transition size");
  Vector k(s);
  for (Eigen::Index i = 0; i < s; ++i) k(i) = cj.at(static_cast<size_t>(i)).get<double>();
  return make_chain(std::move(P), std::move(k));
}

StationaryInfo stationary_distribution(const MarkovRewardChain& chain) {
  const auto s = chain.transition.rows();
  // Stack (P^T - I) x = 0 with the normalization row 1^T x = 1 and solve the
  // consistent least-squares system.
  Matrix A(s + 1, s);
  A.topRows(s) = chain.transition.transpose() - Matrix::Identity(s, s);
  A.row(s).setOnes();
  Vector rhs = Vector::Zero(s + 1);
  rhs(s) = 1.0;
  Vector pi = A.colPivHouseholderQr().solve(rhs);

  double residual = (chain.transition.transpose() * pi - pi).cwiseAbs().maxCoeff();
  if (residual > 1e-12 || pi.minCoeff() <= 0.0)
    throw NotIrreducible("stationary solve failed (residual " +
                         std::to_string(residual) + ")");
  pi /= pi.sum();
  return StationaryInfo{std::move(pi)};
}

double tv_distance(const Vector& p, const Vector& q) {
  if (p.size() != q.size())
    throw DimensionMismatch("tv_distance: vectors of different length");
  return 0.5 * (p - q).lpNorm<1>();
}

MixingProfile mixing_profile(const MarkovRewardChain& chain,
                             const StationaryInfo& stat, int t_max) {
  if (t_max < 1) throw Error("mixing_profile: t_max must be >= 1");
  const auto s = chain.transition.rows();
  MixingProfile out;
  out.d_values.reserve(static_cast<size_t>(t_max));
  out.t_max_used = t_max;
  Matrix Pt = chain.transition;
  for (int t = 1; t <= t_max; ++t) {
    double d = 0.0;
    for (Eigen::Index x = 0; x < s; ++x)
      d = std::max(d, tv_distance(Pt.row(x).transpose(), stat.pi));
    out.d_values.push_back(d);
    if (t < t_max) Pt = Pt * chain.transition;
  }
  return out;
}

double tau_min(const MixingProfile& profile) {
  if (profile.d_values.empty() || profile.d_values.back() >= 1.0 - 1e-15)
    throw NotMixedByTmax("d(t_max) has not dropped below 1");
  const int t_max = static_cast<int>(profile.d_values.size());
  auto tau_of = [&](double eps) {
    for (int t = 1; t <= t_max; ++t)
      if (profile.d(t) <= eps) return t;
    return t_max + 1;  // unreachable for candidates drawn from d itself
  };
  double best = std::numeric_limits<double>::infinity();
  for (int t = 1; t <= t_max; ++t) {
    double eps = profile.d(t);
    if (eps >= 1.0) continue;
    double factor = (2.0 - eps) / (1.0 - eps);
    best = std::min(best, static_cast<double>(tau_of(eps)) * factor * factor);
  }
  return best;
}

Trajectory sample_path(const MarkovRewardChain& chain, int x0, std::int64_t n,
                       std::uint64_t seed) {
  const int s = chain.num_states();
  if (x0 < 0 || x0 >= s) throw InvalidState("x0 out of range");
  if (n < 0) throw Error("sample_path: n must be >= 0");

  // Per-row CDFs; entries with zero probability never win the strict
  // comparison below, so sampled transitions always have p > 0.
  Matrix cdf(s, s);
  for (int i = 0; i < s; ++i) {
    double acc = 0.0;
    for (int j = 0; j < s; ++j) {
      acc += chain.transition(i, j);
      cdf(i, j) = acc;
    }
  }
  std::vector<int> last_positive(static_cast<size_t>(s), 0);
  for (int i = 0; i < s; ++i)
    for (int j = 0; j < s; ++j)
      if (chain.transition(i, j) > 0.0) last_positive[static_cast<size_t>(i)] = j;

  Trajectory out;
  out.seed = seed;
  out.states.resize(static_cast<size_t>(n) + 2);
  out.states[0] = x0;
  UniformStream stream(seed);
  int cur = x0;
  for (std::int64_t m = 1; m <= n + 1; ++m) {
    const double u = stream.next();
    int next = last_positive[static_cast<size_t>(cur)];
    for (int j = 0; j < s; ++j) {
      if (cdf(cur, j) > u) {
        next = j;
        break;
      }
    }
    out.states[static_cast<size_t>(m)] = next;
    cur = next;
  }
  return out;
}

std::vector<Vector> time_marginals(const MarkovRewardChain& chain,
                                   const Vector& initial, std::int64_t n) {
  if (initial.size() != chain.transition.rows())
    throw DimensionMismatch("time_marginals: initial length must match chain");
  std::vector<Vector> out;
  out.reserve(static_cast<size_t>(n) + 2);
  Vector mu = initial;
  out.push_back(mu);
  for (std::int64_t t = 1; t <= n + 1; ++t) {
    mu = chain.transition.transpose() * mu;
    out.push_back(mu);
  }
  return out;
}

}  // namespace lspe
