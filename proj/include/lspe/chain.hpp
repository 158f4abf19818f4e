#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "lspe/errors.hpp"

namespace lspe {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Finite irreducible Markov chain with a per-state cost. `transition(i, j)`
/// is the probability of moving from state i to state j; rows sum to one.
struct MarkovRewardChain {
  Matrix transition;
  Vector cost;

  int num_states() const { return static_cast<int>(transition.rows()); }
  double cost_max() const { return cost.cwiseAbs().maxCoeff(); }
};

/// Validates row-stochasticity (1e-12 row-sum tolerance) and irreducibility
/// (strong connectivity of the positive-entry graph).
/// Throws NotStochastic / NotIrreducible / DimensionMismatch.
MarkovRewardChain make_chain(Matrix transition, Vector cost);

/// Loads {"transition": [[...]], "cost": [...]} from a JSON file.
MarkovRewardChain chain_from_json_file(const std::string& path);

struct StationaryInfo {
  Vector pi;  // the diagonal of D
};

/// Unique stationary distribution, from the linear system pi P = pi with the
/// normalization constraint appended.
StationaryInfo stationary_distribution(const MarkovRewardChain& chain);

/// Total-variation distance between two distributions on the same finite set:
/// half the L1 distance.
double tv_distance(const Vector& p, const Vector& q);

/// Worst-case total-variation distance to stationarity, d(t) for t=1..t_max.
struct MixingProfile {
  std::vector<double> d_values;
  int t_max_used = 0;

  double d(int t) const { return d_values.at(static_cast<size_t>(t - 1)); }
};

MixingProfile mixing_profile(const MarkovRewardChain& chain,
                             const StationaryInfo& stat, int t_max);

/// Paulin's effective mixing constant: the minimum over the evaluated
/// candidate set of tau(eps) * ((2-eps)/(1-eps))^2, where
/// tau(eps) = min{t : d(t) <= eps}. Candidates are the observed d(t) values
/// below one; tau(.) is a right-continuous step function that jumps only at
/// these values, so the infimum over [0,1) is attained there.
/// Throws NotMixedByTmax when d(t_max) >= 1 - 1e-15.
double tau_min(const MixingProfile& profile);

struct Trajectory {
  std::vector<int> states;  // X_0 .. X_{n+1}
  std::uint64_t seed = 0;
};

/// Samples X_0..X_{n+1} (n+2 states; the extra state feeds the running
/// averages that look one transition ahead). Deterministic function of
/// (chain, x0, n, seed): inverse-CDF sampling over each row, one uniform
/// per transition.
Trajectory sample_path(const MarkovRewardChain& chain, int x0, std::int64_t n,
                       std::uint64_t seed);

/// Exact time marginals mu_0..mu_{n+1} with mu_t = initial * P^t.
std::vector<Vector> time_marginals(const MarkovRewardChain& chain,
                                   const Vector& initial, std::int64_t n);

}  // namespace lspe
