#pragma once

#include <string>
#include <utility>

#include "lspe/chain.hpp"

namespace lspe {

/// Linear feature basis: phi is s x M with full column rank.
struct FeatureBasis {
  Matrix phi;

  int num_states() const { return static_cast<int>(phi.rows()); }
  int num_features() const { return static_cast<int>(phi.cols()); }
  double phi_max() const { return phi.cwiseAbs().maxCoeff(); }
  /// phi(i): the i-th row as a column vector.
  Vector row(int i) const { return phi.row(i).transpose(); }
};

/// Validates rank(phi) == M and M <= s.
FeatureBasis make_basis(Matrix phi);

/// Loads {"phi": [[...]]} from a JSON file.
FeatureBasis basis_from_json_file(const std::string& path);

/// Weighted norm machinery for a symmetric positive definite H. Caches the
/// factor F with F^T F = H, so repeated norms are cheap.
class HMetric {
 public:
  explicit HMetric(Matrix H);

  const Matrix& H() const { return H_; }
  double lambda_max() const { return lambda_max_; }
  double lambda_min() const { return lambda_min_; }

  /// sqrt(x^T H x)
  double norm(const Vector& x) const;
  /// Operator norm induced by the vector norm: sigma_max(F V F^{-1}).
  double opnorm(const Matrix& V) const;

 private:
  Matrix H_;
  Matrix F_;      // upper-triangular, F^T F = H
  Matrix F_inv_;
  double lambda_max_ = 0.0;
  double lambda_min_ = 0.0;
};

double h_norm(const Vector& x, const Matrix& H);
double h_opnorm(const Matrix& V, const Matrix& H);

enum class NormKind { vector, matrix };

/// Bound on the H-norm given an entrywise bound a: sqrt(lambda_max(H) M) a
/// for vectors, sqrt(lambda_max(H)/lambda_min(H)) M a for matrices.
double norm_from_infinity(double a, const Matrix& H, int M, NormKind kind);

/// Limit quantities of the iteration for a (chain, basis, alpha, lambda)
/// tuple, together with the Lyapunov certificate (H, beta) under which
/// N = I + B^{-1}A contracts.
struct ExactModel {
  Matrix A;
  Vector b;
  Matrix B;
  Matrix N;
  Matrix H;
  Vector r_star;
  double beta = 0.0;
  double alpha = 0.0;
  double lambda = 0.0;

  int num_features() const { return static_cast<int>(A.rows()); }
};

/// B = Phi^T D Phi, A = Phi^T D (alpha P - I)(I - alpha lambda P)^{-1} Phi,
/// b = Phi^T D (I - alpha lambda P)^{-1} k, N = I + B^{-1} A, r* the root of
/// A r + b = 0, and (H, beta) from the Lyapunov equation N^T H N - H = -I.
ExactModel build_model(const MarkovRewardChain& chain, const StationaryInfo& stat,
                       const FeatureBasis& basis, double alpha, double lambda);

/// Solves N^T H N - H = -I by dense Kronecker vectorization, symmetrizes, and
/// returns (H, beta) with beta = sqrt(1 - 1/lambda_max(H)).
std::pair<Matrix, double> solve_lyapunov(const Matrix& N);

/// Row-major JSON dump of all model matrices for cross-implementation diffs.
std::string model_to_json(const ExactModel& model);

}  // namespace lspe
