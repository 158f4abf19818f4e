#include "lspe/exact_model.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <fstream>

#include "json.hpp"

namespace lspe {

namespace {

double spectral_radius(const Matrix& N) {
  Eigen::EigenSolver<Matrix> es(N, /*computeEigenvectors=*/false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

FeatureBasis make_basis(Matrix phi) {
  if (phi.rows() == 0 || phi.cols() == 0)
    throw DimensionMismatch("basis must be non-empty");
  if (phi.cols() > phi.rows())
    throw DimensionMismatch("more features than states");
  Eigen::ColPivHouseholderQR<Matrix> qr(phi);
  if (qr.rank() < phi.cols())
    throw SingularB("feature columns are linearly dependent");
  return FeatureBasis{std::move(phi)};
}

FeatureBasis basis_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open basis fixture: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  if (!j.contains("phi")) throw ParseError(path + ": expected key \"phi\"");
  const auto& rows = j.at("phi");
  const auto s = static_cast<Eigen::Index>(rows.size());
  if (s == 0) throw ParseError(path + ": phi is empty");
  const auto M = static_cast<Eigen::Index>(rows.at(0).size());
  Matrix phi(s, M);
  for (Eigen::Index i = 0; i < s; ++i) {
    const auto& row = rows.at(static_cast<size_t>(i));
    if (static_cast<Eigen::Index>(row.size()) != M)
      throw ParseError(path + ": ragged phi rows");
    for (Eigen::Index k = 0; k < M; ++k)
      phi(i, k) = row.at(static_cast<size_t>(k)).get<double>();
  }
  return make_basis(std::move(phi));
}

HMetric::HMetric(Matrix H) : H_(std::move(H)) {
  if (H_.rows() != H_.cols()) throw DimensionMismatch("H must be square");
  if (!H_.isApprox(H_.transpose(), 1e-10))
    throw NotPositiveDefinite("H is not symmetric");
  Eigen::LLT<Matrix> llt(H_);
  if (llt.info() != Eigen::Success)
    throw NotPositiveDefinite("H is not positive definite");
  F_ = llt.matrixL().transpose();  // F^T F = L L^T = H
  F_inv_ = F_.triangularView<Eigen::Upper>().solve(
      Matrix::Identity(H_.rows(), H_.cols()));
  Eigen::SelfAdjointEigenSolver<Matrix> es(H_, Eigen::EigenvaluesOnly);
  lambda_max_ = es.eigenvalues().maxCoeff();
  lambda_min_ = es.eigenvalues().minCoeff();
}

double HMetric::norm(const Vector& x) const {
  if (x.size() != H_.rows()) throw DimensionMismatch("h_norm: size mismatch");
  return (F_ * x).norm();
}

double HMetric::opnorm(const Matrix& V) const {
  if (V.rows() != H_.rows() || V.cols() != H_.cols())
    throw DimensionMismatch("h_opnorm: size mismatch");
  Eigen::JacobiSVD<Matrix> svd(F_ * V * F_inv_);
  return svd.singularValues().maxCoeff();
}

double h_norm(const Vector& x, const Matrix& H) { return HMetric(H).norm(x); }

double h_opnorm(const Matrix& V, const Matrix& H) {
  return HMetric(H).opnorm(V);
}

double norm_from_infinity(double a, const Matrix& H, int M, NormKind kind) {
  if (a < 0.0) throw Error("norm_from_infinity: a must be >= 0");
  Eigen::SelfAdjointEigenSolver<Matrix> es(H, Eigen::EigenvaluesOnly);
  const double lmax = es.eigenvalues().maxCoeff();
  const double lmin = es.eigenvalues().minCoeff();
  if (lmin <= 0.0) throw NotPositiveDefinite("norm_from_infinity: H not PD");
  if (kind == NormKind::vector) return std::sqrt(lmax * M) * a;
  return std::sqrt(lmax / lmin) * M * a;
}

std::pair<Matrix, double> solve_lyapunov(const Matrix& N) {
  const auto M = N.rows();
  if (N.cols() != M) throw DimensionMismatch("N must be square");
  if (spectral_radius(N) >= 1.0 - 1e-10)
    throw UnstableN("spectral radius of N is not below 1");

  // vec(N^T H N) = (N^T kron N^T) vec(H); solve (I - N^T kron N^T) vec(H) = vec(I).
  Matrix K = Matrix::Identity(M * M, M * M);
  const Matrix Nt = N.transpose();
  for (Eigen::Index i = 0; i < M; ++i)
    for (Eigen::Index j = 0; j < M; ++j)
      K.block(i * M, j * M, M, M) -= Nt(i, j) * Nt;
  Vector rhs = Vector::Zero(M * M);
  for (Eigen::Index i = 0; i < M; ++i) rhs(i * M + i) = 1.0;
  Vector h = K.partialPivLu().solve(rhs);

  Matrix H(M, M);
  for (Eigen::Index j = 0; j < M; ++j)
    for (Eigen::Index i = 0; i < M; ++i) H(i, j) = h(j * M + i);
  H = 0.5 * (H + H.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Matrix> es(H, Eigen::EigenvaluesOnly);
  const double lmax = es.eigenvalues().maxCoeff();
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw UnstableN("Lyapunov solution is not positive definite");
  const double beta = std::sqrt(std::max(0.0, 1.0 - 1.0 / lmax));
  return {std::move(H), beta};
}

ExactModel build_model(const MarkovRewardChain& chain, const StationaryInfo& stat,
                       const FeatureBasis& basis, double alpha, double lambda) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error("alpha must be in (0,1)");
  if (!(lambda >= 0.0) || alpha * lambda >= 1.0)
    throw Error("lambda must satisfy lambda >= 0 and alpha*lambda < 1");
  if (basis.num_states() != chain.num_states())
    throw DimensionMismatch("basis rows must match chain states");

  const auto s = chain.transition.rows();
  const auto M = basis.phi.cols();
  const Matrix DPhi = stat.pi.asDiagonal() * basis.phi;

  Matrix B = basis.phi.transpose() * DPhi;
  B = 0.5 * (B + B.transpose()).eval();
  Eigen::LLT<Matrix> lltB(B);
  if (lltB.info() != Eigen::Success)
    throw SingularB("Phi^T D Phi is not positive definite");

  // Geometric series sum_j (alpha lambda P)^j in closed form.
  const Matrix Q = Matrix::Identity(s, s) - alpha * lambda * chain.transition;
  Eigen::PartialPivLU<Matrix> luQ(Q);
  const Matrix QinvPhi = luQ.solve(basis.phi);
  const Vector Qinvk = luQ.solve(chain.cost);

  const Matrix shifted = alpha * chain.transition - Matrix::Identity(s, s);
  Matrix A = basis.phi.transpose() * stat.pi.asDiagonal() * (shifted * QinvPhi);
  Vector b = basis.phi.transpose() * (stat.pi.asDiagonal() * Qinvk);

  Matrix N = Matrix::Identity(M, M) + lltB.solve(A);
  if (spectral_radius(N) >= 1.0 - 1e-10)
    throw UnstableN("I + B^{-1}A has spectral radius >= 1");

  Eigen::FullPivLU<Matrix> luA(A);
  if (!luA.isInvertible()) throw SingularA("A is singular");
  Vector r_star = luA.solve(-b);
  if ((A * r_star + b).cwiseAbs().maxCoeff() > 1e-10)
    throw SingularA("A r* + b residual exceeds tolerance");

  auto [H, beta] = solve_lyapunov(N);

  ExactModel model;
  model.A = std::move(A);
  model.b = std::move(b);
  model.B = std::move(B);
  model.N = std::move(N);
  model.H = std::move(H);
  model.r_star = std::move(r_star);
  model.beta = beta;
  model.alpha = alpha;
  model.lambda = lambda;
  return model;
}

std::string model_to_json(const ExactModel& model) {
  auto mat = [](const Matrix& m) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      nlohmann::ordered_json row = nlohmann::ordered_json::array();
      for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
      rows.push_back(row);
    }
    return rows;
  };
  auto vec = [](const Vector& v) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) row.push_back(v(i));
    return row;
  };
  nlohmann::ordered_json j;
  j["alpha"] = model.alpha;
  j["lambda"] = model.lambda;
  j["beta"] = model.beta;
  j["A"] = mat(model.A);
  j["b"] = vec(model.b);
  j["B"] = mat(model.B);
  j["N"] = mat(model.N);
  j["H"] = mat(model.H);
  j["r_star"] = vec(model.r_star);
  return j.dump(2);
}

}  // namespace lspe
