#include "stap/eastr.hpp"

#include <cmath>

namespace stap {

namespace {

// Shared rank rule so detection and row selection cannot disagree.
constexpr double kRankRtol = 1e-10;

int numeric_rank_of(const RMat& m, double& tolerance_out) {
  if (m.size() == 0) {
    tolerance_out = 0.0;
    return 0;
  }
  Eigen::JacobiSVD<RMat> svd(m);
  const double smax = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
  tolerance_out = kRankRtol * smax;
  int rank = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > tolerance_out) ++rank;
  return rank;
}

}  // namespace

ToeplitzConstraintSystem build_toeplitz_constraints(const CMat& v, int rank) {
  const int n = static_cast<int>(v.rows());
  if (rank < 1 || rank > n)
    throw std::invalid_argument("build_toeplitz_constraints: rank out of range");

  const int complex_rows = n * (n - 1) / 2;
  ToeplitzConstraintSystem sys;
  sys.coefficients.resize(2 * complex_rows, rank);

  int row = 0;
  for (int i = 0; i + 1 < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      for (int k = 0; k < rank; ++k) {
        Complex c = v(i, k) * std::conj(v(j, k)) - v(i + 1, k) * std::conj(v(j + 1, k));
        sys.coefficients(2 * row, k) = c.real();
        sys.coefficients(2 * row + 1, k) = c.imag();
      }
      ++row;
    }
  }
  sys.numeric_rank = numeric_rank_of(sys.coefficients, sys.tolerance_used);
  return sys;
}

ToeplitzConstraintSystem reduce_rank_eckart_young(const ToeplitzConstraintSystem& c) {
  const int cols = static_cast<int>(c.coefficients.cols());
  if (c.numeric_rank < cols) return c;  // already deficient: no-op

  Eigen::JacobiSVD<RMat> svd(c.coefficients,
                             Eigen::ComputeThinU | Eigen::ComputeThinV);
  RVec sv = svd.singularValues();
  sv(sv.size() - 1) = 0.0;  // drop the smallest
  ToeplitzConstraintSystem out;
  out.coefficients = svd.matrixU() * sv.asDiagonal() * svd.matrixV().transpose();
  out.numeric_rank = numeric_rank_of(out.coefficients, out.tolerance_used);
  return out;
}

RVec project_eigenvalues(const RVec& lambda_rcml, const ToeplitzConstraintSystem& c) {
  const int r = static_cast<int>(lambda_rcml.size());
  if (c.coefficients.cols() != r)
    throw std::invalid_argument("project_eigenvalues: dimension mismatch");
  if (c.numeric_rank >= r)
    throw std::invalid_argument("project_eigenvalues: constraints still full rank");
  if (c.numeric_rank == 0) return lambda_rcml;

  // Independent rows via column-pivoted QR of the transpose, at the same
  // tolerance that determined numeric_rank.
  Eigen::ColPivHouseholderQR<RMat> qr(c.coefficients.transpose());
  RMat psi(c.numeric_rank, r);
  for (int i = 0; i < c.numeric_rank; ++i)
    psi.row(i) = c.coefficients.row(qr.colsPermutation().indices()(i));

  RMat gram = psi * psi.transpose();
  Eigen::LDLT<RMat> ldlt(gram);
  if (ldlt.info() != Eigen::Success)
    throw NumericError("project_eigenvalues: selected rows nearly dependent");
  RVec y = ldlt.solve(psi * lambda_rcml);
  // Guard against a numerically singular Gram matrix slipping past LDLT.
  if ((gram * y - psi * lambda_rcml).norm() >
      1e-8 * std::max(1.0, (psi * lambda_rcml).norm()))
    throw NumericError("project_eigenvalues: Gram solve failed; tolerance misconfigured");
  return lambda_rcml - psi.transpose() * y;
}

CovarianceEstimate eastr(const HermitianMatrix& s, double noise, int rank) {
  if (noise <= 0.0) throw std::invalid_argument("eastr: noise power must be > 0");
  EigenSystem es = eig_hermitian(s);
  const int n = static_cast<int>(es.values.size());
  if (rank < 1 || rank >= n) throw std::invalid_argument("eastr: rank out of range");

  RVec lambda(rank);
  for (int i = 0; i < rank; ++i) lambda(i) = std::max(es.values(i) - noise, 0.0);

  ToeplitzConstraintSystem sys = build_toeplitz_constraints(es.vectors, rank);
  if (sys.numeric_rank >= rank) sys = reduce_rank_eckart_young(sys);
  RVec projected = project_eigenvalues(lambda, sys);

  double clipped = 0.0;
  for (int i = 0; i < rank; ++i) {
    if (projected(i) < 0.0) {
      clipped += -projected(i);
      projected(i) = 0.0;
    }
  }

  const CMat vr = es.vectors.leftCols(rank);
  CovarianceEstimate est;
  est.matrix = hermitize(noise * CMat::Identity(n, n) +
                         vr * projected.asDiagonal() * vr.adjoint());
  est.tag = "EASTR";
  int used = 0;
  for (int i = 0; i < rank; ++i)
    if (projected(i) > 0.0) ++used;
  est.rank_used = used;
  est.noise_used = noise;
  est.clip_violation = clipped;
  return est;
}

}  // namespace stap
