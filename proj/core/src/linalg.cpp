#include "plilab/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <sstream>
#include <unsupported/Eigen/KroneckerProduct>

namespace plilab::linalg {

void require_finite(const Mat& M, const char* name) {
  if (!M.allFinite()) {
    std::ostringstream os;
    os << name << " has NaN or infinite entries";
    throw DimensionError(os.str());
  }
}

static void require_square(const Mat& M, const char* name) {
  if (M.rows() != M.cols()) {
    std::ostringstream os;
    os << name << " must be square, got " << M.rows() << "x" << M.cols();
    throw DimensionError(os.str());
  }
}

Spectrum spectral_abscissa(const Mat& M) {
  require_square(M, "M");
  require_finite(M, "M");

  Spectrum s;
  if (M.rows() == 0) {
    s.abscissa = -std::numeric_limits<double>::infinity();
    return s;
  }

  Eigen::EigenSolver<Mat> es(M, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) {
    throw NumericalError("eigenvalue QR iteration did not converge");
  }
  const auto& ev = es.eigenvalues();
  s.eigenvalues.reserve(static_cast<std::size_t>(ev.size()));
  s.abscissa = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    s.eigenvalues.push_back(ev[i]);
    s.abscissa = std::max(s.abscissa, ev[i].real());
  }
  return s;
}

bool is_hurwitz(const Mat& M, const Tolerances& tol) {
  return spectral_abscissa(M).abscissa < -tol.hurwitz_margin;
}

Mat solve_lyapunov_ct(const Mat& F, const Mat& Q, LyapunovForm form,
                      const Tolerances& tol) {
  require_square(F, "F");
  require_square(Q, "Q");
  if (F.rows() != Q.rows()) {
    throw DimensionError("F and Q must have matching dimensions");
  }
  require_finite(F, "F");
  require_finite(Q, "Q");

  const double abscissa = spectral_abscissa(F).abscissa;
  if (abscissa >= -tol.hurwitz_margin) {
    std::ostringstream os;
    os << "F is not Hurwitz (abscissa " << abscissa;
    if (abscissa < 0.0) os << ", marginal";
    os << ")";
    throw StabilityError(os.str(), abscissa);
  }

  // Transposed form is the standard form applied to F^T.
  const Mat G = (form == LyapunovForm::Transposed) ? Mat(F.transpose()) : F;

  // vec(G X + X G^T) = (I (x) G + G (x) I) vec(X), column-major vec.
  const Eigen::Index n = G.rows();
  const Mat id = Mat::Identity(n, n);
  Mat K = Eigen::kroneckerProduct(id, G).eval();
  K += Eigen::kroneckerProduct(G, id).eval();

  Vec rhs(n * n);
  for (Eigen::Index j = 0; j < n; ++j) {
    rhs.segment(j * n, n) = -Q.col(j);
  }

  Eigen::FullPivLU<Mat> lu(K);
  if (!lu.isInvertible()) {
    throw NumericalError("singular Kronecker system in Lyapunov solve");
  }

  auto unvec = [n](const Vec& v) {
    Mat M(n, n);
    for (Eigen::Index j = 0; j < n; ++j) M.col(j) = v.segment(j * n, n);
    return M;
  };

  Mat X = unvec(lu.solve(rhs));
  X = 0.5 * (X + X.transpose()).eval();

  const double bound = tol.lyapunov_residual * std::max(1.0, Q.norm());
  double residual = (G * X + X * G.transpose() + Q).norm();
  // iterative refinement: solve for the correction of the residual
  for (int pass = 0; pass < 3 && residual > bound; ++pass) {
    const Mat Rm = G * X + X * G.transpose() + Q;
    Vec rv(n * n);
    for (Eigen::Index j = 0; j < n; ++j) rv.segment(j * n, n) = -Rm.col(j);
    Mat E = unvec(lu.solve(rv));
    X += 0.5 * (E + E.transpose());
    residual = (G * X + X * G.transpose() + Q).norm();
  }
  if (!(residual <= bound)) {
    std::ostringstream os;
    os << "Lyapunov residual " << residual << " exceeds bound " << bound;
    throw NumericalError(os.str());
  }
  return X;
}

Mat controllability_matrix(const Mat& A, const Mat& B) {
  require_square(A, "A");
  if (B.rows() != A.rows()) {
    throw DimensionError("B must have as many rows as A");
  }
  require_finite(A, "A");
  require_finite(B, "B");

  const Eigen::Index n = A.rows();
  const Eigen::Index m = B.cols();
  Mat C(n, n * m);
  Mat block = B;
  for (Eigen::Index i = 0; i < n; ++i) {
    C.middleCols(i * m, m) = block;
    block = A * block;
  }
  return C;
}

Eigen::Index rank(const Mat& M, double tol) {
  if (!(tol > 0.0)) {
    throw std::invalid_argument("rank: tol must be positive");
  }
  require_finite(M, "M");
  if (M.size() == 0) return 0;

  Eigen::JacobiSVD<Mat> svd(M);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  const double cut = tol * sv(0);
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cut) ++r;
  }
  return r;
}

}  // namespace plilab::linalg
