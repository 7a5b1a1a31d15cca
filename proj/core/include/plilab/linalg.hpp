#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "plilab/errors.hpp"

namespace plilab {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

namespace linalg {

/// Numerical tolerances shared by the solvers. Tests may tighten them.
struct Tolerances {
  /// A matrix counts as Hurwitz when its abscissa is < -hurwitz_margin.
  /// Abscissae in [-hurwitz_margin, 0] are treated as marginal and rejected,
  /// since eigenvalue computation carries noise of roughly this size.
  double hurwitz_margin = 1e-9;
  /// Lyapunov residual bound, relative to max(1, ||Q||_F).
  double lyapunov_residual = 1e-10;
};

/// Eigenvalues of a real matrix plus their largest real part.
struct Spectrum {
  std::vector<std::complex<double>> eigenvalues;
  double abscissa = 0.0;
};

/// All eigenvalues of a square real matrix and the spectral abscissa.
/// Throws DimensionError (non-square / non-finite input) or NumericalError
/// (QR iteration failed to converge).
Spectrum spectral_abscissa(const Mat& M);

/// Which side of the Lyapunov equation carries the transpose.
enum class LyapunovForm {
  Standard,    ///< F X + X F^T + Q = 0
  Transposed,  ///< F^T X + X F + Q = 0
};

/// Unique symmetric solution of the continuous Lyapunov equation, via
/// Kronecker vectorization (dense n^2 x n^2 solve; fine for n <= 8).
/// F must be Hurwitz and Q symmetric. Throws StabilityError when F is not
/// Hurwitz (marginal spectra rejected too) and NumericalError when the
/// vectorized system is singular or the residual check fails.
Mat solve_lyapunov_ct(const Mat& F, const Mat& Q,
                      LyapunovForm form = LyapunovForm::Standard,
                      const Tolerances& tol = Tolerances{});

/// [B, AB, A^2 B, ..., A^{n-1} B]; the caller checks the rank.
Mat controllability_matrix(const Mat& A, const Mat& B);

/// Numerical rank: singular values above tol * sigma_max. Requires tol > 0.
Eigen::Index rank(const Mat& M, double tol);

/// abscissa(M) < -tol.hurwitz_margin
bool is_hurwitz(const Mat& M, const Tolerances& tol = Tolerances{});

/// Throws DimensionError if any entry of M is NaN or infinite.
void require_finite(const Mat& M, const char* name);

}  // namespace linalg
}  // namespace plilab
