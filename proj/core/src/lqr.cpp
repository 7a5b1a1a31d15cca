#include "plilab/lqr.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

#include "plilab/highgain.hpp"
#include "plilab/rng.hpp"

namespace plilab::lqr {

namespace {

void require_symmetric_pd(const Mat& M, const char* name) {
  const double asym = (M - M.transpose()).norm();
  if (asym > 1e-12 * std::max(1.0, M.norm())) {
    std::ostringstream os;
    os << name << " must be symmetric";
    throw DimensionError(os.str());
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(M, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw NumericalError("eigenvalue computation failed on weighting matrix");
  }
  if (!(es.eigenvalues().minCoeff() > 0.0)) {
    std::ostringstream os;
    os << name << " must be positive definite (min eigenvalue "
       << es.eigenvalues().minCoeff() << ")";
    throw DimensionError(os.str());
  }
}

}  // namespace

LqrProblem::LqrProblem(Mat A_in, Mat B_in, Mat Q_in, Mat R_in,
                       const linalg::Tolerances& tol)
    : A(std::move(A_in)), B(std::move(B_in)), Q(std::move(Q_in)), R(std::move(R_in)) {
  if (A.rows() != A.cols()) throw DimensionError("A must be square");
  if (B.rows() != A.rows()) throw DimensionError("B must have n rows");
  if (Q.rows() != A.rows() || Q.cols() != A.cols()) {
    throw DimensionError("Q must be n x n");
  }
  if (R.rows() != B.cols() || R.cols() != B.cols()) {
    throw DimensionError("R must be m x m");
  }
  linalg::require_finite(A, "A");
  linalg::require_finite(B, "B");
  require_symmetric_pd(Q, "Q");
  require_symmetric_pd(R, "R");

  const Mat C = linalg::controllability_matrix(A, B);
  if (linalg::rank(C, tol.hurwitz_margin) != n()) {
    throw ControllabilityError("(A, B) is not controllable");
  }
}

Gain::Gain(const LqrProblem& prob, Mat K_in) : K(std::move(K_in)), margin(0.0) {
  if (K.rows() != prob.m() || K.cols() != prob.n()) {
    throw DimensionError("K must be m x n");
  }
  linalg::require_finite(K, "K");
  margin = -linalg::spectral_abscissa(prob.A - prob.B * K).abscissa;
}

namespace {

void require_stabilizing(const Gain& K) {
  if (!K.stabilizing()) {
    std::ostringstream os;
    os << "gain is not stabilizing (closed-loop abscissa " << -K.margin << ")";
    throw StabilityError(os.str(), -K.margin);
  }
}

Mat solve_p(const LqrProblem& prob, const Gain& K) {
  const Mat F = prob.A - prob.B * K.K;
  const Mat Qhat = K.K.transpose() * prob.R * K.K + prob.Q;
  return linalg::solve_lyapunov_ct(F, Qhat, linalg::LyapunovForm::Transposed);
}

Mat solve_y(const LqrProblem& prob, const Gain& K) {
  const Mat F = prob.A - prob.B * K.K;
  return linalg::solve_lyapunov_ct(F, Mat::Identity(prob.n(), prob.n()),
                                   linalg::LyapunovForm::Standard);
}

}  // namespace

double cost(const LqrProblem& prob, const Gain& K) {
  require_stabilizing(K);
  return solve_p(prob, K).trace();
}

Mat gradient(const LqrProblem& prob, const Gain& K) {
  require_stabilizing(K);
  const Mat P = solve_p(prob, K);
  const Mat Y = solve_y(prob, K);
  return 2.0 * (prob.R * K.K - prob.B.transpose() * P) * Y;
}

LqrEval evaluate(const LqrProblem& prob, const Gain& K, double optimal_cost) {
  require_stabilizing(K);
  LqrEval e;
  e.P = solve_p(prob, K);
  e.Y = solve_y(prob, K);
  e.cost = e.P.trace();
  e.gap = e.cost - optimal_cost;
  e.grad = 2.0 * (prob.R * K.K - prob.B.transpose() * e.P) * e.Y;
  e.grad_norm = e.grad.norm();
  return e;
}

std::pair<Gain, double> optimal_gain(const LqrProblem& prob) {
  Gain K = highgain::stabilize(prob);

  const Eigen::LLT<Mat> r_llt(prob.R);
  Mat P;
  bool converged = false;
  for (int iter = 0; iter < 200; ++iter) {
    P = solve_p(prob, K);
    const Mat K_next = r_llt.solve(prob.B.transpose() * P);
    const double step = (K_next - K.K).norm();
    K = Gain(prob, K_next);
    if (!K.stabilizing()) {
      throw NumericalError("Newton-Kleinman iterate left the stabilizing set");
    }
    if (step < 1e-12) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw NumericalError("Newton-Kleinman did not converge in 200 iterations");
  }

  P = solve_p(prob, K);
  const double grad_norm = gradient(prob, K).norm();
  if (!(grad_norm <= 1e-8)) {
    std::ostringstream os;
    os << "Riccati solution gradient norm " << grad_norm << " exceeds 1e-8";
    throw NumericalError(os.str());
  }
  return {K, P.trace()};
}

bool in_restricted_set(const LqrProblem& /*prob*/, const Gain& K, double delta) {
  if (delta < 0.0) throw std::invalid_argument("delta must be >= 0");
  const linalg::Tolerances tol;
  // the gain caches -abscissa(A - B K) at construction
  return -K.margin < -delta - tol.hurwitz_margin;
}

double restricted_gradient_bound(const LqrProblem& prob, double delta,
                                 const BoxSampler& sampler) {
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
  if (sampler.count <= 0) throw std::invalid_argument("sampler count must be positive");
  const Eigen::Index m = prob.m();
  const Eigen::Index n = prob.n();
  if (sampler.lo.rows() != m || sampler.lo.cols() != n ||
      sampler.hi.rows() != m || sampler.hi.cols() != n) {
    throw DimensionError("sampler box must be m x n");
  }

  std::vector<Mat> candidates;
  if (sampler.mode == BoxSampler::Mode::Random) {
    Rng rng(sampler.seed);
    candidates.reserve(static_cast<std::size_t>(sampler.count));
    for (int i = 0; i < sampler.count; ++i) {
      Mat K(m, n);
      for (Eigen::Index r = 0; r < m; ++r)
        for (Eigen::Index c = 0; c < n; ++c)
          K(r, c) = rng.uniform(sampler.lo(r, c), sampler.hi(r, c));
      candidates.push_back(std::move(K));
    }
  } else {
    // Per-axis grid with ceil(count^(1/(m n))) points, endpoints included.
    const int dims = static_cast<int>(m * n);
    const int per_axis = std::max(
        2, static_cast<int>(std::ceil(std::pow(static_cast<double>(sampler.count),
                                               1.0 / dims))));
    std::vector<int> idx(static_cast<std::size_t>(dims), 0);
    while (true) {
      Mat K(m, n);
      for (int d = 0; d < dims; ++d) {
        const Eigen::Index r = d / n;
        const Eigen::Index c = d % n;
        const double t = (per_axis == 1)
                             ? 0.0
                             : static_cast<double>(idx[static_cast<std::size_t>(d)]) /
                                   (per_axis - 1);
        K(r, c) = sampler.lo(r, c) + t * (sampler.hi(r, c) - sampler.lo(r, c));
      }
      candidates.push_back(std::move(K));
      int d = dims - 1;
      while (d >= 0 && ++idx[static_cast<std::size_t>(d)] == per_axis) {
        idx[static_cast<std::size_t>(d)] = 0;
        --d;
      }
      if (d < 0) break;
    }
  }

  double best = -1.0;
  for (const Mat& K : candidates) {
    Gain g(prob, K);
    if (!in_restricted_set(prob, g, delta)) continue;
    best = std::max(best, gradient(prob, g).norm());
  }
  if (best < 0.0) {
    throw SamplingError("no sampled gain lies in the restricted set G_delta");
  }
  return best;
}

}  // namespace plilab::lqr
