#pragma once

#include <cstdint>
#include <utility>

#include "plilab/linalg.hpp"

namespace plilab::lqr {

/// Continuous-time LQR policy-optimization problem data.
/// Construction validates: consistent dimensions, (A, B) controllable,
/// Q and R symmetric positive definite.
struct LqrProblem {
  Mat A;  // n x n
  Mat B;  // n x m
  Mat Q;  // n x n, symmetric PD
  Mat R;  // m x m, symmetric PD

  LqrProblem(Mat A_in, Mat B_in, Mat Q_in, Mat R_in,
             const linalg::Tolerances& tol = linalg::Tolerances{});

  Eigen::Index n() const { return A.rows(); }
  Eigen::Index m() const { return B.cols(); }
};

/// A feedback gain with its cached closed-loop stability margin,
/// margin = -abscissa(A - B K). Membership in the stabilizing set
/// is margin > 0.
struct Gain {
  Mat K;  // m x n
  double margin;

  Gain(const LqrProblem& prob, Mat K_in);
  bool stabilizing() const { return margin > 0.0; }
};

/// Full evaluation of the cost at a gain: J, the gap to the optimum,
/// the gradient and its Frobenius norm, and the two Lyapunov solutions.
struct LqrEval {
  double cost;
  double gap;
  Mat grad;
  double grad_norm;
  Mat P;
  Mat Y;
};

/// J(K) = tr(P_K), with P_K (A-BK) + (A-BK)^T P_K + K^T R K + Q = 0.
/// Throws StabilityError (carrying the abscissa) for non-stabilizing K.
double cost(const LqrProblem& prob, const Gain& K);

/// Gradient of J at K: 2 (R K - B^T P_K) Y_K, where
/// Y_K (A-BK)^T + (A-BK) Y_K + I = 0. Equal to -2 (B^T P_K - R K) Y_K.
Mat gradient(const LqrProblem& prob, const Gain& K);

LqrEval evaluate(const LqrProblem& prob, const Gain& K, double optimal_cost);

/// Optimal gain K* = R^{-1} B^T P and optimal cost tr(P), where P solves
/// A^T P + P A - P B R^{-1} B^T P + Q = 0. Computed by Newton-Kleinman
/// iteration from a pole-placement seed: K <- R^{-1} B^T P_K until the
/// update is below 1e-12 in Frobenius norm (at most 200 iterations).
std::pair<Gain, double> optimal_gain(const LqrProblem& prob);

/// K lies in G_delta, i.e. A - B K + delta I is Hurwitz
/// (abscissa < -delta with the usual 1e-9 dead zone).
bool in_restricted_set(const LqrProblem& prob, const Gain& K, double delta);

/// Element-wise sampling box over gains for restricted_gradient_bound.
struct BoxSampler {
  enum class Mode { Grid, Random };
  Mat lo;  // m x n lower corner
  Mat hi;  // m x n upper corner
  int count = 100;
  std::uint64_t seed = 0;
  Mode mode = Mode::Random;
};

/// Empirical max of ||grad J||_F over sampled gains inside G_delta.
/// A lower estimate of the true supremum; the supremum is finite for
/// every delta > 0 but sampling can only ever observe part of it.
/// Throws SamplingError when no sample lands in G_delta.
double restricted_gradient_bound(const LqrProblem& prob, double delta,
                                 const BoxSampler& sampler);

}  // namespace plilab::lqr
