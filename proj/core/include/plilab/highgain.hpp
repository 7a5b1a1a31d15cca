#pragma once

#include <cstdint>
#include <vector>

#include "plilab/lqr.hpp"

namespace plilab::highgain {

/// Single-input pole-placement result. The gain is verified post hoc; the
/// controllability-matrix inverse can be fragile, so its condition estimate
/// travels with the result instead of being silently dropped.
struct PlacementResult {
  Mat k;                        // 1 x n
  double ctrb_condition;        // condition estimate of [b, Ab, ..., A^{n-1} b]
  bool ill_conditioned = false; // ctrb_condition > 1e12
  bool sign_flipped = false;    // -k verified where +k did not
};

/// Ackermann's formula: the unique gain placing all closed-loop eigenvalues
/// of A - b k at -rho (multiplicity n), k = e_n^T P^{-1} Phi(A) with
/// Phi(A) = A^n + C(n,1) rho A^{n-1} + ... + C(n,n) rho^n I.
///
/// Placement is verified through the closed-loop characteristic polynomial
/// (well conditioned at every n, unlike the eigenvalues of a defective
/// cluster, which split like eps^(1/n)); for n <= 2 the spectral abscissa is
/// additionally required to sit within 1e-6*rho of -rho. If the check fails
/// for +k but passes for -k, the negated gain is returned and flagged.
PlacementResult ackermann_gain(const Mat& A, const Mat& b, double rho);

/// General single-input placement with characteristic polynomial
/// prod_i (s + minus_poles[i]); all entries must be positive.
PlacementResult place_poles(const Mat& A, const Mat& b,
                            const std::vector<double>& minus_poles);

/// Reduction of a multi-input pair to a controllable single-input pair
/// (A - B F, B v). For m = 1 the identity reduction (F = 0, v = 1) is
/// returned; otherwise a seeded randomized search (v uniform on the unit
/// sphere, F entries uniform in [-1, 1], at most 1000 draws).
struct Reduction {
  Mat F;              // m x n
  Vec v;              // m
  std::uint64_t seed;
  int draws;          // draws consumed (0 for the identity reduction)
};

Reduction multi_input_reduce(const Mat& A, const Mat& B, std::uint64_t seed = 0);

/// A stabilizing gain via pole placement at rho0 = 1 + max(0, abscissa(A)):
/// K = F + v * k with k from ackermann_gain(A - BF, Bv, rho0).
lqr::Gain stabilize(const lqr::LqrProblem& prob);

/// Parametrized curve rho -> K(rho) inside the stabilizing set whose cost
/// grows without bound along the curve.
///
/// Two pole layouts are provided. AllFast places every closed-loop pole at
/// -rho; along it ||K(rho)|| grows like rho^n while the one nonzero
/// eigenvalue of B K(rho) grows like rho, so for n >= 2 the rates differ and
/// the gradient need not stay bounded (and in practice does not). SingleFast
/// sends one pole to -rho and pins the rest at -rho_min, which keeps
/// ||K(rho)|| and the escaping eigenvalue at the same rate; the gradient
/// plateaus along these curves and they are the default for limit studies.
class HighGainCurve {
 public:
  enum class PoleLayout { SingleFast, AllFast };

  HighGainCurve(lqr::LqrProblem prob, PoleLayout layout = PoleLayout::SingleFast,
                double rho_min = 10.0, std::uint64_t seed = 0);

  /// K(rho) = F + v k(rho); throws for rho < rho_min.
  lqr::Gain eval(double rho) const;

  /// Offset form K* + K(rho) with a post-hoc Hurwitz check (throws
  /// StabilityError if the offset destroys stability, which can happen at
  /// small rho).
  lqr::Gain eval_offset(double rho, const Mat& k_star) const;

  const lqr::LqrProblem& problem() const { return prob_; }
  const Mat& pre_feedback() const { return F_; }
  const Vec& input_direction() const { return v_; }
  double rho_min() const { return rho_min_; }
  PoleLayout layout() const { return layout_; }

 private:
  lqr::LqrProblem prob_;
  Mat F_;
  Vec v_;
  double rho_min_;
  PoleLayout layout_;
};

/// One row of the limit study along a high gain curve.
struct LimitRow {
  double rho;
  double gap;       // J(K(rho)) - J*
  double grad_fro;  // ||grad J(K(rho))||_F
  double ratio;     // grad_fro / sqrt(gap)
  double bk_eigvec_condition;  // diagonalizability witness for B K(rho)
};

/// Evaluates gap, gradient norm and ratio along the grid (which must be
/// increasing). Demonstrates, where the curve's rates match, gap -> inf with
/// the gradient plateauing, hence ratio -> 0. Aborts with StabilityError
/// naming the offending rho if an evaluation is not stabilizing.
std::vector<LimitRow> curve_limit_study(const HighGainCurve& curve,
                                        const std::vector<double>& rho_grid);

/// n geometrically spaced points from lo to hi inclusive.
std::vector<double> geometric_grid(double lo, double hi, int n);

}  // namespace plilab::highgain
