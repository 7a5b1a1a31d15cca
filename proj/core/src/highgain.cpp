#include "plilab/highgain.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "plilab/rng.hpp"

namespace plilab::highgain {

namespace {

// Coefficients of prod_i (s + p_i) in descending powers, c[0] = 1.
std::vector<double> poly_from_roots(const std::vector<double>& minus_poles) {
  std::vector<double> c{1.0};
  for (double p : minus_poles) {
    std::vector<double> next(c.size() + 1, 0.0);
    for (std::size_t i = 0; i < c.size(); ++i) {
      next[i] += c[i];
      next[i + 1] += c[i] * p;
    }
    c = std::move(next);
  }
  return c;
}

// Characteristic polynomial coefficients of M (descending powers, monic)
// via the Faddeev-LeVerrier recurrence M_k = M (M_{k-1} + c_{k-1} I),
// c_k = -tr(M_k)/k. Deterministic, no eigenvalues involved.
std::vector<double> char_poly(const Mat& M) {
  const Eigen::Index n = M.rows();
  std::vector<double> c(static_cast<std::size_t>(n) + 1, 0.0);
  c[0] = 1.0;
  Mat Mk = Mat::Zero(n, n);
  for (Eigen::Index k = 1; k <= n; ++k) {
    Mk = (M * (Mk + c[static_cast<std::size_t>(k - 1)] * Mat::Identity(n, n)))
             .eval();
    c[static_cast<std::size_t>(k)] = -Mk.trace() / static_cast<double>(k);
  }
  return c;
}

bool poly_matches(const std::vector<double>& got, const std::vector<double>& want,
                  double rtol) {
  if (got.size() != want.size()) return false;
  for (std::size_t i = 0; i < got.size(); ++i) {
    const double scale = std::max(1.0, std::abs(want[i]));
    if (std::abs(got[i] - want[i]) > rtol * scale) return false;
  }
  return true;
}

double condition_estimate(const Mat& M) {
  Eigen::JacobiSVD<Mat> svd(M);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0) return 0.0;
  const double smin = sv(sv.size() - 1);
  if (smin == 0.0) return std::numeric_limits<double>::infinity();
  return sv(0) / smin;
}

}  // namespace

PlacementResult place_poles(const Mat& A, const Mat& b,
                            const std::vector<double>& minus_poles) {
  if (A.rows() != A.cols()) throw DimensionError("A must be square");
  if (b.rows() != A.rows() || b.cols() != 1) {
    throw DimensionError("b must be n x 1");
  }
  const Eigen::Index n = A.rows();
  if (static_cast<Eigen::Index>(minus_poles.size()) != n) {
    throw DimensionError("need exactly n pole magnitudes");
  }
  for (double p : minus_poles) {
    if (!(p > 0.0)) throw std::invalid_argument("pole magnitudes must be positive");
  }

  // Gate the rank near machine precision; pairs in the band between 1e-13
  // and the 1e-12 condition threshold still place but carry the warning.
  const Mat P = linalg::controllability_matrix(A, b);
  if (linalg::rank(P, 1e-13) != n) {
    throw ControllabilityError("(A, b) is not controllable");
  }

  const std::vector<double> target = poly_from_roots(minus_poles);

  // Phi(A) = A^n + c_1 A^{n-1} + ... + c_n I, Horner form.
  Mat Phi = Mat::Identity(n, n);
  for (std::size_t i = 1; i < target.size(); ++i) {
    Phi = (Phi * A + target[i] * Mat::Identity(n, n)).eval();
  }

  PlacementResult result;
  result.ctrb_condition = condition_estimate(P);
  result.ill_conditioned = result.ctrb_condition > 1e12;

  // k = e_n^T P^{-1} Phi(A); solve P^T w = e_n instead of forming P^{-1}.
  Vec en = Vec::Zero(n);
  en(n - 1) = 1.0;
  const Vec w = Eigen::FullPivLU<Mat>(P.transpose()).solve(en);
  result.k = (w.transpose() * Phi).eval();

  // The appendix's formula has an unresolved sign; settle it empirically.
  const double rtol = 1e-6;
  if (!poly_matches(char_poly(A - b * result.k), target, rtol)) {
    if (poly_matches(char_poly(A + b * result.k), target, rtol)) {
      result.k = -result.k;
      result.sign_flipped = true;
    } else {
      throw NumericalError(
          "pole placement verification failed for both gain signs");
    }
  }
  return result;
}

PlacementResult ackermann_gain(const Mat& A, const Mat& b, double rho) {
  if (!(rho > 0.0)) throw std::invalid_argument("rho must be positive");
  const Eigen::Index n = A.rows();
  PlacementResult result =
      place_poles(A, b, std::vector<double>(static_cast<std::size_t>(n), rho));

  // For a defective eigenvalue of multiplicity n, rounding splits the
  // cluster by roughly eps^(1/n); only n <= 2 supports a 1e-6*rho window.
  if (n <= 2) {
    const double abscissa =
        linalg::spectral_abscissa(A - b * result.k).abscissa;
    const double tol = 1e-6 * rho;
    if (!(abscissa >= -rho - tol && abscissa <= -rho + tol)) {
      std::ostringstream os;
      os << "placed abscissa " << abscissa << " not within " << tol
         << " of " << -rho;
      throw NumericalError(os.str());
    }
  }
  return result;
}

Reduction multi_input_reduce(const Mat& A, const Mat& B, std::uint64_t seed) {
  if (A.rows() != A.cols()) throw DimensionError("A must be square");
  if (B.rows() != A.rows()) throw DimensionError("B must have n rows");
  const Eigen::Index n = A.rows();
  const Eigen::Index m = B.cols();

  if (linalg::rank(linalg::controllability_matrix(A, B), 1e-9) != n) {
    throw ControllabilityError("(A, B) is not controllable");
  }

  Reduction red;
  red.seed = seed;
  if (m == 1) {
    red.F = Mat::Zero(1, n);
    red.v = Vec::Ones(1);
    red.draws = 0;
    return red;
  }

  Rng rng(seed);
  for (int draw = 1; draw <= 1000; ++draw) {
    Vec v(m);
    for (Eigen::Index i = 0; i < m; ++i) v(i) = rng.normal();
    const double norm = v.norm();
    if (norm == 0.0) continue;
    v /= norm;

    Mat F(m, n);
    for (Eigen::Index r = 0; r < m; ++r)
      for (Eigen::Index c = 0; c < n; ++c) F(r, c) = rng.uniform(-1.0, 1.0);

    const Mat As = A - B * F;
    const Mat bs = B * v;
    if (linalg::rank(linalg::controllability_matrix(As, bs), 1e-9) == n) {
      red.F = std::move(F);
      red.v = std::move(v);
      red.draws = draw;
      return red;
    }
  }
  std::ostringstream os;
  os << "single-input reduction search failed after 1000 draws (seed " << seed
     << ")";
  throw SamplingError(os.str());
}

lqr::Gain stabilize(const lqr::LqrProblem& prob) {
  const Reduction red = multi_input_reduce(prob.A, prob.B);
  const double rho0 =
      1.0 + std::max(0.0, linalg::spectral_abscissa(prob.A).abscissa);
  const PlacementResult pr =
      ackermann_gain(prob.A - prob.B * red.F, prob.B * red.v, rho0);
  return lqr::Gain(prob, red.F + red.v * pr.k);
}

HighGainCurve::HighGainCurve(lqr::LqrProblem prob, PoleLayout layout,
                             double rho_min, std::uint64_t seed)
    : prob_(std::move(prob)), rho_min_(rho_min), layout_(layout) {
  if (!(rho_min > 0.0)) throw std::invalid_argument("rho_min must be positive");
  const Reduction red = multi_input_reduce(prob_.A, prob_.B, seed);
  F_ = red.F;
  v_ = red.v;
  // construction invariant: the reduced pair is controllable
  const Mat ctrb = linalg::controllability_matrix(prob_.A - prob_.B * F_,
                                                  prob_.B * v_);
  if (linalg::rank(ctrb, 1e-9) != prob_.n()) {
    throw ControllabilityError("(A - BF, Bv) is not controllable");
  }
}

lqr::Gain HighGainCurve::eval(double rho) const {
  if (!(rho >= rho_min_)) {
    std::ostringstream os;
    os << "rho " << rho << " below rho_min " << rho_min_;
    throw std::invalid_argument(os.str());
  }
  const Eigen::Index n = prob_.n();
  std::vector<double> poles(static_cast<std::size_t>(n), rho_min_);
  if (layout_ == PoleLayout::AllFast) {
    std::fill(poles.begin(), poles.end(), rho);
  } else {
    poles[0] = rho;
  }
  const PlacementResult pr =
      place_poles(prob_.A - prob_.B * F_, prob_.B * v_, poles);
  return lqr::Gain(prob_, F_ + v_ * pr.k);
}

lqr::Gain HighGainCurve::eval_offset(double rho, const Mat& k_star) const {
  const lqr::Gain base = eval(rho);
  lqr::Gain shifted(prob_, base.K + k_star);
  if (!shifted.stabilizing()) {
    std::ostringstream os;
    os << "offset curve K* + K(rho) leaves the stabilizing set at rho = " << rho;
    throw StabilityError(os.str(), -shifted.margin);
  }
  return shifted;
}

std::vector<LimitRow> curve_limit_study(const HighGainCurve& curve,
                                        const std::vector<double>& rho_grid) {
  if (rho_grid.size() < 2) throw std::invalid_argument("rho grid too short");
  for (std::size_t i = 1; i < rho_grid.size(); ++i) {
    if (!(rho_grid[i] > rho_grid[i - 1])) {
      throw std::invalid_argument("rho grid must be increasing");
    }
  }

  const lqr::LqrProblem& prob = curve.problem();
  const double j_star = lqr::optimal_gain(prob).second;

  std::vector<LimitRow> rows;
  rows.reserve(rho_grid.size());
  for (double rho : rho_grid) {
    lqr::Gain K = curve.eval(rho);
    if (!K.stabilizing()) {
      std::ostringstream os;
      os << "curve evaluation not stabilizing at rho = " << rho;
      throw StabilityError(os.str(), -K.margin);
    }
    const lqr::LqrEval e = lqr::evaluate(prob, K, j_star);

    LimitRow row;
    row.rho = rho;
    row.gap = e.gap;
    row.grad_fro = e.grad_norm;
    row.ratio = e.grad_norm / std::sqrt(std::max(e.gap, 1e-300));

    // Diagonalizability witness for B K(rho): eigenvector matrix condition.
    Eigen::EigenSolver<Mat> es(prob.B * K.K, /*computeEigenvectors=*/true);
    row.bk_eigvec_condition = (es.info() == Eigen::Success)
                                  ? condition_estimate(es.eigenvectors().real())
                                  : std::numeric_limits<double>::infinity();
    rows.push_back(row);
  }
  return rows;
}

std::vector<double> geometric_grid(double lo, double hi, int n) {
  if (!(lo > 0.0) || !(hi > lo) || n < 2) {
    throw std::invalid_argument("geometric_grid needs 0 < lo < hi and n >= 2");
  }
  std::vector<double> g(static_cast<std::size_t>(n));
  const double step = std::log(hi / lo) / (n - 1);
  for (int i = 0; i < n; ++i) {
    g[static_cast<std::size_t>(i)] = lo * std::exp(step * i);
  }
  g.front() = lo;
  g.back() = hi;
  return g;
}

}  // namespace plilab::highgain
