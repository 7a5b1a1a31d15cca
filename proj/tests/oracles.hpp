// Test-only oracles, independent of the library's solve paths.
#pragma once

#include <cmath>
#include <unsupported/Eigen/MatrixFunctions>

#include "plilab/highgain.hpp"
#include "plilab/linalg.hpp"
#include "plilab/lqr.hpp"
#include "plilab/rng.hpp"

namespace oracles {

using plilab::Mat;

/// integral solution of F X + X F^T + Q = 0 for Hurwitz F:
/// X = int_0^T e^{Ft} Q e^{F^T t} dt, integrated to T with ||e^{FT}|| < 1e-12,
/// composite Simpson with interval doubling until the change is below rtol.
inline Mat lyapunov_integral(const Mat& F, const Mat& Q, double rtol = 1e-9) {
  double T = 1.0;
  while ((F * T).exp().norm() >= 1e-12) {
    T *= 2.0;
    if (T > 1e9) throw std::runtime_error("matrix exponential does not decay");
  }

  auto integrand = [&](double t) -> Mat {
    const Mat E = (F * t).exp();
    return E * Q * E.transpose();
  };

  Mat prev;
  for (int n = 64; n <= 65536; n *= 2) {
    const double h = T / n;
    Mat sum = integrand(0.0) + integrand(T);
    for (int i = 1; i < n; ++i) {
      sum += integrand(i * h) * (i % 2 == 1 ? 4.0 : 2.0);
    }
    Mat approx = sum * (h / 3.0);
    if (prev.size() != 0 &&
        (approx - prev).norm() <= rtol * std::max(1.0, approx.norm())) {
      return approx;
    }
    prev = approx;
  }
  return prev;
}

/// scalar Riccati optimum by the quadratic formula (b = 1):
/// p* = a r + sqrt(a^2 r^2 + q r), k* = p* / r
struct ScalarOpt {
  double pstar;
  double kstar;
};
inline ScalarOpt scalar_riccati(double a, double q, double r) {
  const double p = a * r + std::sqrt(a * a * r * r + q * r);
  return {p, p / r};
}

/// central finite differences of the LQR cost, entry by entry, with one
/// Richardson extrapolation step (h and h/2) to kill the h^2 term
inline Mat fd_gradient(const plilab::lqr::LqrProblem& prob, const Mat& K,
                       double h = 1e-6) {
  auto central = [&](Eigen::Index i, Eigen::Index j, double step) {
    Mat Kp = K, Km = K;
    Kp(i, j) += step;
    Km(i, j) -= step;
    const double jp = plilab::lqr::cost(prob, plilab::lqr::Gain(prob, Kp));
    const double jm = plilab::lqr::cost(prob, plilab::lqr::Gain(prob, Km));
    return (jp - jm) / (2.0 * step);
  };
  Mat g(K.rows(), K.cols());
  for (Eigen::Index i = 0; i < K.rows(); ++i) {
    for (Eigen::Index j = 0; j < K.cols(); ++j) {
      const double d1 = central(i, j, h);
      const double d2 = central(i, j, 0.5 * h);
      g(i, j) = (4.0 * d2 - d1) / 3.0;
    }
  }
  return g;
}

/// seeded random LQR problem with a stabilizing gain of healthy margin
struct RandomCase {
  plilab::lqr::LqrProblem prob;
  Mat K;
};
inline RandomCase random_case(std::uint64_t seed, int n_max = 4, int m_max = 4) {
  plilab::Rng rng(seed);
  for (int attempt = 0; attempt < 200; ++attempt) {
    const int n = 1 + static_cast<int>(rng.uniform01() * n_max) % n_max;
    const int m = 1 + static_cast<int>(rng.uniform01() * m_max) % m_max;
    Mat A(n, n), B(n, m), MQ(n, n), MR(m, m);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) A(i, j) = rng.uniform(-1.0, 1.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j) B(i, j) = rng.uniform(-1.0, 1.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) MQ(i, j) = rng.uniform(-1.0, 1.0);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) MR(i, j) = rng.uniform(-1.0, 1.0);
    const Mat Q = MQ.transpose() * MQ + 0.5 * Mat::Identity(n, n);
    const Mat R = MR.transpose() * MR + 0.5 * Mat::Identity(m, m);

    if (plilab::linalg::rank(plilab::linalg::controllability_matrix(A, B), 1e-9) != n) {
      continue;
    }
    plilab::lqr::LqrProblem prob(A, B, Q, R);
    Mat K = plilab::highgain::stabilize(prob).K;
    // nudge away from the placed gain, keep a real margin
    Mat D(m, n);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) D(i, j) = 0.1 * rng.uniform(-1.0, 1.0);
    if (plilab::lqr::Gain(prob, K + D).margin > 0.2) K += D;
    // keep the case well scaled: a finite-difference oracle at h = 1e-6
    // loses meaning where the cost surface has extreme curvature
    const plilab::lqr::Gain gain(prob, K);
    if (gain.margin < 0.2) continue;
    try {
      if (plilab::lqr::gradient(prob, gain).norm() > 50.0) continue;
    } catch (const plilab::NumericalError&) {
      continue;
    }
    return {std::move(prob), std::move(K)};
  }
  throw std::runtime_error("random_case: no controllable draw in 200 attempts");
}

/// seeded random Hurwitz matrix with abscissa about -margin
inline Mat random_hurwitz(std::uint64_t seed, int n, double margin = 1.0) {
  plilab::Rng rng(seed);
  Mat G(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) G(i, j) = rng.uniform(-1.0, 1.0);
  const double a = plilab::linalg::spectral_abscissa(G).abscissa;
  return G - (a + margin) * Mat::Identity(n, n);
}

inline Mat random_spd(std::uint64_t seed, int n) {
  plilab::Rng rng(seed);
  Mat M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) M(i, j) = rng.uniform(-1.0, 1.0);
  return M.transpose() * M + Mat::Identity(n, n);
}

}  // namespace oracles
