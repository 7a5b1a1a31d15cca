#include "plilab/flow.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "plilab/csv.hpp"

namespace plilab::flow {

namespace {

// Dormand-Prince 4(5) tableau. The 5th-order weights are the last stage row
// (FSAL), the embedded 4th-order weights give the error estimate.
constexpr double kA21 = 1.0 / 5.0;
constexpr double kA31 = 3.0 / 40.0, kA32 = 9.0 / 40.0;
constexpr double kA41 = 44.0 / 45.0, kA42 = -56.0 / 15.0, kA43 = 32.0 / 9.0;
constexpr double kA51 = 19372.0 / 6561.0, kA52 = -25360.0 / 2187.0,
                 kA53 = 64448.0 / 6561.0, kA54 = -212.0 / 729.0;
constexpr double kA61 = 9017.0 / 3168.0, kA62 = -355.0 / 33.0,
                 kA63 = 46732.0 / 5247.0, kA64 = 49.0 / 176.0,
                 kA65 = -5103.0 / 18656.0;
constexpr double kB1 = 35.0 / 384.0, kB3 = 500.0 / 1113.0, kB4 = 125.0 / 192.0,
                 kB5 = -2187.0 / 6784.0, kB6 = 11.0 / 84.0;
constexpr double kE1 = 5179.0 / 57600.0, kE3 = 7571.0 / 16695.0,
                 kE4 = 393.0 / 640.0, kE5 = -92097.0 / 339200.0,
                 kE6 = 187.0 / 2100.0, kE7 = 1.0 / 40.0;

/// Evaluation of the flow field at a state: derivative plus the scalars the
/// trajectory records. in_domain = false marks points where the field is
/// undefined (outside the stabilizing set).
struct FieldEval {
  Vec deriv;
  double gap = 0.0;
  double grad_norm = 0.0;
  bool in_domain = false;
};

void validate(const FlowConfig& cfg) {
  if (!(cfg.max_time > 0.0) || !(cfg.grad_tol > 0.0) ||
      !(cfg.rel_step_tol > 0.0) || !(cfg.initial_step > 0.0) ||
      !(cfg.min_step > 0.0) || !(cfg.record_every > 0.0)) {
    throw std::invalid_argument("FlowConfig fields must be positive");
  }
  if (!(cfg.min_step < cfg.initial_step)) {
    throw std::invalid_argument("min_step must be below initial_step");
  }
}

/// Shared adaptive RK45 loop over a generic field.
Trajectory integrate(const std::function<FieldEval(const Vec&)>& field,
                     const Vec& y0, const FlowConfig& cfg, bool use_gap_stop) {
  validate(cfg);

  Trajectory traj;
  FieldEval e0 = field(y0);
  if (!e0.in_domain) {
    throw StabilityError("initial point is outside the flow domain", 0.0);
  }

  const double gap_tol =
      cfg.gap_tol > 0.0 ? cfg.gap_tol : 1e-10 * std::max(e0.gap, 0.0);
  traj.gap_tol_used = gap_tol;

  double t = 0.0;
  Vec y = y0;
  FieldEval cur = e0;
  traj.samples.push_back({t, y, cur.gap, cur.grad_norm});
  double last_recorded = 0.0;

  auto finished = [&](const FieldEval& e) {
    if (e.grad_norm <= cfg.grad_tol) return true;
    if (use_gap_stop && e.gap <= gap_tol) return true;
    return false;
  };
  if (finished(cur)) {
    traj.terminal = Terminal::Converged;
    return traj;
  }

  double h = std::min(cfg.initial_step, cfg.record_every);
  bool last_reject_domain = false;

  while (t < cfg.max_time) {
    const double remaining = cfg.max_time - t;
    if (remaining <= cfg.min_step) break;  // effectively at the horizon
    if (h < cfg.min_step) {
      traj.terminal =
          last_reject_domain ? Terminal::DomainExit : Terminal::StepFailure;
      return traj;
    }
    h = std::min({h, cfg.record_every, remaining});

    // stages (k1 is the current derivative; domain failures reject the step)
    const Vec& k1 = cur.deriv;
    bool domain_ok = true;
    FieldEval s2, s3, s4, s5, s6, s7;
    Vec y5;
    do {
      s2 = field(y + h * (kA21 * k1));
      if (!(domain_ok = s2.in_domain)) break;
      s3 = field(y + h * (kA31 * k1 + kA32 * s2.deriv));
      if (!(domain_ok = s3.in_domain)) break;
      s4 = field(y + h * (kA41 * k1 + kA42 * s2.deriv + kA43 * s3.deriv));
      if (!(domain_ok = s4.in_domain)) break;
      s5 = field(y + h * (kA51 * k1 + kA52 * s2.deriv + kA53 * s3.deriv +
                          kA54 * s4.deriv));
      if (!(domain_ok = s5.in_domain)) break;
      s6 = field(y + h * (kA61 * k1 + kA62 * s2.deriv + kA63 * s3.deriv +
                          kA64 * s4.deriv + kA65 * s5.deriv));
      if (!(domain_ok = s6.in_domain)) break;
      y5 = y + h * (kB1 * k1 + kB3 * s3.deriv + kB4 * s4.deriv +
                    kB5 * s5.deriv + kB6 * s6.deriv);
      s7 = field(y5);
      domain_ok = s7.in_domain;
    } while (false);

    if (!domain_ok) {
      last_reject_domain = true;
      h *= 0.5;
      continue;
    }

    const Vec y4 = y + h * (kE1 * k1 + kE3 * s3.deriv + kE4 * s4.deriv +
                            kE5 * s5.deriv + kE6 * s6.deriv + kE7 * s7.deriv);
    const double err = (y5 - y4).norm() / std::max(1.0, y.norm());
    if (err > cfg.rel_step_tol) {
      last_reject_domain = false;
      h *= 0.5;
      continue;
    }

    t += h;
    y = y5;
    cur = s7;

    if (t - last_recorded >= cfg.record_every - 1e-12 || finished(cur) ||
        t >= cfg.max_time) {
      traj.samples.push_back({t, y, cur.gap, cur.grad_norm});
      last_recorded = t;
    }

    if (finished(cur)) {
      traj.terminal = Terminal::Converged;
      return traj;
    }

    // standard controller growth, capped; rejected steps halve instead
    const double grow =
        (err > 0.0) ? 0.9 * std::pow(cfg.rel_step_tol / err, 0.2) : 5.0;
    h *= std::clamp(grow, 0.2, 5.0);
  }

  traj.terminal = Terminal::MaxTime;
  return traj;
}

}  // namespace

Trajectory integrate_gradient_flow(const lqr::LqrProblem& prob,
                                   const lqr::Gain& K0, const FlowConfig& cfg,
                                   std::optional<double> optimal_cost) {
  if (!K0.stabilizing()) {
    throw StabilityError("K0 is not stabilizing", -K0.margin);
  }
  const double j_star =
      optimal_cost ? *optimal_cost : lqr::optimal_gain(prob).second;

  const Eigen::Index m = prob.m();
  const Eigen::Index n = prob.n();
  const linalg::Tolerances tol;

  auto field = [&prob, j_star, m, n, tol](const Vec& y) {
    FieldEval e;
    Mat K(m, n);
    for (Eigen::Index r = 0; r < m; ++r)
      for (Eigen::Index c = 0; c < n; ++c) K(r, c) = y(r * n + c);

    const Mat F = prob.A - prob.B * K;
    if (!(linalg::spectral_abscissa(F).abscissa < -tol.hurwitz_margin)) {
      return e;  // in_domain stays false
    }
    Mat P, Y;
    try {
      P = linalg::solve_lyapunov_ct(F, K.transpose() * prob.R * K + prob.Q,
                                    linalg::LyapunovForm::Transposed);
      Y = linalg::solve_lyapunov_ct(F, Mat::Identity(n, n),
                                    linalg::LyapunovForm::Standard);
    } catch (const NumericalError&) {
      // solver accuracy gives out this close to the stability border;
      // treat the point as outside so the step gets rejected and halved
      return e;
    }
    const Mat grad = 2.0 * (prob.R * K - prob.B.transpose() * P) * Y;

    e.in_domain = true;
    e.gap = P.trace() - j_star;
    e.grad_norm = grad.norm();
    e.deriv.resize(m * n);
    for (Eigen::Index r = 0; r < m; ++r)
      for (Eigen::Index c = 0; c < n; ++c) e.deriv(r * n + c) = -grad(r, c);
    return e;
  };

  Vec y0(m * n);
  for (Eigen::Index r = 0; r < m; ++r)
    for (Eigen::Index c = 0; c < n; ++c) y0(r * n + c) = K0.K(r, c);

  return integrate(field, y0, cfg, /*use_gap_stop=*/true);
}

Trajectory integrate_scalar_gradient_flow(const ScalarFn& f, double x0,
                                          const FlowConfig& cfg, double f_min) {
  if (!f.value || !f.deriv) {
    throw std::invalid_argument("ScalarFn needs both value and deriv");
  }
  auto field = [&f, f_min](const Vec& y) {
    FieldEval e;
    const double x = y(0);
    const double g = f.deriv(x);
    e.in_domain = std::isfinite(g);
    e.deriv = Vec::Constant(1, -g);
    e.grad_norm = std::abs(g);
    e.gap = f.value(x) - f_min;
    return e;
  };
  return integrate(field, Vec::Constant(1, x0), cfg, /*use_gap_stop=*/true);
}

Trajectory integrate_prox_flow_scalar(const ScalarFn& f, double x0,
                                      const FlowConfig& cfg,
                                      std::optional<double> regularized_min) {
  if (!f.value || !f.deriv) {
    throw std::invalid_argument("ScalarFn needs both value and deriv");
  }

  auto field = [&f, &regularized_min](const Vec& y) {
    FieldEval e;
    const double x = y(0);
    const double z = x - f.deriv(x);
    const double prox = (z > 0.0 ? 1.0 : (z < 0.0 ? -1.0 : 0.0)) *
                        std::max(std::abs(z) - 1.0, 0.0);
    const double xdot = -x + prox;
    e.in_domain = std::isfinite(xdot);
    e.deriv = Vec::Constant(1, xdot);
    e.grad_norm = std::abs(xdot);
    const double reg_cost = f.value(x) + std::abs(x);
    e.gap = regularized_min ? reg_cost - *regularized_min : reg_cost;
    return e;
  };

  Trajectory traj = integrate(field, Vec::Constant(1, x0), cfg,
                              /*use_gap_stop=*/regularized_min.has_value());
  if (!regularized_min) {
    // gaps relative to the running minimum of the regularized cost
    double lo = std::numeric_limits<double>::infinity();
    for (const Sample& s : traj.samples) lo = std::min(lo, s.gap);
    for (Sample& s : traj.samples) s.gap -= lo;
  }
  return traj;
}

std::vector<std::pair<double, double>> instantaneous_rate(const Trajectory& traj) {
  std::vector<std::pair<double, double>> rates;
  rates.reserve(traj.samples.size());
  for (const Sample& s : traj.samples) {
    if (s.gap <= 0.0) continue;
    rates.emplace_back(s.t, s.grad_norm * s.grad_norm / s.gap);
  }
  return rates;
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& out) {
  const Eigen::Index dim = traj.samples.empty() ? 0 : traj.samples[0].param.size();
  std::vector<std::string> header{"t", "gap", "grad_norm"};
  for (Eigen::Index i = 0; i < dim; ++i) {
    header.push_back("param" + std::to_string(i));
  }
  csv::write_header(out, header);
  std::vector<double> row(header.size());
  for (const Sample& s : traj.samples) {
    row[0] = s.t;
    row[1] = s.gap;
    row[2] = s.grad_norm;
    for (Eigen::Index i = 0; i < dim; ++i) {
      row[3 + static_cast<std::size_t>(i)] = s.param(i);
    }
    csv::write_row(out, row);
  }
}

}  // namespace plilab::flow
