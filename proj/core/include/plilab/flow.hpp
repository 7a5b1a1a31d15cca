#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "plilab/lqr.hpp"

namespace plilab::flow {

enum class Terminal {
  Converged,    ///< gap or gradient norm tolerance reached
  MaxTime,      ///< integrated up to max_time
  DomainExit,   ///< step size underflowed while rejecting domain exits
  StepFailure,  ///< step size underflowed on error control
};

struct Sample {
  double t;
  Vec param;        // flattened parameter (row-major for matrix gains)
  double gap;       // cost above the optimum
  double grad_norm;
};

struct Trajectory {
  std::vector<Sample> samples;
  Terminal terminal = Terminal::MaxTime;
  double gap_tol_used = 0.0;  // resolved absolute gap tolerance
};

/// Integrator configuration. gap_tol <= 0 selects the default of
/// 1e-10 * (initial gap), resolved at the start of the run; all other
/// fields must be positive with min_step < initial_step.
struct FlowConfig {
  double max_time = 100.0;
  double gap_tol = -1.0;
  double grad_tol = 1e-9;
  double rel_step_tol = 1e-8;
  double initial_step = 1e-3;
  double min_step = 1e-12;
  double record_every = 0.01;
};

/// Integrates the gradient flow K' = -grad J(K) with an embedded
/// Dormand-Prince 4(5) pair. A step is rejected and halved when a stage or
/// the trial endpoint leaves the stabilizing set, or when the local error
/// estimate exceeds rel_step_tol; internal steps never exceed record_every.
/// The solution therefore stays in the stabilizing set by construction.
/// Step underflow is recorded in the terminal status, not thrown.
/// optimal_cost, when known, skips the internal Riccati solve.
Trajectory integrate_gradient_flow(const lqr::LqrProblem& prob,
                                   const lqr::Gain& K0, const FlowConfig& cfg,
                                   std::optional<double> optimal_cost = {});

/// A scalar cost given by value and derivative.
struct ScalarFn {
  std::function<double(double)> value;
  std::function<double(double)> deriv;
};

/// Integrates the plain scalar gradient flow x' = -f'(x) with the same
/// adaptive scheme; gaps are measured against f_min.
Trajectory integrate_scalar_gradient_flow(const ScalarFn& f, double x0,
                                          const FlowConfig& cfg,
                                          double f_min = 0.0);

/// Integrates the scalar proximal gradient flow (regularizer weight 1)
///   x' = -x + sign(x - f'(x)) max(|x - f'(x)| - 1, 0).
/// Samples carry the regularized cost f(x) + |x| above regularized_min when
/// it is supplied; otherwise gaps are measured against the running minimum
/// over the recorded trajectory (and the gap stopping rule is disabled).
/// grad_norm records |x'|, the proximal fixed-point residual.
Trajectory integrate_prox_flow_scalar(const ScalarFn& f, double x0,
                                      const FlowConfig& cfg,
                                      std::optional<double> regularized_min = {});

/// Per-sample local exponential rate m(t) = grad_norm(t)^2 / gap(t); this is
/// the best instantaneous rate since d(gap)/dt = -grad_norm^2 along the
/// flow. Samples with gap <= 0 are skipped.
std::vector<std::pair<double, double>> instantaneous_rate(const Trajectory& traj);

/// CSV with header t,gap,grad_norm,param0,... at full float64 precision.
void write_trajectory_csv(const Trajectory& traj, std::ostream& out);

}  // namespace plilab::flow
