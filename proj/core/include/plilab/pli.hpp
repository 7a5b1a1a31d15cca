#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "plilab/flow.hpp"

namespace plilab::pli {

/// A comparison function alpha: [0, inf) -> [0, inf) used as a lower bound
/// on the gradient norm in terms of the optimality gap. Positive definite
/// by construction: alpha(0) = 0, alpha(r) > 0 for r > 0.
class ComparisonFn {
 public:
  enum class Kind { SqrtMu, Ksat, TabulatedPD };

  /// alpha(r) = sqrt(mu r), the classic gradient-dominance bound.
  static ComparisonFn sqrt_mu(double mu);

  /// alpha(r) = sqrt(a r / (b + r)): strictly increasing, saturating at
  /// sqrt(a).
  static ComparisonFn ksat(double a, double b);

  /// Piecewise-linear positive-definite function through (r_i, alpha_i);
  /// the grid must start at (0, 0), be increasing in r, with alpha_i > 0
  /// for r_i > 0. Values beyond the grid hold the last alpha.
  static ComparisonFn tabulated(std::vector<std::pair<double, double>> pts);

  double operator()(double r) const;
  Kind kind() const { return kind_; }
  double mu() const { return mu_; }
  double a() const { return a_; }
  double b() const { return b_; }

 private:
  ComparisonFn() = default;
  Kind kind_ = Kind::SqrtMu;
  double mu_ = 1.0, a_ = 1.0, b_ = 1.0;
  std::vector<std::pair<double, double>> pts_;
};

/// One observation: optimality gap and gradient norm at some point.
struct GapGradSample {
  double gap;
  double grad_norm;
};

/// True when alpha(gap) <= grad_norm at every sample, i.e. alpha is an
/// observed lower bound on the gradient in terms of the gap. rtol gives a
/// small multiplicative slack; samples with gap below the 1e-14 floor are
/// ignored.
bool lower_bounds(const ComparisonFn& alpha,
                  const std::vector<GapGradSample>& samples, double rtol = 1e-9);

struct KsatFit {
  double a;
  double b;
  double residual;  // RMS log-domain residual over the binned minima
};

enum class Verdict {
  ConsistentWithGlobal,
  ConsistentWithKsat,
  ConsistentWithSemiGlobalOnly,
  LocalOnly,
  Inconclusive,
};

const char* verdict_name(Verdict v);

struct PliReport {
  std::vector<double> eps_grid;
  /// Best observed PLI constant per sublevel set; absent where the
  /// sublevel set caught no sample.
  std::vector<std::optional<double>> mu_hat;
  std::optional<KsatFit> ksat;
  Verdict verdict = Verdict::Inconclusive;
};

/// mu_hat(eps) = min over samples with gap <= eps of grad_norm^2 / gap.
/// Samples with gap < 1e-14 are excluded (0/0 guard). Sampling can only
/// overestimate an infimum, so each value is an upper bound on the true
/// largest PLI constant of that sublevel set. Non-increasing in eps.
std::vector<std::optional<double>> empirical_mu(
    const std::vector<GapGradSample>& samples, const std::vector<double>& eps_grid);

/// Least-squares fit of alpha(r)^2 = a r / (b + r) to the binned minima of
/// grad_norm^2 versus gap (log-domain residuals), searched over
/// a in [1e-8, 1e4], b in [1e-8, 1e6] (log grid then Gauss-Newton).
/// The returned pair always satisfies the validity requirement that the
/// fitted alpha never exceeds an observed minimum: a lower bound must
/// lower-bound. Returns nullopt when no valid pair exists in the box.
std::optional<KsatFit> fit_ksat(const std::vector<GapGradSample>& samples);

/// 16 geometric points from 1e-3 * (max observed gap) to the max.
std::vector<double> default_eps_grid(const std::vector<GapGradSample>& samples);

/// Full empirical classification: mu_hat curve, K_SAT fit, verdict.
/// Verdicts are deliberately phrased "consistent with": samples from open,
/// unbounded sets cannot prove a global infimum.
PliReport diagnose(const std::vector<GapGradSample>& samples,
                   std::vector<double> eps_grid = {});

/// Convenience: evaluate cost/gradient oracles over points and diagnose.
PliReport diagnose_oracles(const std::function<double(double)>& cost,
                           const std::function<double(double)>& grad,
                           const std::vector<double>& points, double f_min,
                           std::vector<double> eps_grid = {});

/// Two-branch linear-exponential certificate for a trajectory: a linear
/// bound with slope m down to the split time and an exponential bound with
/// rate mu after it.
struct GlesCertificate {
  double t_split;
  double slope_m;
  double rate_mu;
  double max_violation;   // max over samples of gap - bound
  double sup_grad_sq;     // observed sup of grad_norm^2 (bounds the slope)
  bool valid;             // max_violation <= 1e-6 * initial gap
};

/// Certifies the trajectory against the two-branch bound. The split time is
/// where the trajectory enters the sublevel set at entry_fraction of the
/// initial gap. Slopes and rates are fitted by least squares and then
/// tightened until the bound actually holds where possible (m never above
/// the observed sup of grad_norm^2). Throws CertificationError for
/// trajectories that are too short (< 10 samples), not monotone, or never
/// enter the sublevel set.
GlesCertificate certify_gles(const flow::Trajectory& traj,
                             double entry_fraction = 0.1);

/// A synthetic scalar cost with a documented ground-truth class.
struct ZooCost {
  std::string name;
  std::function<double(double)> value;
  std::function<double(double)> deriv;
  Verdict ground_truth;
  std::optional<std::pair<double, double>> ksat_truth;  // exact (a, b) if any
  std::optional<double> gpli_mu;  // mu with grad^2 >= mu * gap, if global
  std::vector<double> sample_xs;  // canonical sampling grid
  double f_min;
  double flow_x0;  // representative flow start (gap about 8)
};

/// The catalog: one cost per class.
///   quadratic    x^2/2                      global PLI (constant 2)
///   ksat         grad^2 = gap/(1+gap) exactly  K_SAT with (a, b) = (1, 1)
///   saturating   (1 - e^{-x})^2 / 2         semi-global only
///   double_well  2 x^2 (x - 2)^2            local only (critical gap > 0)
std::vector<ZooCost> zoo_examples();

/// Samples a zoo cost over its canonical grid.
std::vector<GapGradSample> sample_zoo(const ZooCost& cost);

/// CSV "eps,mu_hat" (absent values as nan).
void write_report_csv(const PliReport& report, std::ostream& out);

/// JSON sidecar {"ksat": {"a", "b", "residual"} | null, "verdict": "..."}.
std::string report_sidecar_json(const PliReport& report);

}  // namespace plilab::pli
