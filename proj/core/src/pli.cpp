#include "plilab/pli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>

#include "plilab/csv.hpp"

namespace plilab::pli {

namespace {

constexpr double kGapFloor = 1e-14;  // below this, gap/grad ratios are 0/0 noise

// classifier thresholds (see diagnose)
constexpr double kZeroRel = 1e-9;  // mu_hat this far below its max counts as 0
constexpr double kFlatRel = 0.5;   // mu_hat this flat counts as global
constexpr double kTailRel = 0.1;   // tail gradient floor vs best bin

// K_SAT search box
constexpr double kAMin = 1e-8, kAMax = 1e4;
constexpr double kBMin = 1e-8, kBMax = 1e6;

struct Bin {
  double r;       // gap at which the bin's minimum was attained
  double g2_min;  // min observed grad_norm^2 in the bin
};

// Geometric binning of (gap, grad^2) with per-bin minima. The gap of each
// bin is the argmin, not the bin center, so exactly-on-model data fits
// exactly.
std::vector<Bin> bin_minima(const std::vector<GapGradSample>& samples,
                            int n_bins = 32) {
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const auto& s : samples) {
    if (s.gap < kGapFloor) continue;
    lo = std::min(lo, s.gap);
    hi = std::max(hi, s.gap);
  }
  if (!(hi > lo)) return {};

  const double llo = std::log(lo), lhi = std::log(hi);
  std::vector<Bin> best(static_cast<std::size_t>(n_bins),
                        {0.0, std::numeric_limits<double>::infinity()});
  for (const auto& s : samples) {
    if (s.gap < kGapFloor) continue;
    int i = static_cast<int>((std::log(s.gap) - llo) / (lhi - llo) * n_bins);
    i = std::clamp(i, 0, n_bins - 1);
    Bin& b = best[static_cast<std::size_t>(i)];
    const double g2 = s.grad_norm * s.grad_norm;
    if (g2 < b.g2_min) b = {s.gap, g2};
  }
  std::vector<Bin> bins;
  for (const Bin& b : best) {
    if (std::isfinite(b.g2_min)) bins.push_back(b);
  }
  return bins;
}

double ksat_objective(double la, double lb, const std::vector<Bin>& bins) {
  // sum of squared log residuals of a r/(b+r) against g2_min
  const double a = std::exp(la), b = std::exp(lb);
  double s = 0.0;
  for (const Bin& bin : bins) {
    const double model = a * bin.r / (b + bin.r);
    const double res = std::log(model) - std::log(bin.g2_min);
    s += res * res;
  }
  return s;
}

}  // namespace

ComparisonFn ComparisonFn::sqrt_mu(double mu) {
  if (!(mu > 0.0)) throw std::invalid_argument("mu must be positive");
  ComparisonFn f;
  f.kind_ = Kind::SqrtMu;
  f.mu_ = mu;
  return f;
}

ComparisonFn ComparisonFn::ksat(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw std::invalid_argument("K_SAT constants must be positive");
  }
  ComparisonFn f;
  f.kind_ = Kind::Ksat;
  f.a_ = a;
  f.b_ = b;
  return f;
}

ComparisonFn ComparisonFn::tabulated(std::vector<std::pair<double, double>> pts) {
  if (pts.size() < 2 || pts.front().first != 0.0 || pts.front().second != 0.0) {
    throw std::invalid_argument("tabulated grid must start at (0, 0)");
  }
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (!(pts[i].first > pts[i - 1].first)) {
      throw std::invalid_argument("tabulated grid must be increasing in r");
    }
    if (!(pts[i].second > 0.0)) {
      throw std::invalid_argument("tabulated alpha must be positive for r > 0");
    }
  }
  ComparisonFn f;
  f.kind_ = Kind::TabulatedPD;
  f.pts_ = std::move(pts);
  return f;
}

double ComparisonFn::operator()(double r) const {
  if (!(r >= 0.0)) throw std::invalid_argument("r must be >= 0");
  switch (kind_) {
    case Kind::SqrtMu:
      return std::sqrt(mu_ * r);
    case Kind::Ksat:
      return std::sqrt(a_ * r / (b_ + r));
    case Kind::TabulatedPD: {
      if (r >= pts_.back().first) return pts_.back().second;
      auto it = std::upper_bound(
          pts_.begin(), pts_.end(), r,
          [](double v, const std::pair<double, double>& p) { return v < p.first; });
      const auto& hi = *it;
      const auto& lo = *(it - 1);
      const double t = (r - lo.first) / (hi.first - lo.first);
      return lo.second + t * (hi.second - lo.second);
    }
  }
  return 0.0;
}

bool lower_bounds(const ComparisonFn& alpha,
                  const std::vector<GapGradSample>& samples, double rtol) {
  for (const auto& s : samples) {
    if (s.gap < kGapFloor) continue;
    if (alpha(s.gap) > s.grad_norm * (1.0 + rtol)) return false;
  }
  return true;
}

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::ConsistentWithGlobal: return "ConsistentWithGlobal";
    case Verdict::ConsistentWithKsat: return "ConsistentWithKsat";
    case Verdict::ConsistentWithSemiGlobalOnly: return "ConsistentWithSemiGlobalOnly";
    case Verdict::LocalOnly: return "LocalOnly";
    case Verdict::Inconclusive: return "Inconclusive";
  }
  return "Inconclusive";
}

std::vector<std::optional<double>> empirical_mu(
    const std::vector<GapGradSample>& samples,
    const std::vector<double>& eps_grid) {
  for (std::size_t i = 1; i < eps_grid.size(); ++i) {
    if (!(eps_grid[i] > eps_grid[i - 1])) {
      throw std::invalid_argument("eps grid must be strictly increasing");
    }
  }
  for (const auto& s : samples) {
    if (s.gap < 0.0) throw std::invalid_argument("samples need gap >= 0");
  }

  // sort once; mu_hat over a sublevel set is a prefix minimum
  std::vector<GapGradSample> sorted(samples);
  std::sort(sorted.begin(), sorted.end(),
            [](const GapGradSample& x, const GapGradSample& y) {
              return x.gap < y.gap;
            });

  std::vector<std::optional<double>> out;
  out.reserve(eps_grid.size());
  double running = std::numeric_limits<double>::infinity();
  std::size_t j = 0;
  bool any = false;
  for (double eps : eps_grid) {
    while (j < sorted.size() && sorted[j].gap <= eps) {
      if (sorted[j].gap >= kGapFloor) {
        running = std::min(running,
                           sorted[j].grad_norm * sorted[j].grad_norm / sorted[j].gap);
        any = true;
      }
      ++j;
    }
    if (any) {
      out.emplace_back(running);
    } else {
      out.emplace_back(std::nullopt);  // sublevel set caught no sample
    }
  }
  return out;
}

std::vector<double> default_eps_grid(const std::vector<GapGradSample>& samples) {
  double hi = 0.0;
  for (const auto& s : samples) hi = std::max(hi, s.gap);
  if (!(hi > 0.0)) hi = 1.0;
  const double lo = 1e-3 * hi;
  std::vector<double> grid(16);
  for (int i = 0; i < 16; ++i) {
    grid[static_cast<std::size_t>(i)] = lo * std::pow(hi / lo, i / 15.0);
  }
  grid.back() = hi;
  return grid;
}

std::optional<KsatFit> fit_ksat(const std::vector<GapGradSample>& samples) {
  const std::vector<Bin> bins = bin_minima(samples);
  if (bins.size() < 3) return std::nullopt;
  for (const Bin& b : bins) {
    if (!(b.g2_min > 0.0)) return std::nullopt;  // a zero gradient at
    // positive gap admits no positive saturating lower bound
  }

  // coarse log grid
  const int na = 49, nb = 49;
  double best_la = std::log(kAMin), best_lb = std::log(kBMin);
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < na; ++i) {
    const double la = std::log(kAMin) +
                      (std::log(kAMax) - std::log(kAMin)) * i / (na - 1);
    for (int j = 0; j < nb; ++j) {
      const double lb = std::log(kBMin) +
                        (std::log(kBMax) - std::log(kBMin)) * j / (nb - 1);
      const double v = ksat_objective(la, lb, bins);
      if (v < best - 1e-15 ||
          (std::abs(v - best) <= 1e-15 && la < best_la)) {  // ties: smaller a
        best = v;
        best_la = la;
        best_lb = lb;
      }
    }
  }

  // Gauss-Newton on (log a, log b); residual_k = la + log r - log(b+r) - log g
  double la = best_la, lb = best_lb;
  for (int it = 0; it < 80; ++it) {
    double j11 = 0, j12 = 0, j22 = 0, g1 = 0, g2 = 0;
    const double b = std::exp(lb);
    for (const Bin& bin : bins) {
      const double w = -b / (b + bin.r);  // d residual / d lb
      const double res = la + std::log(bin.r) - std::log(b + bin.r) -
                         std::log(bin.g2_min);
      j11 += 1.0;
      j12 += w;
      j22 += w * w;
      g1 += res;
      g2 += res * w;
    }
    const double det = j11 * j22 - j12 * j12;
    if (std::abs(det) < 1e-30) break;
    const double dla = (j22 * g1 - j12 * g2) / det;
    const double dlb = (j11 * g2 - j12 * g1) / det;
    la = std::clamp(la - dla, std::log(kAMin), std::log(kAMax));
    lb = std::clamp(lb - dlb, std::log(kBMin), std::log(kBMax));
    if (std::abs(dla) + std::abs(dlb) < 1e-14) break;
  }
  if (ksat_objective(la, lb, bins) > best) {  // keep the grid pick if GN lost it
    la = best_la;
    lb = best_lb;
  }

  double a = std::exp(la);
  const double b = std::exp(lb);

  // validity: the fitted alpha must sit at or below every observation,
  // not just the binned minima (a lower bound must lower-bound)
  double a_cap = std::numeric_limits<double>::infinity();
  for (const auto& s : samples) {
    if (s.gap < kGapFloor) continue;
    a_cap = std::min(a_cap, s.grad_norm * s.grad_norm * (b + s.gap) / s.gap);
  }
  a = std::min(a, a_cap * (1.0 - 1e-12));
  if (!(a >= kAMin)) return std::nullopt;  // no valid pair in the box

  KsatFit fit;
  fit.a = a;
  fit.b = b;
  fit.residual = std::sqrt(ksat_objective(std::log(a), std::log(b), bins) /
                           static_cast<double>(bins.size()));
  // the clamp above guarantees this; keep the cross-check cheap and loud
  if (!lower_bounds(ComparisonFn::ksat(fit.a, fit.b), samples)) {
    throw NumericalError("K_SAT fit failed its own validity check");
  }
  return fit;
}

PliReport diagnose(const std::vector<GapGradSample>& samples,
                   std::vector<double> eps_grid) {
  PliReport report;
  report.eps_grid = eps_grid.empty() ? default_eps_grid(samples) : std::move(eps_grid);
  report.mu_hat = empirical_mu(samples, report.eps_grid);
  report.ksat = fit_ksat(samples);

  double mu_max = 0.0, mu_last = 0.0;
  bool any = false, last_present = false;
  for (std::size_t i = 0; i < report.mu_hat.size(); ++i) {
    if (!report.mu_hat[i]) continue;
    any = true;
    mu_max = std::max(mu_max, *report.mu_hat[i]);
    mu_last = *report.mu_hat[i];
    last_present = (i + 1 == report.mu_hat.size());
  }

  if (!any || !(mu_max > 0.0)) {
    report.verdict = Verdict::Inconclusive;
    return report;
  }
  if (!last_present) {
    // the largest sublevel set saw no sample; say nothing global
    report.verdict = Verdict::Inconclusive;
    return report;
  }

  if (mu_last <= kZeroRel * mu_max) {
    // an (effectively) vanished constant on some sublevel set: the bound
    // survives only locally
    report.verdict = Verdict::LocalOnly;
    return report;
  }
  if (mu_last >= kFlatRel * mu_max) {
    report.verdict = Verdict::ConsistentWithGlobal;
    return report;
  }

  // mu_hat decays but stays positive: K_SAT iff the gradient floor does not
  // vanish at large gaps (nonzero liminf) and a valid saturating fit exists
  const std::vector<Bin> bins = bin_minima(samples);
  double ref = 0.0;
  for (const Bin& b : bins) ref = std::max(ref, std::sqrt(b.g2_min));
  double tail_floor = std::numeric_limits<double>::infinity();
  if (!bins.empty()) {
    const double llo = std::log(bins.front().r), lhi = std::log(bins.back().r);
    const double cut = lhi - (lhi - llo) / 3.0;
    for (const Bin& b : bins) {
      if (std::log(b.r) >= cut) tail_floor = std::min(tail_floor, std::sqrt(b.g2_min));
    }
  }
  if (report.ksat && std::isfinite(tail_floor) && tail_floor >= kTailRel * ref) {
    report.verdict = Verdict::ConsistentWithKsat;
  } else {
    report.verdict = Verdict::ConsistentWithSemiGlobalOnly;
  }
  return report;
}

PliReport diagnose_oracles(const std::function<double(double)>& cost,
                           const std::function<double(double)>& grad,
                           const std::vector<double>& points, double f_min,
                           std::vector<double> eps_grid) {
  std::vector<GapGradSample> samples;
  samples.reserve(points.size());
  for (double x : points) {
    samples.push_back({cost(x) - f_min, std::abs(grad(x))});
  }
  return diagnose(samples, std::move(eps_grid));
}

GlesCertificate certify_gles(const flow::Trajectory& traj, double entry_fraction) {
  const auto& s = traj.samples;
  if (s.size() < 10) {
    throw CertificationError("trajectory too short to certify (< 10 samples)");
  }
  const double gap0 = s.front().gap;
  if (!(gap0 > 0.0)) {
    throw CertificationError("initial gap must be positive");
  }
  const double slack = 1e-10 * gap0;
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (s[i].gap > s[i - 1].gap + slack) {
      throw CertificationError("trajectory gap is not monotone non-increasing");
    }
  }

  // split where the trajectory enters the entry_fraction sublevel set
  std::size_t isplit = s.size();
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i].gap <= entry_fraction * gap0) {
      isplit = i;
      break;
    }
  }
  if (isplit == s.size()) {
    throw CertificationError("trajectory never enters the target sublevel set");
  }
  if (isplit < 2 || s.size() - isplit < 2) {
    throw CertificationError("too few samples on one side of the split");
  }
  const double t_split = s[isplit].t;
  const double gap_split = s[isplit].gap;

  GlesCertificate cert;
  cert.t_split = t_split;
  cert.sup_grad_sq = 0.0;
  for (const auto& p : s) {
    cert.sup_grad_sq = std::max(cert.sup_grad_sq, p.grad_norm * p.grad_norm);
  }

  // linear branch: least squares of gap on t over [0, t_split], then raised
  // to the max secant into the anchor so the bound holds; the secants are
  // averages of grad_norm^2, so this never exceeds sup_grad_sq
  {
    double st = 0, sg = 0, stt = 0, stg = 0;
    const double n = static_cast<double>(isplit + 1);
    for (std::size_t i = 0; i <= isplit; ++i) {
      st += s[i].t;
      sg += s[i].gap;
      stt += s[i].t * s[i].t;
      stg += s[i].t * s[i].gap;
    }
    const double denom = n * stt - st * st;
    double m_fit = denom > 0.0 ? -(n * stg - st * sg) / denom : 0.0;
    double m_req = 0.0;
    for (std::size_t i = 0; i < isplit; ++i) {
      m_req = std::max(m_req, (s[i].gap - gap_split) / (t_split - s[i].t));
    }
    cert.slope_m = std::max({m_fit, m_req, 1e-300});
  }

  // exponential branch: least squares of log gap on t after the split,
  // lowered to the worst secant so the bound holds
  {
    double st = 0, sl = 0, stt = 0, stl = 0;
    int n = 0;
    double mu_req = std::numeric_limits<double>::infinity();
    for (std::size_t i = isplit; i < s.size(); ++i) {
      if (!(s[i].gap > 0.0)) continue;
      const double lg = std::log(s[i].gap);
      st += s[i].t;
      sl += lg;
      stt += s[i].t * s[i].t;
      stl += s[i].t * lg;
      ++n;
      if (i > isplit && s[i].t > t_split) {
        mu_req = std::min(mu_req, (std::log(gap_split) - lg) / (s[i].t - t_split));
      }
    }
    if (n < 2) {
      throw CertificationError("too few positive-gap samples after the split");
    }
    const double denom = n * stt - st * st;
    double mu_fit = denom > 0.0 ? -(n * stl - st * sl) / denom : 0.0;
    if (std::isfinite(mu_req)) mu_fit = std::min(mu_fit, mu_req);
    cert.rate_mu = std::max(mu_fit, 1e-300);
  }

  cert.max_violation = -std::numeric_limits<double>::infinity();
  for (const auto& p : s) {
    const double bound = (p.t <= t_split)
                             ? gap_split + cert.slope_m * (t_split - p.t)
                             : gap_split * std::exp(-cert.rate_mu * (p.t - t_split));
    cert.max_violation = std::max(cert.max_violation, p.gap - bound);
  }
  cert.valid = cert.max_violation <= 1e-6 * gap0;
  return cert;
}

std::vector<ZooCost> zoo_examples() {
  std::vector<ZooCost> zoo;

  auto linspace = [](double lo, double hi, int n) {
    std::vector<double> xs(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      xs[static_cast<std::size_t>(i)] =
          lo + (static_cast<double>(i) * (hi - lo)) / (n - 1);
    }
    return xs;
  };
  auto geomspace = [](double lo, double hi, int n) {
    std::vector<double> xs(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      xs[static_cast<std::size_t>(i)] = lo * std::pow(hi / lo, i / double(n - 1));
    }
    return xs;
  };

  {
    ZooCost c;
    c.name = "quadratic";
    c.value = [](double x) { return 0.5 * x * x; };
    c.deriv = [](double x) { return x; };
    c.ground_truth = Verdict::ConsistentWithGlobal;
    c.gpli_mu = 1.0;  // f = mu x^2 / 2 with mu = 1: grad^2 = 2 mu gap
    c.sample_xs = linspace(-10.0, 10.0, 401);
    c.f_min = 0.0;
    c.flow_x0 = 4.0;  // gap 8
    zoo.push_back(std::move(c));
  }

  {
    // Cost defined implicitly by grad^2 = gap / (1 + gap): inverting
    // x(g) = sqrt(g (1 + g)) + asinh(sqrt(g)), the solution of
    // dg/dx = sqrt(g / (1 + g)), g(0) = 0.
    auto x_of_g = [](double g) {
      return std::sqrt(g * (1.0 + g)) + std::asinh(std::sqrt(g));
    };
    auto g_of_x = [x_of_g](double x) {
      const double ax = std::abs(x);
      if (ax == 0.0) return 0.0;
      double lo = 0.0, hi = std::max(ax, 1.0);
      while (x_of_g(hi) < ax) hi *= 2.0;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (x_of_g(mid) < ax) {
          lo = mid;
        } else {
          hi = mid;
        }
        if (hi - lo <= 1e-16 * std::max(1.0, hi)) break;
      }
      return 0.5 * (lo + hi);
    };
    ZooCost c;
    c.name = "ksat";
    c.value = g_of_x;
    c.deriv = [g_of_x](double x) {
      const double g = g_of_x(x);
      const double mag = std::sqrt(g / (1.0 + g));
      return x >= 0.0 ? mag : -mag;
    };
    c.ground_truth = Verdict::ConsistentWithKsat;
    c.ksat_truth = {{1.0, 1.0}};
    c.sample_xs = geomspace(0.07, 103.5, 400);  // gaps from ~1e-3 to ~100
    c.f_min = 0.0;
    c.flow_x0 = 10.25;  // gap about 8
    zoo.push_back(std::move(c));
  }

  {
    ZooCost c;
    c.name = "saturating";
    c.value = [](double x) {
      const double e = 1.0 - std::exp(-x);
      return 0.5 * e * e;
    };
    c.deriv = [](double x) {
      return (1.0 - std::exp(-x)) * std::exp(-x);
    };
    c.ground_truth = Verdict::ConsistentWithSemiGlobalOnly;
    c.sample_xs = linspace(0.01, 8.0, 400);
    c.f_min = 0.0;
    c.flow_x0 = 1.0;
    zoo.push_back(std::move(c));
  }

  {
    // Two global minima at 0 and 2; the interior critical point x = 1 has
    // gap 2, so no PLI-type bound survives past eps = 2.
    ZooCost c;
    c.name = "double_well";
    c.value = [](double x) {
      const double u = x * (x - 2.0);
      return 2.0 * u * u;
    };
    c.deriv = [](double x) { return 8.0 * x * (x - 1.0) * (x - 2.0); };
    c.ground_truth = Verdict::LocalOnly;
    c.sample_xs = linspace(-0.5, 2.5, 601);  // grid hits x = 1 exactly
    c.f_min = 0.0;
    c.flow_x0 = -0.5;
    zoo.push_back(std::move(c));
  }

  return zoo;
}

std::vector<GapGradSample> sample_zoo(const ZooCost& cost) {
  std::vector<GapGradSample> samples;
  samples.reserve(cost.sample_xs.size());
  for (double x : cost.sample_xs) {
    samples.push_back({cost.value(x) - cost.f_min, std::abs(cost.deriv(x))});
  }
  return samples;
}

void write_report_csv(const PliReport& report, std::ostream& out) {
  csv::write_header(out, {"eps", "mu_hat"});
  for (std::size_t i = 0; i < report.eps_grid.size(); ++i) {
    const double mu = report.mu_hat[i]
                          ? *report.mu_hat[i]
                          : std::numeric_limits<double>::quiet_NaN();
    csv::write_row(out, {report.eps_grid[i], mu});
  }
}

std::string report_sidecar_json(const PliReport& report) {
  std::ostringstream os;
  os << "{\"ksat\": ";
  if (report.ksat) {
    os << "{\"a\": " << csv::format_double(report.ksat->a)
       << ", \"b\": " << csv::format_double(report.ksat->b)
       << ", \"residual\": " << csv::format_double(report.ksat->residual) << "}";
  } else {
    os << "null";
  }
  os << ", \"verdict\": \"" << verdict_name(report.verdict) << "\"}";
  return os.str();
}

}  // namespace plilab::pli
