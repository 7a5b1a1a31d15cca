#include "plilab/scalar_lqr.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace plilab::scalar {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

void require_stabilizing_ct(const ScalarCt& sys, double k) {
  if (!(k > sys.a)) {
    std::ostringstream os;
    os << "k = " << k << " does not stabilize a = " << sys.a
       << " (closed loop a - k = " << sys.a - k << ")";
    throw StabilityError(os.str(), sys.a - k);
  }
}

// Golden-section minimum of f on [lo, hi] (f unimodal there), relative
// interval tolerance 1e-12.
template <typename F>
double golden_min(F&& f, double lo, double hi) {
  constexpr double inv_phi = 0.6180339887498948482;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > 1e-12 * std::max(1.0, std::abs(a) + std::abs(b))) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

ScalarCt::ScalarCt(double a_in, double q_in, double r_in, double b)
    : a(a_in), q(q_in), r(r_in) {
  if (b != 1.0) {
    throw std::invalid_argument(
        "ScalarCt fixes b = 1: fold the input scaling b into the magnitude "
        "of u instead of passing b != 1");
  }
  if (!(q > 0.0) || !(r > 0.0)) {
    throw std::invalid_argument("q and r must be positive");
  }
  if (!std::isfinite(a)) throw std::invalid_argument("a must be finite");
}

double kstar(const ScalarCt& sys) {
  // positive root of 2 a p - p^2 / r + q = 0, then k* = p*/r
  return sys.a + std::sqrt(sys.a * sys.a + sys.q / sys.r);
}

CtForms ct_closed_forms(const ScalarCt& sys, double k) {
  require_stabilizing_ct(sys, k);
  CtForms f;
  f.ell = 1.0 / (2.0 * (k - sys.a));
  f.p = (sys.r * k * k + sys.q) * f.ell;
  f.grad = 2.0 * (sys.r * k - f.p) * f.ell;
  f.kstar = kstar(sys);
  f.pstar = sys.r * f.kstar;
  return f;
}

std::vector<RateRow> rate_profile(const ScalarCt& sys,
                                  const std::vector<double>& k_grid) {
  std::vector<RateRow> rows;
  rows.reserve(k_grid.size());
  for (double k : k_grid) {
    const CtForms f = ct_closed_forms(sys, k);
    RateRow row;
    row.k = k;
    row.grad_sq = f.grad * f.grad;
    const double gap = f.p - f.pstar;
    row.m = (gap > 0.0) ? row.grad_sq / gap : kNan;
    rows.push_back(row);
  }
  return rows;
}

PropositionCheck proposition_check(const ScalarCt& sys, double eps) {
  const double ks = kstar(sys);
  const double k = ks + eps;
  require_stabilizing_ct(sys, k);

  PropositionCheck pc;
  pc.eps = eps;

  const CtForms at_k = ct_closed_forms(sys, k);
  const double ell_star = 1.0 / (2.0 * (ks - sys.a));

  pc.gap_closed_form = at_k.p - at_k.pstar;
  pc.gap_rhs_ell_at_keps = at_k.ell * sys.r * eps * eps;
  pc.gap_rhs_ell_at_kstar = ell_star * sys.r * eps * eps;

  const double delta = at_k.ell * sys.r * eps * eps;
  pc.grad_closed_form = at_k.grad;
  pc.grad_rhs = at_k.ell * (sys.r * eps - delta);
  pc.grad_factor = (pc.grad_rhs != 0.0) ? pc.grad_closed_form / pc.grad_rhs : kNan;

  const double le = at_k.ell * eps;
  pc.m_rhs = sys.r * at_k.ell * (le * le - 2.0 * le + 1.0);
  pc.m_closed_form = (pc.gap_closed_form > 0.0)
                         ? pc.grad_closed_form * pc.grad_closed_form /
                               pc.gap_closed_form
                         : kNan;
  pc.m_factor = (std::isfinite(pc.m_closed_form) && pc.m_rhs != 0.0)
                    ? pc.m_closed_form / pc.m_rhs
                    : kNan;
  return pc;
}

ScalarDt::ScalarDt(ScalarCt ct_in, double h_in) : ct(ct_in), h(h_in) {
  if (!(h > 0.0)) throw std::invalid_argument("h must be positive");
}

namespace {

double dt_p(const ScalarDt& sys, double k) {
  const double acl = 1.0 + sys.h * (sys.ct.a - k);
  return sys.h * (sys.ct.r * k * k + sys.ct.q) / (1.0 - acl * acl);
}

double dt_grad(const ScalarDt& sys, double k) {
  const double h = sys.h;
  const double acl = 1.0 + h * (sys.ct.a - k);
  const double N = h * (sys.ct.q + sys.ct.r * k * k);
  const double D = 1.0 - acl * acl;
  const double dN = 2.0 * h * sys.ct.r * k;
  const double dD = 2.0 * h * acl;
  return (dN * D - N * dD) / (D * D);
}

void require_stabilizing_dt(const ScalarDt& sys, double k) {
  if (!(k > sys.k_lo() && k < sys.k_hi())) {
    std::ostringstream os;
    os << "k = " << k << " outside the discrete stability interval ("
       << sys.k_lo() << ", " << sys.k_hi() << ")";
    throw StabilityError(os.str(), std::abs(1.0 + sys.h * (sys.ct.a - k)) - 1.0);
  }
}

struct DtOptimum {
  double k_star;
  double p_star;
};

DtOptimum dt_optimum(const ScalarDt& sys) {
  const double lo = sys.k_lo();
  const double hi = sys.k_hi();
  const double off = 1e-9 * (hi - lo);  // p_d diverges at both endpoints
  const double k = golden_min([&](double x) { return dt_p(sys, x); },
                              lo + off, hi - off);
  return {k, dt_p(sys, k)};
}

}  // namespace

DtForms dt_closed_forms(const ScalarDt& sys, double k) {
  require_stabilizing_dt(sys, k);
  const DtOptimum opt = dt_optimum(sys);

  DtForms f;
  f.p_d = dt_p(sys, k);
  f.grad_d = dt_grad(sys, k);
  f.k_d_star = opt.k_star;
  f.p_d_star = opt.p_star;
  const double gap = f.p_d - f.p_d_star;
  f.m_d = (gap > 0.0) ? f.grad_d * f.grad_d / gap : kNan;
  return f;
}

std::vector<DtSweepRow> dt_rate_sweep(const ScalarCt& sys,
                                      const std::vector<double>& h_grid) {
  std::vector<DtSweepRow> rows;
  rows.reserve(h_grid.size());
  for (double h : h_grid) {
    const ScalarDt dt(sys, h);
    const DtOptimum opt = dt_optimum(dt);

    const double lo = dt.k_lo();
    const double hi = dt.k_hi();
    const double off = 1e-9 * (hi - lo);
    auto md = [&](double k) {
      const double gap = dt_p(dt, k) - opt.p_star;
      if (!(gap > 0.0)) return std::numeric_limits<double>::infinity();
      const double g = dt_grad(dt, k);
      return g * g / gap;
    };

    // 200-point scan to bracket the minimum (m_d blows up at both ends).
    const int scan = 200;
    int best = 0;
    double best_val = std::numeric_limits<double>::infinity();
    std::vector<double> ks(scan), vals(scan);
    for (int i = 0; i < scan; ++i) {
      const double t = static_cast<double>(i) / (scan - 1);
      ks[static_cast<std::size_t>(i)] = (lo + off) + t * ((hi - off) - (lo + off));
      vals[static_cast<std::size_t>(i)] = md(ks[static_cast<std::size_t>(i)]);
      if (vals[static_cast<std::size_t>(i)] < best_val) {
        best_val = vals[static_cast<std::size_t>(i)];
        best = i;
      }
    }
    int local_minima = 0;
    for (int i = 1; i + 1 < scan; ++i) {
      if (vals[static_cast<std::size_t>(i)] < vals[static_cast<std::size_t>(i - 1)] &&
          vals[static_cast<std::size_t>(i)] < vals[static_cast<std::size_t>(i + 1)]) {
        ++local_minima;
      }
    }

    DtSweepRow row;
    row.h = h;
    row.warn = local_minima > 1;
    const int ilo = std::max(0, best - 1);
    const int ihi = std::min(scan - 1, best + 1);
    row.kd_min = golden_min(md, ks[static_cast<std::size_t>(ilo)],
                            ks[static_cast<std::size_t>(ihi)]);
    row.md_min = md(row.kd_min);
    if (row.md_min > best_val) {  // golden refinement must not lose the scan
      row.kd_min = ks[static_cast<std::size_t>(best)];
      row.md_min = best_val;
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace plilab::scalar
