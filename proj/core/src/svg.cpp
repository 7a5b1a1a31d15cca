#include "plilab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace plilab::svg {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

struct Axis {
  double lo = 0.0, hi = 1.0;
  bool log = false;
  double map(double v, double pix_lo, double pix_hi) const {
    double x = log ? std::log10(v) : v;
    double a = log ? std::log10(lo) : lo;
    double b = log ? std::log10(hi) : hi;
    if (b <= a) b = a + 1.0;
    return pix_lo + (x - a) / (b - a) * (pix_hi - pix_lo);
  }
  std::vector<double> ticks() const {
    std::vector<double> t;
    if (log) {
      const int e0 = static_cast<int>(std::ceil(std::log10(lo) - 1e-9));
      const int e1 = static_cast<int>(std::floor(std::log10(hi) + 1e-9));
      for (int e = e0; e <= e1; ++e) t.push_back(std::pow(10.0, e));
      if (t.size() > 12) {  // thin out dense decades
        std::vector<double> s;
        const std::size_t stride = (t.size() + 11) / 12;
        for (std::size_t i = 0; i < t.size(); i += stride) s.push_back(t[i]);
        t = s;
      }
      if (t.empty()) t = {lo, hi};
    } else {
      const double span = hi - lo;
      const double raw = span / 5.0;
      const double mag = std::pow(10.0, std::floor(std::log10(raw)));
      double step = mag;
      for (double m : {1.0, 2.0, 5.0, 10.0}) {
        if (raw <= m * mag) {
          step = m * mag;
          break;
        }
      }
      for (double v = std::ceil(lo / step) * step; v <= hi + 1e-12 * span;
           v += step) {
        t.push_back(v);
      }
    }
    return t;
  }
};

bool usable(double v, bool log_axis) {
  if (!std::isfinite(v)) return false;
  return !log_axis || v > 0.0;
}

}  // namespace

void write_plot(std::ostream& out, const PlotSpec& spec,
                const std::vector<Series>& series) {
  const double ml = 64, mr = 16, mt = 32, mb = 48;
  const double x0 = ml, x1 = spec.width - mr;
  const double y0 = spec.height - mb, y1 = mt;  // y grows downward in SVG

  Axis xa, ya;
  xa.log = spec.log_x;
  ya.log = spec.log_y;
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      if (!usable(x, xa.log) || !usable(y, ya.log)) continue;
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  if (!(xmin < xmax)) {
    xmin = xa.log ? 0.1 : 0.0;
    xmax = xa.log ? 10.0 : 1.0;
  }
  if (!(ymin < ymax)) {
    const double c = std::isfinite(ymin) ? ymin : (ya.log ? 1.0 : 0.0);
    ymin = ya.log ? c * 0.5 : c - 1.0;
    ymax = ya.log ? c * 2.0 : c + 1.0;
  }
  xa.lo = xmin;
  xa.hi = xmax;
  ya.lo = ymin;
  ya.hi = ymax;

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width
      << "\" height=\"" << spec.height << "\" viewBox=\"0 0 " << spec.width
      << " " << spec.height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << (spec.width / 2) << "\" y=\"20\" text-anchor=\"middle\" "
      << "font-family=\"monospace\" font-size=\"14\">" << spec.title
      << "</text>\n";

  // frame
  out << "<rect x=\"" << num(x0) << "\" y=\"" << num(y1) << "\" width=\""
      << num(x1 - x0) << "\" height=\"" << num(y0 - y1)
      << "\" fill=\"none\" stroke=\"black\"/>\n";

  for (double tx : xa.ticks()) {
    const double px = xa.map(tx, x0, x1);
    if (px < x0 - 0.5 || px > x1 + 0.5) continue;
    out << "<line x1=\"" << num(px) << "\" y1=\"" << num(y0) << "\" x2=\""
        << num(px) << "\" y2=\"" << num(y0 + 5) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << num(px) << "\" y=\"" << num(y0 + 18)
        << "\" text-anchor=\"middle\" font-family=\"monospace\" "
           "font-size=\"10\">"
        << num(tx) << "</text>\n";
  }
  for (double ty : ya.ticks()) {
    const double py = ya.map(ty, y0, y1);
    if (py > y0 + 0.5 || py < y1 - 0.5) continue;
    out << "<line x1=\"" << num(x0 - 5) << "\" y1=\"" << num(py) << "\" x2=\""
        << num(x0) << "\" y2=\"" << num(py) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << num(x0 - 8) << "\" y=\"" << num(py + 3)
        << "\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"10\">"
        << num(ty) << "</text>\n";
  }

  out << "<text x=\"" << ((x0 + x1) / 2) << "\" y=\"" << (spec.height - 10)
      << "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"12\">"
      << spec.xlabel << "</text>\n";
  out << "<text x=\"14\" y=\"" << ((y0 + y1) / 2)
      << "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"12\" "
      << "transform=\"rotate(-90 14 " << num((y0 + y1) / 2) << ")\">"
      << spec.ylabel << "</text>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const char* color = kPalette[si % 6];
    out << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : series[si].points) {
      if (!usable(x, xa.log) || !usable(y, ya.log)) continue;
      out << num(xa.map(x, x0, x1)) << "," << num(ya.map(y, y0, y1)) << " ";
    }
    out << "\"/>\n";
    // legend
    const double ly = y1 + 14 + 16 * static_cast<double>(si);
    out << "<line x1=\"" << num(x1 - 120) << "\" y1=\"" << num(ly) << "\" x2=\""
        << num(x1 - 100) << "\" y2=\"" << num(ly) << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << num(x1 - 95) << "\" y=\"" << num(ly + 4)
        << "\" font-family=\"monospace\" font-size=\"10\">" << series[si].label
        << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace plilab::svg
