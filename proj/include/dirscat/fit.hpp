#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace dirscat {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms_residual = 0.0;
  int points = 0;
};

/// Ordinary least squares y = slope * x + intercept.
inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_line: need >= 2 matching points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_line: degenerate abscissae");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double rr = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.slope * x[i] + f.intercept);
    rr += r * r;
  }
  f.rms_residual = std::sqrt(rr / n);
  f.points = static_cast<int>(x.size());
  return f;
}

/// Slope of log(value) against log(t).
inline LineFit fit_loglog(const std::vector<double>& t, const std::vector<double>& value) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(t[i] > 0.0) || !(value[i] > 0.0)) throw std::invalid_argument("fit_loglog: non-positive sample");
    lx.push_back(std::log(t[i]));
    ly.push_back(std::log(value[i]));
  }
  return fit_line(lx, ly);
}

}  // namespace dirscat
