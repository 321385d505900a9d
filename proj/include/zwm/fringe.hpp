#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "zwm/errors.hpp"

namespace zwm {

/// Least-squares fit rate(phi) ~ offset + a cos(phi) + b sin(phi).
struct FringeFit {
  double offset = 0.0;
  double cos_amplitude = 0.0;
  double sin_amplitude = 0.0;
  double amplitude = 0.0;      // sqrt(a^2 + b^2)
  double phase_of_max = 0.0;   // atan2(b, a)
  double visibility = 0.0;     // (max - min) / (max + min) of the fitted curve
  double max_residual = 0.0;   // max |rate - fit| over the samples
  bool degenerate = false;     // constant (or zero) rate
};

inline FringeFit fit_fringe(std::span<const double> phases, std::span<const double> rates) {
  if (phases.size() != rates.size()) throw ConfigError("phase and rate samples differ in length");
  if (phases.size() < 3) throw ConfigError("fringe fit needs at least 3 samples");
  const auto [lo, hi] = std::minmax_element(phases.begin(), phases.end());
  const double n = static_cast<double>(phases.size());
  // An evenly spaced scan of one period without its endpoint spans 2 pi (n-1)/n.
  if (*hi - *lo < 2.0 * std::numbers::pi * (n - 1.0) / n - 1e-9) {
    throw ConfigError("fringe scan must cover at least one full period");
  }

  Eigen::MatrixXd design(phases.size(), 3);
  Eigen::VectorXd y(phases.size());
  for (std::size_t i = 0; i < phases.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    design(r, 0) = 1.0;
    design(r, 1) = std::cos(phases[i]);
    design(r, 2) = std::sin(phases[i]);
    y(r) = rates[i];
  }
  const Eigen::Vector3d coef = design.colPivHouseholderQr().solve(y);

  FringeFit fit;
  fit.offset = coef(0);
  fit.cos_amplitude = coef(1);
  fit.sin_amplitude = coef(2);
  fit.amplitude = std::hypot(coef(1), coef(2));
  fit.phase_of_max = std::atan2(coef(2), coef(1));
  fit.max_residual = (design * coef - y).cwiseAbs().maxCoeff();

  const double scale = y.cwiseAbs().maxCoeff();
  fit.degenerate = !(scale > 0.0) || fit.amplitude <= 1e-14 * scale || !(fit.offset > 0.0);
  fit.visibility = fit.degenerate ? 0.0 : fit.amplitude / fit.offset;
  return fit;
}

inline double visibility(std::span<const double> phases, std::span<const double> rates) {
  return fit_fringe(phases, rates).visibility;
}

/// n evenly spaced phases over [0, 2 pi).
inline std::vector<double> full_period(std::size_t n) {
  std::vector<double> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
  return p;
}

/// Ordinary least-squares line y = intercept + slope x.
struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
  double max_residual = 0.0;
};

inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw ConfigError("line fit needs >= 2 paired samples");
  const double n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw ConfigError("line fit needs distinct abscissae");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  for (std::size_t i = 0; i < x.size(); ++i) {
    f.max_residual = std::max(f.max_residual, std::abs(y[i] - f.intercept - f.slope * x[i]));
  }
  return f;
}

/// Slope of log(y) against log(x).
inline double log_log_slope(std::span<const double> x, std::span<const double> y) {
  std::vector<double> lx(x.size());
  std::vector<double> ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw ConfigError("log-log fit needs positive samples");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  return fit_line(lx, ly).slope;
}

}  // namespace zwm
