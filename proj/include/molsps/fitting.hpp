#pragma once

#include <functional>
#include <span>
#include <vector>

namespace molsps {

struct PeakFit {
  double center = 0.0;
  double fwhm = 0.0;
  double amplitude = 0.0;
  double offset = 0.0;
  double residual_norm = 0.0;
};

/// Least-squares fit of offset + amplitude / (1 + (2 (x - center) / fwhm)^2).
/// Needs at least five samples with the maximum away from both ends of the
/// axis (InputError otherwise); ConvergenceError if the solver stalls.
PeakFit fit_lorentzian(std::span<const double> x, std::span<const double> y);

/// Same contract for offset + amplitude * exp(-4 ln2 (x - center)^2 / fwhm^2).
PeakFit fit_gaussian(std::span<const double> x, std::span<const double> y);

namespace detail {

// Residual model for `least_squares`: fills r (size m) for parameters p, and
// the Jacobian dr/dp (m x n, row-major) when `jac` is non-null.
using Residuals = std::function<void(std::span<const double> p, std::span<double> r, double* jac)>;

struct LeastSquaresResult {
  std::vector<double> params;
  double residual_norm = 0.0;
};

/// Levenberg-Marquardt driver. Throws ConvergenceError when the evaluation
/// budget runs out before the tolerances are met.
LeastSquaresResult least_squares(const Residuals& residuals, std::vector<double> start, std::size_t m);

}  // namespace detail

}  // namespace molsps
