#include "molsps/fitting.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Core>
#include <unsupported/Eigen/NonLinearOptimization>

#include "molsps/errors.hpp"

namespace molsps {

namespace detail {

namespace {

struct Functor {
  using Scalar = double;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;

  const Residuals* model;
  int n;
  int m;

  int inputs() const { return n; }
  int values() const { return m; }

  int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& fvec) const {
    (*model)(std::span<const double>(x.data(), n), std::span<double>(fvec.data(), m), nullptr);
    return fvec.allFinite() ? 0 : -1;
  }

  int df(const Eigen::VectorXd& x, Eigen::MatrixXd& fjac) const {
    std::vector<double> r(m);
    std::vector<double> jac(static_cast<std::size_t>(m) * n);
    (*model)(std::span<const double>(x.data(), n), r, jac.data());
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) fjac(i, j) = jac[static_cast<std::size_t>(i) * n + j];
    }
    return 0;
  }
};

}  // namespace

LeastSquaresResult least_squares(const Residuals& residuals, std::vector<double> start, std::size_t m) {
  const int n = static_cast<int>(start.size());
  if (m < start.size()) throw InputError("least_squares: fewer samples than parameters");
  Functor f{&residuals, n, static_cast<int>(m)};
  Eigen::VectorXd x = Eigen::Map<Eigen::VectorXd>(start.data(), n);

  Eigen::LevenbergMarquardt<Functor> lm(f);
  lm.parameters.ftol = 1e-14;
  lm.parameters.xtol = 1e-14;
  lm.parameters.gtol = 0.0;
  lm.parameters.maxfev = 4000;
  const auto status = lm.minimize(x);

  using namespace Eigen::LevenbergMarquardtSpace;
  switch (status) {
    case RelativeReductionTooSmall:
    case RelativeErrorTooSmall:
    case RelativeErrorAndReductionTooSmall:
    case CosinusTooSmall:
    case FtolTooSmall:
    case XtolTooSmall:
    case GtolTooSmall:
      break;
    case ImproperInputParameters:
      throw InputError("least_squares: improper input parameters");
    default:
      throw ConvergenceError("least_squares: solver did not converge (status " +
                             std::to_string(static_cast<int>(status)) + ")");
  }
  if (!x.allFinite()) throw ConvergenceError("least_squares: non-finite parameters");

  LeastSquaresResult out;
  out.params.assign(x.data(), x.data() + n);
  std::vector<double> r(m);
  residuals(out.params, r, nullptr);
  double ss = 0.0;
  for (double v : r) ss += v * v;
  out.residual_norm = std::sqrt(ss);
  return out;
}

}  // namespace detail

namespace {

enum class Shape { lorentzian, gaussian };

PeakFit fit_peak(std::span<const double> x, std::span<const double> y, Shape shape) {
  if (x.size() != y.size()) throw InputError("peak fit: axis and values differ in length");
  if (x.size() < 5) throw InputError("peak fit: need at least 5 samples");
  const auto n = x.size();
  const auto imax = static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin());
  if (imax == 0 || imax + 1 == n) throw InputError("peak fit: samples do not span the peak");

  const double ymax = y[imax];
  const double ymin = *std::min_element(y.begin(), y.end());
  if (!(ymax > ymin)) throw InputError("peak fit: flat input");
  const double half = 0.5 * (ymax + ymin);
  std::size_t lo = imax;
  std::size_t hi = imax;
  while (lo > 0 && y[lo - 1] > half) --lo;
  while (hi + 1 < n && y[hi + 1] > half) ++hi;
  const double step = std::abs(x[n - 1] - x[0]) / static_cast<double>(n - 1);
  double width = std::abs(x[hi] - x[lo]) + step;
  if (!(width > 0.0)) width = step;

  // Work in units of the starting width around the starting centre so the
  // solver sees O(1) parameters.
  const double x0 = x[imax];
  const double ys = ymax - ymin;
  std::vector<double> u(n), v(n);
  for (std::size_t i = 0; i < n; ++i) {
    u[i] = (x[i] - x0) / width;
    v[i] = y[i] / ys;
  }

  detail::Residuals model = [&](std::span<const double> p, std::span<double> r, double* jac) {
    const double c = p[0], w = p[1], a = p[2], off = p[3];
    for (std::size_t i = 0; i < n; ++i) {
      const double d = u[i] - c;
      double f = 0.0, df_dc = 0.0, df_dw = 0.0;
      if (shape == Shape::lorentzian) {
        const double q = 2.0 * d / w;
        const double den = 1.0 + q * q;
        f = 1.0 / den;
        const double df_dq = -2.0 * q / (den * den);
        df_dc = df_dq * (-2.0 / w);
        df_dw = df_dq * (-q / w);
      } else {
        const double k = 4.0 * std::log(2.0);
        f = std::exp(-k * d * d / (w * w));
        df_dc = f * (2.0 * k * d / (w * w));
        df_dw = f * (2.0 * k * d * d / (w * w * w));
      }
      r[i] = off + a * f - v[i];
      if (jac) {
        jac[i * 4 + 0] = a * df_dc;
        jac[i * 4 + 1] = a * df_dw;
        jac[i * 4 + 2] = f;
        jac[i * 4 + 3] = 1.0;
      }
    }
  };

  const auto fit = detail::least_squares(model, {0.0, 1.0, 1.0, ymin / ys}, n);
  PeakFit out;
  out.center = x0 + fit.params[0] * width;
  out.fwhm = std::abs(fit.params[1]) * width;
  out.amplitude = fit.params[2] * ys;
  out.offset = fit.params[3] * ys;
  out.residual_norm = fit.residual_norm * ys;
  if (!(out.fwhm > 0.0)) throw ConvergenceError("peak fit: collapsed to zero width");
  return out;
}

}  // namespace

PeakFit fit_lorentzian(std::span<const double> x, std::span<const double> y) {
  return fit_peak(x, y, Shape::lorentzian);
}

PeakFit fit_gaussian(std::span<const double> x, std::span<const double> y) {
  return fit_peak(x, y, Shape::gaussian);
}

}  // namespace molsps
