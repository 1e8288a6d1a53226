#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "molsps/errors.hpp"
#include "molsps/fitting.hpp"

using namespace molsps;

namespace {

std::vector<double> grid(double a, double b, int n) {
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) x[i] = a + (b - a) * i / (n - 1);
  return x;
}

double lorentz(double x, double c, double w, double a, double o) {
  const double u = 2.0 * (x - c) / w;
  return o + a / (1.0 + u * u);
}

double gauss(double x, double c, double w, double a, double o) {
  return o + a * std::exp(-4.0 * std::log(2.0) * (x - c) * (x - c) / (w * w));
}

}  // namespace

TEST_SUITE("fitting") {
  TEST_CASE("noiseless Lorentzian") {
    const auto x = grid(-100e6, 100e6, 401);
    std::vector<double> y;
    for (double v : x) y.push_back(lorentz(v, 0.0, 18e6, 5e4, 0.0));
    const auto fit = fit_lorentzian(x, y);
    CHECK(fit.fwhm == doctest::Approx(18e6).epsilon(1e-6));
    CHECK(std::abs(fit.center) < 1e-6 * 18e6);
    CHECK(fit.amplitude == doctest::Approx(5e4).epsilon(1e-6));
    CHECK(std::abs(fit.offset) < 1e-6 * 5e4);
    CHECK(fit.residual_norm < 1e-6 * 5e4);
  }

  TEST_CASE("noiseless Lorentzian grid") {
    for (double c : {-30e6, 0.0, 12.5e6}) {
      for (double w : {5e6, 16.93e6, 40e6}) {
        for (double o : {0.0, 200.0}) {
          const auto x = grid(c - 8 * w + 1e6, c + 8 * w, 321);
          std::vector<double> y;
          for (double v : x) y.push_back(lorentz(v, c, w, 1e3, o));
          const auto fit = fit_lorentzian(x, y);
          CHECK(fit.fwhm == doctest::Approx(w).epsilon(1e-6));
          CHECK(std::abs(fit.center - c) < 1e-6 * w);
          CHECK(fit.offset == doctest::Approx(o).epsilon(1e-6).scale(1e3));
        }
      }
    }
  }

  TEST_CASE("noiseless Gaussian") {
    const auto x = grid(-1000.0, 1000.0, 41);
    std::vector<double> y;
    for (double v : x) y.push_back(gauss(v, 25.0, 330.0, 800.0, 20.0));
    const auto fit = fit_gaussian(x, y);
    CHECK(fit.fwhm == doctest::Approx(330.0).epsilon(1e-6));
    CHECK(fit.center == doctest::Approx(25.0).epsilon(1e-6));
    CHECK(fit.amplitude == doctest::Approx(800.0).epsilon(1e-6));
    CHECK(fit.offset == doctest::Approx(20.0).epsilon(1e-6));
  }

  TEST_CASE("multiplicative noise leaves the width unbiased") {
    const auto x = grid(-100e6, 100e6, 201);
    const auto xg = grid(-1200.0, 1200.0, 49);
    double lorentz_sum = 0.0, gauss_sum = 0.0;
    for (int seed = 0; seed < 100; ++seed) {
      std::mt19937_64 rng(seed);
      std::normal_distribution<double> noise(1.0, 0.05);
      std::vector<double> y, yg;
      for (double v : x) y.push_back(lorentz(v, 3e6, 18e6, 1.0, 0.0) * noise(rng));
      for (double v : xg) yg.push_back(gauss(v, 0.0, 330.0, 1.0, 0.01) * noise(rng));
      lorentz_sum += fit_lorentzian(x, y).fwhm;
      gauss_sum += fit_gaussian(xg, yg).fwhm;
    }
    CHECK(std::abs(lorentz_sum / 100.0 / 18e6 - 1.0) < 0.02);
    CHECK(std::abs(gauss_sum / 100.0 / 330.0 - 1.0) < 0.02);
  }

  TEST_CASE("input errors are distinct from convergence errors") {
    const std::vector<double> x4{0, 1, 2, 3}, y4{0, 1, 1, 0};
    CHECK_THROWS_AS(fit_lorentzian(x4, y4), InputError);
    const auto x = grid(0.0, 10.0, 11);
    std::vector<double> edge;
    for (double v : x) edge.push_back(lorentz(v, 0.0, 2.0, 1.0, 0.0));
    CHECK_THROWS_AS(fit_lorentzian(x, edge), InputError);
    CHECK_THROWS_AS(fit_gaussian(x, edge), InputError);
    const std::vector<double> flat(11, 1.0);
    CHECK_THROWS_AS(fit_gaussian(x, flat), InputError);
    const std::vector<double> short_y(10, 1.0);
    CHECK_THROWS_AS(fit_gaussian(x, short_y), InputError);
  }

  TEST_CASE("least squares driver") {
    // Straight line through exact points.
    const std::vector<double> xs{0, 1, 2, 3, 4};
    const detail::Residuals line = [&](std::span<const double> p, std::span<double> r, double* jac) {
      for (std::size_t i = 0; i < xs.size(); ++i) {
        r[i] = p[0] + p[1] * xs[i] - (1.0 + 2.0 * xs[i]);
        if (jac) {
          jac[i * 2] = 1.0;
          jac[i * 2 + 1] = xs[i];
        }
      }
    };
    const auto res = detail::least_squares(line, {0.0, 0.0}, xs.size());
    CHECK(res.params[0] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(res.params[1] == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(res.residual_norm < 1e-9);
    CHECK_THROWS_AS(detail::least_squares(line, {0.0, 0.0, 0.0, 0.0, 0.0, 0.0}, xs.size()), InputError);
  }
}
