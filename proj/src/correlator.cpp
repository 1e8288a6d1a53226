#include "molsps/correlator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "molsps/errors.hpp"
#include "molsps/fitting.hpp"

namespace molsps {

namespace {

constexpr std::size_t kBruteForceLimit = 10000;

struct LagBinning {
  double resolution_s;
  double bin_width;
  double max_lag;
  std::int64_t half_bins;
  std::int64_t max_ticks;
  std::int64_t bin_ticks = 0;  // bin width in whole ticks, 0 when fractional

  LagBinning(double res, double bw, double lag) : resolution_s(res), bin_width(bw), max_lag(lag) {
    if (!(res > 0.0)) throw InputError("correlate: resolution must be > 0");
    if (!(bw > 0.0)) throw InputError("correlate: bin_width must be > 0");
    if (!(lag >= bw)) throw InputError("correlate: max_lag must be >= bin_width");
    half_bins = static_cast<std::int64_t>(std::floor(lag / bw + 0.5));
    // Tick counts that are integral up to rounding are treated as exact, so
    // lags landing on a bin edge or on max_lag are classified exactly.
    const double lag_ratio = lag / res;
    max_ticks = static_cast<std::int64_t>(std::floor(lag_ratio + 1e-9 * std::max(1.0, lag_ratio)));
    const double bw_ratio = bw / res;
    const double nearest = std::round(bw_ratio);
    if (nearest >= 1.0 && std::abs(bw_ratio - nearest) <= 1e-9 * nearest) {
      bin_ticks = static_cast<std::int64_t>(nearest);
    }
  }

  // Offset of the lag bin from the centre; false outside +-max_lag.
  bool bin(std::int64_t dticks, std::int64_t& k) const {
    if (dticks > max_ticks || dticks < -max_ticks) return false;
    if (bin_ticks > 0) {
      // floor(d / w + 1/2) = floor((2 d + w) / (2 w))
      const std::int64_t num = 2 * dticks + bin_ticks;
      const std::int64_t den = 2 * bin_ticks;
      k = num >= 0 ? num / den : -((-num + den - 1) / den);
    } else {
      k = static_cast<std::int64_t>(std::floor(static_cast<double>(dticks) * resolution_s / bin_width + 0.5));
    }
    return k >= -half_bins && k <= half_bins;
  }

  std::int64_t window_ticks() const { return max_ticks + 1; }
};

void require_sorted(std::span<const std::uint64_t> tags, const char* name) {
  if (!std::is_sorted(tags.begin(), tags.end())) {
    throw InputError(std::string("correlate: channel ") + name + " is not sorted ascending");
  }
}

CorrelationHistogram empty_histogram(const LagBinning& binning, std::size_t na, std::size_t nb,
                                     double duration) {
  CorrelationHistogram h;
  h.bin_width = binning.bin_width;
  h.max_lag = binning.max_lag;
  h.bins.assign(static_cast<std::size_t>(2 * binning.half_bins + 1), 0.0);
  h.duration = duration;
  h.rate_a = duration > 0.0 ? static_cast<double>(na) / duration : 0.0;
  h.rate_b = duration > 0.0 ? static_cast<double>(nb) / duration : 0.0;
  return h;
}

}  // namespace

double CorrelationHistogram::total() const { return std::accumulate(bins.begin(), bins.end(), 0.0); }

CorrelationHistogram correlate(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b,
                               double resolution_s, double duration, double bin_width, double max_lag) {
  const LagBinning binning(resolution_s, bin_width, max_lag);
  require_sorted(a, "a");
  require_sorted(b, "b");
  auto h = empty_histogram(binning, a.size(), b.size(), duration);
  const auto center = binning.half_bins;
  const auto window = static_cast<std::uint64_t>(binning.window_ticks());

  std::size_t first = 0;
  for (const auto ta : a) {
    const std::uint64_t lo = ta > window ? ta - window : 0;
    while (first < b.size() && b[first] < lo) ++first;
    for (std::size_t j = first; j < b.size() && b[j] <= ta + window; ++j) {
      std::int64_t k = 0;
      if (binning.bin(static_cast<std::int64_t>(b[j] - ta), k)) {
        h.bins[static_cast<std::size_t>(k + center)] += 1.0;
      }
    }
  }
  return h;
}

CorrelationHistogram correlate(const TimeTagSet& tags, int channel_a, int channel_b, double bin_width,
                               double max_lag) {
  return correlate(tags.channel(channel_a), tags.channel(channel_b), tags.resolution_s(), tags.duration,
                   bin_width, max_lag);
}

CorrelationHistogram brute_force_coincidences(std::span<const std::uint64_t> a,
                                              std::span<const std::uint64_t> b, double resolution_s,
                                              double duration, double bin_width, double max_lag) {
  if (a.size() > kBruteForceLimit || b.size() > kBruteForceLimit) {
    throw InputError("brute_force_coincidences: at most 10^4 tags per channel");
  }
  const LagBinning binning(resolution_s, bin_width, max_lag);
  require_sorted(a, "a");
  require_sorted(b, "b");
  auto h = empty_histogram(binning, a.size(), b.size(), duration);
  for (const auto ta : a) {
    for (const auto tb : b) {
      std::int64_t k = 0;
      if (binning.bin(static_cast<std::int64_t>(tb - ta), k)) {
        h.bins[static_cast<std::size_t>(k + binning.half_bins)] += 1.0;
      }
    }
  }
  return h;
}

CorrelationHistogram normalize_g2(const CorrelationHistogram& raw) {
  if (raw.normalized) throw InputError("normalize_g2: histogram is already normalized");
  auto out = raw;
  out.normalized = true;
  const double scale = raw.rate_a * raw.rate_b * raw.duration * raw.bin_width;
  for (auto& v : out.bins) v = scale > 0.0 ? v / scale : 0.0;
  return out;
}

AntibunchingFit fit_antibunching(const CorrelationHistogram& normalized) {
  if (!normalized.normalized) throw InputError("fit_antibunching: histogram must be normalized");
  std::vector<double> lags(normalized.bins.size());
  for (std::size_t i = 0; i < lags.size(); ++i) lags[i] = normalized.lag(i);
  return fit_antibunching(lags, normalized.bins);
}

AntibunchingFit fit_antibunching(std::span<const double> lags, std::span<const double> g2) {
  if (lags.size() != g2.size() || lags.size() < 5) {
    throw InputError("fit_antibunching: need at least 5 samples with matching lags");
  }
  const std::size_t n = lags.size();
  double max_abs = 0.0;
  std::size_t center = 0;
  for (std::size_t i = 0; i < n; ++i) {
    max_abs = std::max(max_abs, std::abs(lags[i]));
    if (std::abs(lags[i]) < std::abs(lags[center])) center = i;
  }

  // Plateau from the outer quarter of the lag range.
  double far_sum = 0.0, far_sq = 0.0;
  std::size_t far_n = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(lags[i]) >= 0.75 * max_abs) {
      far_sum += g2[i];
      far_sq += g2[i] * g2[i];
      ++far_n;
    }
  }
  const double p0 = far_sum / static_cast<double>(far_n);
  const double far_sd = far_n > 1 ? std::sqrt(std::max(0.0, far_sq / far_n - p0 * p0)) : 0.0;
  // Dip depth from the five bins around zero lag, tested against the plateau
  // scatter scaled to that average.
  double spacing = max_abs;
  for (double lag : lags) {
    if (lag != 0.0) spacing = std::min(spacing, std::abs(lag));
  }
  double near_sum = 0.0;
  std::size_t near_n = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(lags[i]) <= 2.0 * spacing * (1.0 + 1e-9)) {
      near_sum += g2[i];
      ++near_n;
    }
  }
  const double near_mean = near_sum / static_cast<double>(near_n);
  const double g0 = g2[center];

  AntibunchingFit out;
  if (std::abs(p0 - near_mean) <=
      1e-9 * std::max(1.0, std::abs(p0)) + 3.0 * far_sd / std::sqrt(static_cast<double>(near_n))) {
    const double mean = std::accumulate(g2.begin(), g2.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double v : g2) ss += (v - mean) * (v - mean);
    out.g2_zero = mean;
    out.plateau = mean;
    out.decay_time = std::numeric_limits<double>::quiet_NaN();
    out.residual_norm = std::sqrt(ss);
    out.decay_identified = false;
    return out;
  }

  // Starting decay time: first |lag| where the curve recovers 1 - 1/e of the dip.
  const double target = g0 + (p0 - g0) * (1.0 - std::exp(-1.0));
  double tau0 = max_abs / 10.0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const bool crossed = (p0 > g0) ? g2[i] >= target : g2[i] <= target;
    if (crossed && lags[i] != 0.0 && std::abs(lags[i]) < best) best = std::abs(lags[i]);
  }
  if (std::isfinite(best)) tau0 = best;

  std::vector<double> u(n);
  for (std::size_t i = 0; i < n; ++i) u[i] = std::abs(lags[i]) / tau0;

  detail::Residuals model = [&](std::span<const double> p, std::span<double> r, double* jac) {
    const double zero = p[0], s = p[1], plateau = p[2];
    for (std::size_t i = 0; i < n; ++i) {
      const double e = std::exp(-u[i] / s);
      r[i] = plateau - (plateau - zero) * e - g2[i];
      if (jac) {
        jac[i * 3 + 0] = e;
        jac[i * 3 + 1] = -(plateau - zero) * e * u[i] / (s * s);
        jac[i * 3 + 2] = 1.0 - e;
      }
    }
  };
  const auto fit = detail::least_squares(model, {g0, 1.0, p0}, n);
  out.g2_zero = fit.params[0];
  out.decay_time = std::abs(fit.params[1]) * tau0;
  out.plateau = fit.params[2];
  out.residual_norm = fit.residual_norm;
  out.decay_identified = std::isfinite(out.decay_time) && out.decay_time > 0.0 &&
                         out.decay_time < 10.0 * max_abs;
  return out;
}

PulsedRatio pulsed_peak_ratio(const CorrelationHistogram& raw, double period, double window) {
  if (raw.normalized) throw InputError("pulsed_peak_ratio: expects raw counts");
  if (!(window > 0.0) || !(period > window)) {
    throw InputError("pulsed_peak_ratio: need period > window > 0");
  }
  const double half = 0.5 * window;
  const int max_k = static_cast<int>(std::floor((raw.max_lag - half) / period + 1e-9));
  if (max_k < 1) throw InputError("pulsed_peak_ratio: max_lag does not cover a side peak");

  PulsedRatio out;
  double side_total = 0.0;
  for (std::size_t i = 0; i < raw.bins.size(); ++i) {
    const double lag = raw.lag(i);
    const double k = std::round(lag / period);
    if (std::abs(k) > max_k || std::abs(lag - k * period) > half) continue;
    if (k == 0.0) {
      out.central_area += raw.bins[i];
    } else {
      side_total += raw.bins[i];
    }
  }
  out.side_peaks = 2 * max_k;
  out.mean_side_area = side_total / out.side_peaks;
  if (!(out.mean_side_area > 0.0)) throw InputError("pulsed_peak_ratio: side peaks are empty");
  out.ratio = out.central_area / out.mean_side_area;
  return out;
}

}  // namespace molsps
