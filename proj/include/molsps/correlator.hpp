#pragma once

// Second-order correlation of time-tag channels.
//
// Every ordered pair (ta, tb) with |tb - ta| <= max_lag is counted (multi-start,
// not start-stop). The lag tb - ta lands in bin floor(lag / bin_width + 1/2),
// so the central bin spans [-bin_width/2, +bin_width/2).

#include <cstdint>
#include <span>
#include <vector>

#include "molsps/kmc.hpp"

namespace molsps {

struct CorrelationHistogram {
  double bin_width = 0.0;  // s
  double max_lag = 0.0;    // s
  std::vector<double> bins;  // 2 * half_bins + 1 entries, lag -max..+max
  double rate_a = 0.0;     // s^-1
  double rate_b = 0.0;     // s^-1
  double duration = 0.0;   // s
  bool normalized = false;

  std::size_t center_index() const { return bins.size() / 2; }
  double lag(std::size_t i) const {
    return (static_cast<double>(i) - static_cast<double>(center_index())) * bin_width;
  }
  double total() const;
};

/// Two-pointer sorted merge, O(N + matches). Channels must be ascending.
CorrelationHistogram correlate(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b,
                               double resolution_s, double duration, double bin_width, double max_lag);
CorrelationHistogram correlate(const TimeTagSet& tags, int channel_a, int channel_b, double bin_width,
                               double max_lag);

/// Exhaustive double loop with the same contract as `correlate`. Refuses
/// channels longer than 10^4 tags.
CorrelationHistogram brute_force_coincidences(std::span<const std::uint64_t> a,
                                              std::span<const std::uint64_t> b, double resolution_s,
                                              double duration, double bin_width, double max_lag);

/// Divides every bin by rate_a * rate_b * duration * bin_width.
CorrelationHistogram normalize_g2(const CorrelationHistogram& raw);

struct AntibunchingFit {
  double g2_zero = 0.0;
  double decay_time = 0.0;  // s; NaN when not identifiable
  double plateau = 0.0;
  double residual_norm = 0.0;
  bool decay_identified = true;
};

/// Least-squares fit of plateau - (plateau - g2_zero) exp(-|tau| / decay_time).
/// A curve without a resolvable dip is returned with decay_identified = false.
AntibunchingFit fit_antibunching(const CorrelationHistogram& normalized);
AntibunchingFit fit_antibunching(std::span<const double> lags, std::span<const double> g2);

struct PulsedRatio {
  double ratio = 0.0;
  double central_area = 0.0;
  double mean_side_area = 0.0;
  int side_peaks = 0;
};

/// Central-peak area over the mean area of the side peaks at multiples of
/// `period`, integrating raw counts of bins whose centres lie within
/// +-window/2 of each peak. Only peaks fully inside max_lag are used.
PulsedRatio pulsed_peak_ratio(const CorrelationHistogram& raw, double period, double window);

}  // namespace molsps
