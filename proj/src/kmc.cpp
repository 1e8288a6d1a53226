#include "molsps/kmc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "molsps/errors.hpp"
#include "molsps/io.hpp"
#include "molsps/random.hpp"

namespace molsps {

namespace {

constexpr double kNever = std::numeric_limits<double>::infinity();

// Next g -> v transition at or after `t` for a pump of constant `rate` that is
// either always on (cw) or gated by rectangular pulse windows.
class PumpClock {
 public:
  PumpClock(const LaserSpec& laser, double rate)
      : pulsed_(laser.mode == LaserMode::pulsed),
        rate_(rate),
        period_(pulsed_ ? laser.pulse_period() : 0.0),
        width_(pulsed_ ? laser.pulse_width : 0.0) {}

  double next(double t, Rng& rng) const {
    if (rate_ <= 0.0) return kNever;
    if (!pulsed_) return t + exponential(rng, rate_);

    // Unit-rate exponential "work" consumed at `rate_` while a window is open.
    double work = exponential(rng, 1.0);
    double k = std::floor(t / period_);
    double open_until = k * period_ + width_;
    if (t >= open_until) {
      k += 1.0;
      t = k * period_;
      open_until = t + width_;
    }
    const double here = rate_ * (open_until - t);
    if (work < here) return t + work / rate_;
    work -= here;

    const double per_window = rate_ * width_;
    const double skipped = std::floor(work / per_window);
    work -= skipped * per_window;
    k += 1.0 + skipped;
    const double offset = std::min(work / rate_, std::nextafter(width_, 0.0));
    return k * period_ + offset;
  }

 private:
  bool pulsed_;
  double rate_;
  double period_;
  double width_;
};

void emit_molecule(const MoleculeSpec& mol, const SceneSpec& scene, const LaserSpec& laser,
                   double duration, Rng& rng, std::vector<PhotonRecord>& out) {
  const double pump = pump_rate(mol, laser, scene.electrode);
  const double gamma = 1.0 / mol.lifetime_t1;
  const double center = shifted_center(mol, scene.electrode);
  const PumpClock clock(laser, pump);
  std::cauchy_distribution<double> zpl_line(center, 0.5 * natural_linewidth(mol.lifetime_t1));

  std::vector<double> weights;
  for (const auto& line : scene.emission_lines) weights.push_back(line.weight);
  const bool has_lines =
      !weights.empty() && std::any_of(weights.begin(), weights.end(), [](double w) { return w > 0.0; });
  std::discrete_distribution<std::size_t> pick_line(weights.begin(), weights.end());

  double t = 0.0;
  while (true) {
    const double pumped = clock.next(t, rng);
    if (!(pumped < duration)) break;
    const double relaxed = pumped + exponential(rng, scene.k_vib);
    const double decayed = relaxed + exponential(rng, gamma);
    if (!(decayed < duration)) break;

    PhotonRecord rec;
    rec.emit_time = decayed;
    rec.excite_time = relaxed;
    rec.source_id = mol.id;
    if (uniform01(rng) < mol.zpl_branching) {
      rec.branch = Branch::zpl;
      rec.frequency = zpl_line(rng);
    } else {
      rec.branch = Branch::vibronic;
      rec.frequency =
          has_lines ? center - wavenumber_to_hz(scene.emission_lines[pick_line(rng)].shift_cm) : center;
    }
    out.push_back(rec);
    t = decayed;
  }
}

void emit_background(double rate, double duration, Rng& rng, std::vector<PhotonRecord>& out) {
  if (rate <= 0.0) return;
  for (double t = exponential(rng, rate); t < duration; t += exponential(rng, rate)) {
    PhotonRecord rec;
    rec.emit_time = t;
    rec.excite_time = t;
    rec.source_id = kBackgroundSource;
    rec.branch = Branch::vibronic;
    out.push_back(rec);
  }
}

}  // namespace

const std::vector<std::uint64_t>& TimeTagSet::channel(int id) const {
  auto it = channels.find(id);
  if (it == channels.end()) throw InputError("tag set has no channel " + std::to_string(id));
  return it->second;
}

std::size_t TimeTagSet::total_tags() const {
  std::size_t n = 0;
  for (const auto& [id, tags] : channels) n += tags.size();
  return n;
}

std::vector<PhotonRecord> simulate_stream(const SceneSpec& scene, const LaserSpec& laser,
                                          double duration, std::uint64_t seed) {
  if (!(duration > 0.0)) throw PhysicsError("simulate_stream: duration must be > 0");
  scene.validate();
  laser.validate();

  std::vector<PhotonRecord> photons;
  Rng background(derive_seed(seed, 0));
  emit_background(scene.background_rate, duration, background, photons);
  for (std::size_t i = 0; i < scene.molecules.size(); ++i) {
    Rng rng(derive_seed(seed, i + 1));
    emit_molecule(scene.molecules[i], scene, laser, duration, rng, photons);
  }
  std::sort(photons.begin(), photons.end(), [](const PhotonRecord& a, const PhotonRecord& b) {
    if (a.emit_time != b.emit_time) return a.emit_time < b.emit_time;
    return a.source_id < b.source_id;
  });
  return photons;
}

TimeTagSet apply_detection(std::span<const PhotonRecord> photons, const DetectionSpec& det, Split split,
                           double duration, std::uint64_t seed) {
  det.validate();
  if (!(duration > 0.0)) throw PhysicsError("apply_detection: duration must be > 0");
  for (std::size_t i = 1; i < photons.size(); ++i) {
    if (photons[i].emit_time < photons[i - 1].emit_time) {
      throw InputError("apply_detection: photons must be ordered by emit_time");
    }
  }

  TimeTagSet tags;
  tags.resolution_ps = det.resolution_ps;
  tags.duration = duration;
  tags.seed = seed;
  const int n_channels = split == Split::hbt ? 2 : 1;
  for (int ch = 0; ch < n_channels; ++ch) tags.channels[ch];

  const double res_ps = static_cast<double>(det.resolution_ps);
  const double duration_ps = duration * 1e12;
  auto push = [&](int ch, double t) {
    const double ps = t * 1e12;
    if (!(ps >= 0.0) || !(ps < duration_ps)) return;
    tags.channels[ch].push_back(static_cast<std::uint64_t>(std::floor(ps / res_ps)));
  };

  Rng rng(derive_seed(seed, 0));
  std::normal_distribution<double> jitter(0.0, 1.0);
  for (const auto& p : photons) {
    const double survive =
        p.source_id == kBackgroundSource
            ? 1.0
            : det.collection_efficiency * det.fiber_coupling *
                  (p.branch == Branch::zpl ? det.zpl_filter_transmission : det.vibronic_filter_transmission);
    if (!(uniform01(rng) < survive)) continue;
    const int ch = split == Split::hbt && uniform01(rng) >= 0.5 ? 1 : 0;
    double t = p.emit_time;
    if (det.timing_jitter_sigma > 0.0) t += det.timing_jitter_sigma * jitter(rng);
    push(ch, t);
  }

  for (int ch = 0; ch < n_channels; ++ch) {
    Rng dark(derive_seed(seed, 1 + static_cast<std::uint64_t>(ch)));
    if (det.dark_count_rate > 0.0) {
      for (double t = exponential(dark, det.dark_count_rate); t < duration;
           t += exponential(dark, det.dark_count_rate)) {
        push(ch, t);
      }
    }
  }

  // Dead time in whole ticks, rounded up so kept tags are >= dead_time apart.
  const auto dead_ticks = std::max<std::uint64_t>(
      1, static_cast<std::uint64_t>(std::ceil(det.dead_time * 1e12 / res_ps - 1e-9)));
  for (auto& [ch, list] : tags.channels) {
    std::sort(list.begin(), list.end());
    std::vector<std::uint64_t> kept;
    kept.reserve(list.size());
    for (auto tick : list) {
      if (kept.empty() || tick - kept.back() >= dead_ticks) kept.push_back(tick);
    }
    list = std::move(kept);
  }
  return tags;
}

std::string scene_digest(const SceneSpec& scene, const LaserSpec& laser) {
  std::ostringstream s;
  s << std::hexfloat;
  s << "bg " << scene.background_rate << " ref " << scene.reference_wavelength_nm << " kvib " << scene.k_vib
    << " el " << scene.electrode.gap << ' ' << scene.electrode.voltage << ' ' << scene.electrode.max_voltage
    << '\n';
  for (const auto& l : scene.emission_lines) s << "line " << l.shift_cm << ' ' << l.weight << '\n';
  for (const auto& m : scene.molecules) {
    s << "mol " << m.id << ' ' << m.position.x_um << ' ' << m.position.y_um << ' ' << m.zpl_center << ' '
      << m.lifetime_t1 << ' ' << m.zpl_branching << ' ' << m.vibronic_offset << ' ' << m.vibronic_fwhm << ' '
      << m.stark_linear << ' ' << m.stark_quadratic << ' ' << m.polarization_angle << '\n';
  }
  s << "laser " << static_cast<int>(laser.mode) << ' ' << laser.frequency << ' ' << laser.cw_peak_pump_rate
    << ' ' << laser.laser_linewidth << ' ' << laser.pulse_width << ' ' << laser.pulse_rep_rate << ' '
    << laser.pulse_divider << ' ' << laser.pulse_peak_pump_rate << '\n';
  return sha256_hex(s.str()).substr(0, 16);
}

}  // namespace molsps
