#include "molsps/interference.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "molsps/errors.hpp"
#include "molsps/kmc.hpp"
#include "molsps/random.hpp"

namespace molsps {

namespace {

std::complex<double> amplitude(const Wavepacket& w, double t) {
  if (t < w.emit_time) return {0.0, 0.0};
  const double envelope = std::sqrt(w.decay_rate) * std::exp(-0.5 * w.decay_rate * (t - w.emit_time));
  return std::polar(envelope, -2.0 * kPi * w.carrier * t);
}

void validate(const Wavepacket& w) {
  if (!(w.decay_rate > 0.0)) throw PhysicsError("wavepacket: decay_rate must be > 0");
}

const MoleculeSpec& source_molecule(const SceneSpec& scene, const char* which) {
  if (scene.molecules.empty()) {
    throw PhysicsError(std::string("simulate_hom: scene ") + which + " has no molecule");
  }
  return *std::min_element(scene.molecules.begin(), scene.molecules.end(),
                           [](const MoleculeSpec& x, const MoleculeSpec& y) { return x.id < y.id; });
}

// Start time (relative to its pulse) of the first 0-0 photon in each pulse,
// NaN for pulses without one.
std::vector<double> first_zpl_starts(const std::vector<PhotonRecord>& photons, std::uint64_t n_pulses,
                                     double period) {
  std::vector<double> starts(n_pulses, std::numeric_limits<double>::quiet_NaN());
  for (const auto& p : photons) {
    if (p.branch != Branch::zpl) continue;
    const double k = std::floor(p.excite_time / period);
    if (k < 0.0 || k >= static_cast<double>(n_pulses)) continue;
    auto& slot = starts[static_cast<std::size_t>(k)];
    if (std::isnan(slot)) slot = p.excite_time - k * period;
  }
  return starts;
}

}  // namespace

double wavepacket_overlap(const Wavepacket& a, const Wavepacket& b, double polarization_mismatch) {
  validate(a);
  validate(b);
  const double t0 = std::max(a.emit_time, b.emit_time);
  const double half_sum = 0.5 * (a.decay_rate + b.decay_rate);
  const double dw = 2.0 * kPi * (a.carrier - b.carrier);
  const double decay = std::exp(a.decay_rate * (a.emit_time - t0) + b.decay_rate * (b.emit_time - t0));
  const double c = std::cos(polarization_mismatch);
  return a.decay_rate * b.decay_rate * decay / (half_sum * half_sum + dw * dw) * c * c;
}

double hom_coincidence_prob(double overlap_sq) {
  if (!(overlap_sq >= 0.0 && overlap_sq <= 1.0 + 1e-12)) {
    throw PhysicsError("hom_coincidence_prob: overlap must lie in [0, 1]");
  }
  return 0.5 * (1.0 - std::min(overlap_sq, 1.0));
}

double beat_coincidence_density(const Wavepacket& a, const Wavepacket& b, double t1, double t2) {
  validate(a);
  validate(b);
  const auto m = amplitude(a, t1) * amplitude(b, t2) - amplitude(a, t2) * amplitude(b, t1);
  return 0.25 * std::norm(m);
}

HomResult simulate_hom(const SceneSpec& scene_a, const SceneSpec& scene_b, const LaserSpec& laser,
                       const HomSettings& settings) {
  if (laser.mode != LaserMode::pulsed) throw PhysicsError("simulate_hom: requires a pulsed laser");
  if (settings.n_pulses == 0 || settings.block_pulses == 0) {
    throw PhysicsError("simulate_hom: pulse counts must be positive");
  }
  laser.validate();
  scene_a.validate();
  scene_b.validate();

  const MoleculeSpec& mol_a = source_molecule(scene_a, "A");
  const MoleculeSpec& mol_b = source_molecule(scene_b, "B");
  SceneSpec source_a = scene_a;
  source_a.molecules = {mol_a};
  source_a.background_rate = 0.0;
  SceneSpec source_b = scene_b;
  source_b.molecules = {mol_b};
  source_b.background_rate = 0.0;

  Wavepacket wa{1.0 / mol_a.lifetime_t1, shifted_center(mol_a, scene_a.electrode), 0.0};
  Wavepacket wb{1.0 / mol_b.lifetime_t1, shifted_center(mol_b, scene_b.electrode), 0.0};
  const double mismatch = mol_a.polarization_angle - mol_b.polarization_angle;
  const double period = laser.pulse_period();

  HomResult result;
  result.n_pulses = settings.n_pulses;
  result.voltage = scene_b.electrode.voltage;

  const std::uint64_t n_blocks = (settings.n_pulses + settings.block_pulses - 1) / settings.block_pulses;
  for (std::uint64_t block = 0; block < n_blocks; ++block) {
    const std::uint64_t first = block * settings.block_pulses;
    const std::uint64_t count = std::min(settings.block_pulses, settings.n_pulses - first);
    const double duration = static_cast<double>(count) * period;
    const auto starts_a =
        first_zpl_starts(simulate_stream(source_a, laser, duration, derive_seed(settings.seed, 3 * block)),
                         count, period);
    const auto starts_b = first_zpl_starts(
        simulate_stream(source_b, laser, duration, derive_seed(settings.seed, 3 * block + 1)), count, period);
    Rng scoring(derive_seed(settings.seed, 3 * block + 2));

    for (std::uint64_t k = 0; k < count; ++k) {
      const bool a = !std::isnan(starts_a[k]);
      const bool b = !std::isnan(starts_b[k]);
      if (a && b) {
        ++result.both_emitted;
        wa.emit_time = settings.force_simultaneous ? 0.0 : starts_a[k];
        wb.emit_time = settings.force_simultaneous ? 0.0 : starts_b[k];
        const double p = hom_coincidence_prob(wavepacket_overlap(wa, wb, mismatch));
        if (uniform01(scoring) < p) ++result.coincidences;
      } else if (a || b) {
        ++result.singles;
      }
    }
  }

  if (result.both_emitted > 0) {
    const double n = static_cast<double>(result.both_emitted);
    result.p_estimate = static_cast<double>(result.coincidences) / n;
    result.p_error = std::sqrt(result.p_estimate * (1.0 - result.p_estimate) / n);
  } else {
    result.p_estimate = std::numeric_limits<double>::quiet_NaN();
    result.p_error = std::numeric_limits<double>::quiet_NaN();
  }
  return result;
}

}  // namespace molsps
