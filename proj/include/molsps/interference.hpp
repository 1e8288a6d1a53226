#pragma once

// Two-photon interference of exponentially decaying single-photon wavepackets
// from independent molecules.

#include <cstdint>

#include "molsps/photonmodel.hpp"

namespace molsps {

/// Amplitude sqrt(G) exp(-G (t - emit_time) / 2) exp(-i 2 pi carrier t) for
/// t >= emit_time, zero before.
struct Wavepacket {
  double decay_rate = 1.0 / 9.4e-9;  // s^-1
  double carrier = 0.0;              // Hz
  double emit_time = 0.0;            // s
};

/// |<a|b>|^2, scaled by cos^2 of the polarization mismatch angle.
double wavepacket_overlap(const Wavepacket& a, const Wavepacket& b, double polarization_mismatch = 0.0);

/// Coincidence probability behind a balanced beam splitter, (1 - overlap) / 2.
double hom_coincidence_prob(double overlap_sq);

/// Joint density of detecting one photon at t1 in one output port and the
/// other at t2 in the second port, (1/4) |xa(t1) xb(t2) - xa(t2) xb(t1)|^2.
/// Integrated over both times it gives hom_coincidence_prob(overlap).
double beat_coincidence_density(const Wavepacket& a, const Wavepacket& b, double t1, double t2);

struct HomSettings {
  std::uint64_t n_pulses = 1000000;
  std::uint64_t seed = 1;
  // Both photons start at the same instant (pulse start); isolates the
  // spectral part of the overlap.
  bool force_simultaneous = false;
  std::uint64_t block_pulses = 1u << 16;
};

struct HomResult {
  std::uint64_t n_pulses = 0;
  std::uint64_t both_emitted = 0;
  std::uint64_t singles = 0;
  std::uint64_t coincidences = 0;
  double p_estimate = 0.0;
  double p_error = 0.0;
  double voltage = 0.0;  // electrode voltage of the second microscope
};

/// Two-microscope Hong-Ou-Mandel experiment under a shared pulsed laser. The
/// first molecule (lowest id) of each scene is the source. Per pulse each
/// source contributes its first 0-0 photon from the KMC engine; when both
/// emit, a coincidence is drawn with probability
/// hom_coincidence_prob(wavepacket_overlap) using the two wavepacket start
/// times and the Stark-shifted line centres.
HomResult simulate_hom(const SceneSpec& scene_a, const SceneSpec& scene_b, const LaserSpec& laser,
                       const HomSettings& settings);

}  // namespace molsps
