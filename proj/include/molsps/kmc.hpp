#pragma once

// Kinetic Monte Carlo emission of molecular photon streams and the detection
// chain that turns them into per-channel time tags.

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "molsps/photonmodel.hpp"

namespace molsps {

enum class Branch : std::uint8_t { zpl, vibronic };

inline constexpr int kBackgroundSource = -1;

struct PhotonRecord {
  double emit_time = 0.0;    // s, the e -> g decay
  double frequency = 0.0;    // Hz offset from the scene reference
  int source_id = kBackgroundSource;
  Branch branch = Branch::vibronic;
  double excite_time = 0.0;  // s, when S1,v=0 was populated (wavepacket start)
};

struct TimeTagSet {
  std::uint64_t resolution_ps = 1;
  double duration = 0.0;  // s
  // Channel id -> strictly increasing timestamps in units of resolution_ps.
  std::map<int, std::vector<std::uint64_t>> channels;
  std::uint64_t seed = 0;
  std::string scene_digest;

  double resolution_s() const { return static_cast<double>(resolution_ps) * 1e-12; }
  const std::vector<std::uint64_t>& channel(int id) const;
  std::size_t total_tags() const;
};

enum class Split { single, hbt };

/// Runs every molecule's g -> v -> e -> g cycle for `duration` seconds and
/// merges the emissions with a Poissonian background into one time-ordered
/// list. In pulsed mode pumping only happens inside rectangular windows
/// [k T, k T + pulse_width). Each molecule and the background draw from
/// their own sub-stream of `seed`, so results are reproducible bit for bit.
std::vector<PhotonRecord> simulate_stream(const SceneSpec& scene, const LaserSpec& laser,
                                          double duration, std::uint64_t seed);

/// Thins, routes, jitters, quantizes and dead-time prunes `photons`, and adds
/// dark counts. Background records (source -1) are already at the detectors
/// and skip the optical losses. HBT routing is a fair coin per photon onto
/// channels 0 and 1; single routing uses channel 0.
TimeTagSet apply_detection(std::span<const PhotonRecord> photons, const DetectionSpec& det,
                           Split split, double duration, std::uint64_t seed);

/// Stable hex digest of a scene's physical content.
std::string scene_digest(const SceneSpec& scene, const LaserSpec& laser);

}  // namespace molsps
