#pragma once

// Synthetic spectroscopic observables: excitation (PLE) spectra, emission
// spectra, Stark voltage maps and confocal scan images.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "molsps/config.hpp"
#include "molsps/fitting.hpp"
#include "molsps/photonmodel.hpp"

namespace molsps {

enum class SpectrumKind { excitation, emission, stark_row };

struct Spectrum {
  std::vector<double> axis;    // Hz offsets (excitation) or nm (emission)
  std::vector<double> values;  // >= 0
  SpectrumKind kind = SpectrumKind::excitation;

  void validate() const;
};

struct ExcitationScan {
  double start = -100e6;   // Hz
  double stop = 300e6;     // Hz
  double step = 0.5e6;     // Hz
  double saturation = 0.0;
  double laser_linewidth = 0.0;  // Hz FWHM of the Gaussian laser line
};

/// Scanning a narrow laser across the 0-0 lines: each molecule contributes a
/// Lorentzian of FWHM natural_linewidth * sqrt(1 + s) at its Stark-shifted
/// centre, convolved with the Gaussian laser line. Values are the detected
/// 0-0 rate per unit saturation parameter.
Spectrum excitation_spectrum(const SceneSpec& scene, const DetectionSpec& det, const ExcitationScan& scan);

struct SpectralLine {
  double wavelength_nm = 0.0;
  double weight = 0.0;
  bool zero_phonon = false;
};

struct EmissionSpectrum {
  std::vector<SpectralLine> lines;  // weights sum to 1
  Spectrum rendered;                // Gaussian lines, each integrating to its weight
};

struct SpectrometerSettings {
  double resolution_nm = 0.05;  // FWHM
  double start_nm = 585.0;
  double stop_nm = 650.0;
  double step_nm = 0.01;
};

EmissionSpectrum emission_spectrum(const MoleculeSpec& mol, const SceneSpec& scene,
                                   const SpectrometerSettings& spectrometer);

struct PeakSeparation {
  double separation = 0.0;  // axis units; 0 when fewer than two maxima remain
  double fwhm = 0.0;        // Lorentzian fit of the strongest peak
  int maxima = 0;
  bool indistinguishable = true;
};

/// Separation of the two strongest local maxima after a 3-step moving
/// average. Two lines count as indistinguishable when no two maxima are
/// further apart than the fitted width of the strongest one.
PeakSeparation peak_separation(const Spectrum& spectrum);

struct StarkRow {
  double voltage = 0.0;
  Spectrum spectrum;
  PeakSeparation peaks;
};

/// Overlaid excitation spectra of both microscopes, with `voltages` applied
/// to the electrode of `scene_b` only.
std::vector<StarkRow> stark_scan(const SceneSpec& scene_a, const SceneSpec& scene_b,
                                 std::span<const double> voltages, const DetectionSpec& det,
                                 const ExcitationScan& scan);

struct ScanImage {
  int nx = 0;
  int ny = 0;
  double pixel_pitch_um = 0.0;
  double origin_x_um = 0.0;
  double origin_y_um = 0.0;
  std::vector<double> values;  // row-major, y outer

  double at(int ix, int iy) const { return values[static_cast<std::size_t>(iy) * nx + ix]; }
  double x_um(int ix) const { return origin_x_um + ix * pixel_pitch_um; }
  double y_um(int iy) const { return origin_y_um + iy * pixel_pitch_um; }
};

/// Sum of Gaussian spots plus a flat background. Molecule brightness is
/// settings.brightness (integrated counts) weighted by its relative vibronic
/// pump rate. With `noise_seed` set every pixel is replaced by a Poisson draw.
ScanImage confocal_scan(const SceneSpec& scene, const LaserSpec& laser, const ScanSettings& settings,
                        std::optional<std::uint64_t> noise_seed);

/// Gaussian fit of the row through the brightest pixel; centre and FWHM in nm.
PeakFit fit_cross_section(const ScanImage& image);

/// P2 (ASCII) PGM. Counts above 65535 are scaled down; returns the factor
/// applied (1 when none).
double write_pgm(const ScanImage& image, const std::filesystem::path& path);
std::string encode_pgm(const ScanImage& image, double* scale = nullptr);

std::string encode_spectrum_csv(const Spectrum& spectrum);
std::string encode_stark_csv(std::span<const StarkRow> rows);

}  // namespace molsps
