#pragma once

// Physical configuration of a molecular single-photon source and the
// closed-form photophysics of the three-level cycle
//
//   ground --(pump)--> S1,v=1 --(k_vib)--> S1,v=0 --(gamma = 1/T1)--> ground
//
// Frequencies are offsets in Hz from the scene reference frequency
// (c / reference_wavelength). Times are seconds, rates s^-1.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace molsps {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

struct Position {
  double x_um = 0.0;
  double y_um = 0.0;
};

struct MoleculeSpec {
  int id = 0;
  Position position;
  double zpl_center = 0.0;         // Hz
  double lifetime_t1 = 9.4e-9;     // s
  double zpl_branching = 0.3;      // fraction of decays into the 0-0 line
  double vibronic_offset = 7.2e12; // Hz above the 0-0 line (placeholder)
  double vibronic_fwhm = 30e9;     // Hz
  double stark_linear = 0.0;       // Hz per V/m
  double stark_quadratic = 0.0;    // Hz per (V/m)^2
  double polarization_angle = 0.0; // rad

  void validate() const;
};

enum class LaserMode { cw, pulsed };

struct LaserSpec {
  LaserMode mode = LaserMode::cw;
  double frequency = 7.2e12;            // Hz
  double cw_peak_pump_rate = 0.0;       // s^-1 at exact vibronic resonance
  double laser_linewidth = 1e6;         // Hz
  double pulse_width = 700e-12;         // s
  double pulse_rep_rate = 76e6;         // Hz
  std::uint32_t pulse_divider = 20;
  double pulse_peak_pump_rate = 0.0;    // s^-1 inside a pulse

  /// Spacing of the pulses that reach the sample: divider / rep_rate.
  double pulse_period() const;
  /// Peak rate for the active mode.
  double peak_pump_rate() const;
  void validate() const;
};

struct ElectrodeSpec {
  double gap = 18e-6;        // m
  double voltage = 0.0;      // V
  double max_voltage = 90.0; // V

  /// Plate-capacitor field V / gap in V/m.
  double field() const { return voltage / gap; }
  void validate() const;
};

struct DetectionSpec {
  double collection_efficiency = 0.2;
  double zpl_filter_transmission = 0.5;
  double vibronic_filter_transmission = 0.0;
  double fiber_coupling = 0.3;
  double dark_count_rate = 0.0;      // s^-1 per channel
  double timing_jitter_sigma = 0.0;  // s
  double dead_time = 50e-9;          // s
  std::uint64_t resolution_ps = 1;

  void validate() const;
};

/// One red-shifted emission line of the vibronic manifold. Shifts are in
/// wavenumbers below the 0-0 line; weights are relative and get normalized to
/// share 1 - zpl_branching.
struct EmissionLine {
  double shift_cm = 0.0;
  double weight = 0.0;
};

/// Placeholder vibronic line list. Not taken from a measured spectrum.
std::vector<EmissionLine> default_emission_lines();

struct SceneSpec {
  std::vector<MoleculeSpec> molecules;
  double background_rate = 0.0;  // s^-1, Poissonian photons at the detectors
  ElectrodeSpec electrode;
  double reference_wavelength_nm = 590.0;
  double k_vib = 1e12;  // S1,v=1 -> S1,v=0 relaxation, s^-1
  std::vector<EmissionLine> emission_lines = default_emission_lines();

  void validate() const;
  const MoleculeSpec& molecule(int id) const;
};

struct Populations {
  double ground = 1.0;
  double vibronic = 0.0;
  double excited = 0.0;
};

/// Fourier-limited FWHM 1 / (2 pi T1).
double natural_linewidth(double t1);

/// Peak-normalized Lorentzian (G/2)^2 / ((G/2)^2 + d^2).
double lorentzian(double detuning, double fwhm);

/// Frequency change of the 0-0 line under the electrode field. Positive
/// coefficients move the line to lower frequency for positive voltage.
double stark_shift(const MoleculeSpec& mol, const ElectrodeSpec& electrode);

/// zpl_center + stark_shift.
double shifted_center(const MoleculeSpec& mol, const ElectrodeSpec& electrode);

/// Linear coefficient that closes `separation_at_zero` exactly at
/// `merge_voltage` across an electrode gap `gap`.
double stark_calibrate(double separation_at_zero, double merge_voltage, double gap);

/// Vibronic pump rate seen by `mol`: the mode's peak rate weighted by the
/// Lorentzian detuning from the Stark-shifted S1,v=1 resonance. The laser
/// linewidth is negligible against the vibronic width and is ignored here.
double pump_rate(const MoleculeSpec& mol, const LaserSpec& laser,
                 const ElectrodeSpec& electrode);

/// Steady state of the closed g -> v -> e -> g cycle.
Populations steady_state(double pump, double k_vib, double gamma);

/// g2(tau) = 1 - exp(-(pump + gamma) |tau|), valid for k_vib >> pump, gamma.
double analytic_g2(double pump, double gamma, double tau);

/// Zero-lag g2 of independent sources contributing intensity fractions
/// `fractions`. Background enters as a source with g2 = 1.
double mixture_g2_zero(std::span<const double> fractions, std::span<const double> g2_each);

/// Detected 0-0 photon rate after the full collection chain.
double rate_budget(const MoleculeSpec& mol, const DetectionSpec& det, double p_excited);

/// Confocal spot FWHM, 0.51 lambda / NA (convention that matches the
/// commonly quoted 270 nm at 590 nm and NA 1.12).
double diffraction_fwhm(double wavelength_nm, double na);

/// Probability of at least one pump event inside a rectangular pulse,
/// 1 - exp(-pump * width). Re-excitation within the pulse is not included.
double pulse_excitation_probability(double pump, double width);

/// Optical frequency of the scene reference, c / lambda.
double reference_frequency(const SceneSpec& scene);

/// Wavelength in nm of an offset frequency relative to the scene reference.
double offset_to_wavelength_nm(const SceneSpec& scene, double offset_hz);

/// Wavenumber (cm^-1) to frequency (Hz).
double wavenumber_to_hz(double cm);

}  // namespace molsps
