#pragma once

// INI-style scenario files.
//
//   [scene]              background_rate, reference_wavelength, k_vib
//   [electrode]          gap, voltage, max_voltage
//   [molecule.<id>]      MoleculeSpec fields
//   [laser]              LaserSpec fields
//   [detection]          DetectionSpec fields
//
// A second microscope is declared with a label: [scene.<label>],
// [electrode.<label>], [molecule.<label>.<id>]. The unlabeled microscope is
// always scene 0; labeled ones follow in order of first appearance.
//
// Optional analysis sections: [emission], [spectroscopy], [scan].
//
// Values carry explicit unit suffixes, matched case-sensitively ("9.4 ns",
// "180 MHz", "18 um", "42 V"). A bare number is read in SI base units, except
// positions (um), reference_wavelength (nm) and resolution (ps).

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "molsps/photonmodel.hpp"

namespace molsps {

struct Microscope {
  std::string label;  // empty for the primary microscope
  SceneSpec scene;
};

struct SpectroscopySettings {
  double scan_start = -100e6;  // Hz
  double scan_stop = 300e6;    // Hz
  double scan_step = 0.5e6;    // Hz
  double saturation = 0.0;
  double spectrometer_resolution_nm = 0.05;
  double spectrum_start_nm = 585.0;
  double spectrum_stop_nm = 650.0;
  double spectrum_step_nm = 0.01;
};

struct ScanSettings {
  double psf_fwhm_nm = 330.0;
  int nx = 51;
  int ny = 51;
  double pixel_pitch_um = 0.05;
  double origin_x_um = 0.0;  // centre of pixel (0, 0)
  double origin_y_um = 0.0;
  double brightness = 1e6;   // integrated counts of a molecule pumped at the peak rate
  double background = 20.0;  // counts per pixel
};

struct Config {
  std::vector<Microscope> microscopes;
  LaserSpec laser;
  DetectionSpec detection;
  SpectroscopySettings spectroscopy;
  ScanSettings scan;
  std::string source_text;

  const SceneSpec& scene(std::size_t index = 0) const;
  SceneSpec& scene(std::size_t index = 0);
  void validate() const;
};

/// Parses configuration text. Throws ConfigError naming the offending key
/// on syntax, unknown keys, or bad units, and PhysicsError when the parsed
/// values violate a physical precondition.
Config parse_config(std::string_view text);

/// Reads and parses a file. Missing or unreadable files throw IoError.
Config load_config(const std::filesystem::path& path);

/// Reads a value with a unit suffix in the given dimension. Exposed for CLI
/// flags ("250ps", "100 ns", "1e-9").
enum class Dimension { time, frequency, rate, length, voltage, dimensionless };
double parse_quantity(std::string_view text, Dimension dim, std::string_view key);

}  // namespace molsps
