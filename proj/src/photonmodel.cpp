#include "molsps/photonmodel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include "molsps/errors.hpp"

namespace molsps {

namespace {

bool is_fraction(double x) { return x >= 0.0 && x <= 1.0; }

void require(bool ok, const std::string& what) {
  if (!ok) throw PhysicsError(what);
}

}  // namespace

void MoleculeSpec::validate() const {
  const std::string tag = "molecule " + std::to_string(id) + ": ";
  require(lifetime_t1 > 0.0 && std::isfinite(lifetime_t1), tag + "lifetime_t1 must be > 0");
  require(zpl_branching > 0.0 && zpl_branching <= 1.0, tag + "zpl_branching must lie in (0, 1]");
  require(vibronic_fwhm > 0.0, tag + "vibronic_fwhm must be > 0");
  require(std::isfinite(zpl_center) && std::isfinite(vibronic_offset), tag + "line positions must be finite");
}

double LaserSpec::pulse_period() const {
  return static_cast<double>(pulse_divider) / pulse_rep_rate;
}

double LaserSpec::peak_pump_rate() const {
  return mode == LaserMode::cw ? cw_peak_pump_rate : pulse_peak_pump_rate;
}

void LaserSpec::validate() const {
  require(cw_peak_pump_rate >= 0.0 && pulse_peak_pump_rate >= 0.0, "laser: pump rates must be >= 0");
  require(laser_linewidth >= 0.0, "laser: laser_linewidth must be >= 0");
  require(pulse_divider >= 1, "laser: pulse_divider must be >= 1");
  if (mode == LaserMode::pulsed) {
    require(pulse_rep_rate > 0.0, "laser: pulse_rep_rate must be > 0");
    require(pulse_width > 0.0, "laser: pulse_width must be > 0");
    require(pulse_width < pulse_period(), "laser: pulse_width must be shorter than the divided period");
  }
}

void ElectrodeSpec::validate() const {
  require(gap > 0.0, "electrode: gap must be > 0");
  require(max_voltage >= 0.0, "electrode: max_voltage must be >= 0");
  require(std::abs(voltage) <= max_voltage,
          "electrode: |voltage| " + std::to_string(voltage) + " V exceeds max_voltage " +
              std::to_string(max_voltage) + " V");
}

void DetectionSpec::validate() const {
  require(is_fraction(collection_efficiency), "detection: collection_efficiency must lie in [0, 1]");
  require(is_fraction(zpl_filter_transmission), "detection: zpl_filter_transmission must lie in [0, 1]");
  require(is_fraction(vibronic_filter_transmission),
          "detection: vibronic_filter_transmission must lie in [0, 1]");
  require(is_fraction(fiber_coupling), "detection: fiber_coupling must lie in [0, 1]");
  require(dark_count_rate >= 0.0, "detection: dark_count_rate must be >= 0");
  require(timing_jitter_sigma >= 0.0, "detection: timing_jitter_sigma must be >= 0");
  require(dead_time >= 0.0, "detection: dead_time must be >= 0");
  require(resolution_ps >= 1, "detection: resolution must be >= 1 ps");
}

std::vector<EmissionLine> default_emission_lines() {
  return {{250.0, 0.15}, {500.0, 0.15}, {750.0, 0.15}, {1250.0, 0.30}, {1400.0, 0.25}};
}

void SceneSpec::validate() const {
  std::set<int> ids;
  for (const auto& m : molecules) {
    m.validate();
    require(ids.insert(m.id).second, "scene: duplicate molecule id " + std::to_string(m.id));
  }
  require(background_rate >= 0.0, "scene: background_rate must be >= 0");
  require(reference_wavelength_nm > 0.0, "scene: reference_wavelength must be > 0");
  require(k_vib > 0.0, "scene: k_vib must be > 0");
  for (const auto& line : emission_lines) {
    require(line.weight >= 0.0, "scene: emission line weights must be >= 0");
  }
  electrode.validate();
}

const MoleculeSpec& SceneSpec::molecule(int id) const {
  auto it = std::find_if(molecules.begin(), molecules.end(),
                         [id](const MoleculeSpec& m) { return m.id == id; });
  if (it == molecules.end()) throw InputError("scene has no molecule " + std::to_string(id));
  return *it;
}

double natural_linewidth(double t1) {
  require(t1 > 0.0, "natural_linewidth: lifetime must be > 0");
  return 1.0 / (2.0 * kPi * t1);
}

double lorentzian(double detuning, double fwhm) {
  require(fwhm > 0.0, "lorentzian: fwhm must be > 0");
  const double hw = 0.5 * fwhm;
  return hw * hw / (hw * hw + detuning * detuning);
}

double stark_shift(const MoleculeSpec& mol, const ElectrodeSpec& electrode) {
  electrode.validate();
  const double e = electrode.field();
  return -(mol.stark_linear * e + mol.stark_quadratic * e * e);
}

double shifted_center(const MoleculeSpec& mol, const ElectrodeSpec& electrode) {
  return mol.zpl_center + stark_shift(mol, electrode);
}

double stark_calibrate(double separation_at_zero, double merge_voltage, double gap) {
  require(merge_voltage > 0.0, "stark_calibrate: merge_voltage must be > 0");
  require(gap > 0.0, "stark_calibrate: gap must be > 0");
  return separation_at_zero / (merge_voltage / gap);
}

double pump_rate(const MoleculeSpec& mol, const LaserSpec& laser, const ElectrodeSpec& electrode) {
  mol.validate();
  laser.validate();
  const double resonance = shifted_center(mol, electrode) + mol.vibronic_offset;
  return laser.peak_pump_rate() * lorentzian(laser.frequency - resonance, mol.vibronic_fwhm);
}

Populations steady_state(double pump, double k_vib, double gamma) {
  require(pump >= 0.0 && k_vib >= 0.0, "steady_state: rates must be >= 0");
  require(gamma > 0.0, "steady_state: gamma must be > 0");
  if (pump == 0.0) return {1.0, 0.0, 0.0};
  // k_vib -> infinity collapses the vibronic level.
  const double v = std::isinf(k_vib) ? 0.0 : pump / k_vib;
  require(std::isfinite(v), "steady_state: k_vib must be > 0 when pumping");
  const double e = pump / gamma;
  const double norm = 1.0 + v + e;
  return {1.0 / norm, v / norm, e / norm};
}

double analytic_g2(double pump, double gamma, double tau) {
  require(pump >= 0.0, "analytic_g2: pump must be >= 0");
  require(gamma > 0.0, "analytic_g2: gamma must be > 0");
  return -std::expm1(-(pump + gamma) * std::abs(tau));
}

double mixture_g2_zero(std::span<const double> fractions, std::span<const double> g2_each) {
  if (fractions.size() != g2_each.size() || fractions.empty()) {
    throw InputError("mixture_g2_zero: fractions and g2 lists must be non-empty and of equal length");
  }
  const double total = std::accumulate(fractions.begin(), fractions.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-9) {
    throw InputError("mixture_g2_zero: fractions must sum to 1");
  }
  double g2 = 0.0;
  for (std::size_t i = 0; i < fractions.size(); ++i) {
    require(fractions[i] >= 0.0, "mixture_g2_zero: fractions must be >= 0");
    g2 += fractions[i] * fractions[i] * g2_each[i];
    for (std::size_t j = i + 1; j < fractions.size(); ++j) {
      g2 += 2.0 * fractions[i] * fractions[j];
    }
  }
  return g2;
}

double rate_budget(const MoleculeSpec& mol, const DetectionSpec& det, double p_excited) {
  mol.validate();
  det.validate();
  require(is_fraction(p_excited), "rate_budget: p_excited must lie in [0, 1]");
  return p_excited / mol.lifetime_t1 * mol.zpl_branching * det.collection_efficiency *
         det.zpl_filter_transmission * det.fiber_coupling;
}

double diffraction_fwhm(double wavelength_nm, double na) {
  require(na > 0.0 && na <= 2.0, "diffraction_fwhm: NA must lie in (0, 2]");
  require(wavelength_nm > 0.0, "diffraction_fwhm: wavelength must be > 0");
  return 0.51 * wavelength_nm / na;
}

double pulse_excitation_probability(double pump, double width) {
  require(pump >= 0.0 && width >= 0.0, "pulse_excitation_probability: arguments must be >= 0");
  return -std::expm1(-pump * width);
}

double reference_frequency(const SceneSpec& scene) {
  return kSpeedOfLight / (scene.reference_wavelength_nm * 1e-9);
}

double offset_to_wavelength_nm(const SceneSpec& scene, double offset_hz) {
  return kSpeedOfLight / (reference_frequency(scene) + offset_hz) * 1e9;
}

double wavenumber_to_hz(double cm) { return cm * 100.0 * kSpeedOfLight; }

}  // namespace molsps
