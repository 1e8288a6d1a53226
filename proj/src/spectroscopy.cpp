#include "molsps/spectroscopy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "molsps/errors.hpp"
#include "molsps/io.hpp"
#include "molsps/random.hpp"

namespace molsps {

namespace {

constexpr double kFwhmPerSigma = 2.3548200450309493;  // 2 sqrt(2 ln 2)

std::vector<double> make_axis(double start, double stop, double step) {
  if (!(step > 0.0) || !(stop > start)) throw PhysicsError("scan axis must be increasing with step > 0");
  const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  std::vector<double> axis(n);
  for (std::size_t i = 0; i < n; ++i) axis[i] = start + static_cast<double>(i) * step;
  return axis;
}

// Lorentzian (peak 1, FWHM `fwhm`) convolved with a unit-area Gaussian of
// FWHM `gauss_fwhm`, by composite Simpson over +-6 sigma.
double voigt(double detuning, double fwhm, double gauss_fwhm) {
  if (gauss_fwhm <= 0.0) return lorentzian(detuning, fwhm);
  const double sigma = gauss_fwhm / kFwhmPerSigma;
  constexpr int kIntervals = 240;
  const double lo = -6.0 * sigma;
  const double h = 12.0 * sigma / kIntervals;
  double sum = 0.0;
  for (int i = 0; i <= kIntervals; ++i) {
    const double y = lo + i * h;
    const double w = (i == 0 || i == kIntervals) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    sum += w * lorentzian(detuning - y, fwhm) * std::exp(-0.5 * y * y / (sigma * sigma));
  }
  return sum * h / 3.0 / (sigma * std::sqrt(2.0 * kPi));
}

std::vector<double> smooth3(const std::vector<double>& v) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::size_t lo = i == 0 ? 0 : i - 1;
    const std::size_t hi = std::min(v.size() - 1, i + 1);
    double s = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) s += v[j];
    out[i] = s / static_cast<double>(hi - lo + 1);
  }
  return out;
}

// Width of the line at `c1` from a joint fit of two Lorentzians plus an
// offset, so a close neighbour does not distort it.
double two_line_width(std::span<const double> x, std::span<const double> y, double c1, double c2) {
  const std::size_t n = x.size();
  const double ymax = *std::max_element(y.begin(), y.end());
  const double ymin = *std::min_element(y.begin(), y.end());
  // Work in units of the peak spacing around c1 for conditioning.
  const double scale = std::abs(c2 - c1);
  std::vector<double> u(n);
  for (std::size_t i = 0; i < n; ++i) u[i] = (x[i] - c1) / scale;
  const double norm = ymax > 0.0 ? ymax : 1.0;

  detail::Residuals model = [&](std::span<const double> p, std::span<double> r, double* jac) {
    for (std::size_t i = 0; i < n; ++i) {
      double value = p[6];
      for (int k = 0; k < 2; ++k) {
        const double c = p[3 * k], w = p[3 * k + 1], a = p[3 * k + 2];
        const double z = 2.0 * (u[i] - c) / w;
        const double d = 1.0 / (1.0 + z * z);
        value += a * d;
        if (jac) {
          const double dz = -2.0 * a * z * d * d;
          jac[i * 7 + 3 * k] = dz * (-2.0 / w);
          jac[i * 7 + 3 * k + 1] = dz * (-z / w);
          jac[i * 7 + 3 * k + 2] = d;
        }
      }
      if (jac) jac[i * 7 + 6] = 1.0;
      r[i] = value - y[i] / norm;
    }
  };
  const double w0 = 1.0;
  const double a0 = (ymax - ymin) / norm;
  const auto fit = detail::least_squares(model, {0.0, w0, a0, (c2 - c1) / scale, w0, 0.5 * a0, ymin / norm}, n);
  return std::abs(fit.params[1]) * scale;
}

}  // namespace

void Spectrum::validate() const {
  if (axis.size() != values.size()) throw InputError("spectrum: axis and values differ in length");
  for (std::size_t i = 1; i < axis.size(); ++i) {
    if (!(axis[i] > axis[i - 1])) throw InputError("spectrum: axis must be strictly increasing");
  }
  for (double v : values) {
    if (!(v >= 0.0)) throw InputError("spectrum: values must be >= 0");
  }
}

Spectrum excitation_spectrum(const SceneSpec& scene, const DetectionSpec& det, const ExcitationScan& scan) {
  scene.validate();
  det.validate();
  if (scan.saturation < 0.0) throw PhysicsError("excitation_spectrum: saturation must be >= 0");
  if (scan.laser_linewidth < 0.0) throw PhysicsError("excitation_spectrum: laser linewidth must be >= 0");

  Spectrum s;
  s.kind = SpectrumKind::excitation;
  s.axis = make_axis(scan.start, scan.stop, scan.step);
  s.values.assign(s.axis.size(), 0.0);
  const double broadening = std::sqrt(1.0 + scan.saturation);
  for (const auto& mol : scene.molecules) {
    const double center = shifted_center(mol, scene.electrode);
    const double fwhm = natural_linewidth(mol.lifetime_t1) * broadening;
    const double amplitude = mol.zpl_branching / mol.lifetime_t1 * det.collection_efficiency *
                             det.zpl_filter_transmission * det.fiber_coupling / (1.0 + scan.saturation);
    for (std::size_t i = 0; i < s.axis.size(); ++i) {
      s.values[i] += amplitude * voigt(s.axis[i] - center, fwhm, scan.laser_linewidth);
    }
  }
  return s;
}

EmissionSpectrum emission_spectrum(const MoleculeSpec& mol, const SceneSpec& scene,
                                   const SpectrometerSettings& spectrometer) {
  mol.validate();
  if (!(spectrometer.resolution_nm > 0.0)) throw PhysicsError("emission_spectrum: resolution must be > 0");

  EmissionSpectrum out;
  const double zpl_nm = offset_to_wavelength_nm(scene, shifted_center(mol, scene.electrode));
  out.lines.push_back({zpl_nm, mol.zpl_branching, true});

  double total = 0.0;
  for (const auto& line : scene.emission_lines) total += line.weight;
  const double vibronic_share = 1.0 - mol.zpl_branching;
  if (vibronic_share > 0.0) {
    if (!(total > 0.0)) {
      throw PhysicsError("emission_spectrum: zpl_branching < 1 needs at least one weighted vibronic line");
    }
    const double zpl_wavenumber = 1e7 / zpl_nm;
    for (const auto& line : scene.emission_lines) {
      if (line.weight <= 0.0) continue;
      out.lines.push_back({1e7 / (zpl_wavenumber - line.shift_cm), vibronic_share * line.weight / total, false});
    }
  }

  auto& r = out.rendered;
  r.kind = SpectrumKind::emission;
  r.axis = make_axis(spectrometer.start_nm, spectrometer.stop_nm, spectrometer.step_nm);
  r.values.assign(r.axis.size(), 0.0);
  const double sigma = spectrometer.resolution_nm / kFwhmPerSigma;
  const double norm = 1.0 / (sigma * std::sqrt(2.0 * kPi));
  for (const auto& line : out.lines) {
    for (std::size_t i = 0; i < r.axis.size(); ++i) {
      const double d = (r.axis[i] - line.wavelength_nm) / sigma;
      if (std::abs(d) < 40.0) r.values[i] += line.weight * norm * std::exp(-0.5 * d * d);
    }
  }
  return out;
}

PeakSeparation peak_separation(const Spectrum& spectrum) {
  spectrum.validate();
  const auto& x = spectrum.axis;
  const auto y = smooth3(spectrum.values);
  const std::size_t n = y.size();
  if (n < 5) throw InputError("peak_separation: need at least 5 samples");

  std::vector<std::size_t> maxima;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (y[i] > y[i - 1] && y[i] >= y[i + 1]) maxima.push_back(i);
  }
  std::sort(maxima.begin(), maxima.end(), [&](std::size_t a, std::size_t b) { return y[a] > y[b]; });

  PeakSeparation out;
  out.maxima = static_cast<int>(maxima.size());
  if (maxima.empty()) throw InputError("peak_separation: spectrum has no interior maximum");
  const std::size_t top = maxima[0];
  if (maxima.size() >= 2) out.separation = std::abs(x[maxima[1]] - x[top]);

  if (maxima.size() < 2) {
    out.fwhm = fit_lorentzian(x, spectrum.values).fwhm;
  } else {
    out.fwhm = two_line_width(x, spectrum.values, x[top], x[maxima[1]]);
  }
  out.indistinguishable = !(out.separation > out.fwhm);
  return out;
}

std::vector<StarkRow> stark_scan(const SceneSpec& scene_a, const SceneSpec& scene_b,
                                 std::span<const double> voltages, const DetectionSpec& det,
                                 const ExcitationScan& scan) {
  const auto base = excitation_spectrum(scene_a, det, scan);
  std::vector<StarkRow> rows;
  rows.reserve(voltages.size());
  for (double v : voltages) {
    SceneSpec tuned = scene_b;
    tuned.electrode.voltage = v;
    tuned.electrode.validate();
    StarkRow row;
    row.voltage = v;
    row.spectrum = excitation_spectrum(tuned, det, scan);
    row.spectrum.kind = SpectrumKind::stark_row;
    for (std::size_t i = 0; i < base.values.size(); ++i) row.spectrum.values[i] += base.values[i];
    row.peaks = peak_separation(row.spectrum);
    rows.push_back(std::move(row));
  }
  return rows;
}

ScanImage confocal_scan(const SceneSpec& scene, const LaserSpec& laser, const ScanSettings& settings,
                        std::optional<std::uint64_t> noise_seed) {
  scene.validate();
  if (settings.nx < 1 || settings.ny < 1) throw PhysicsError("confocal_scan: grid must be at least 1x1");
  if (!(settings.psf_fwhm_nm > 0.0) || !(settings.pixel_pitch_um > 0.0)) {
    throw PhysicsError("confocal_scan: psf_fwhm and pixel_pitch must be > 0");
  }
  if (settings.brightness < 0.0 || settings.background < 0.0) {
    throw PhysicsError("confocal_scan: brightness and background must be >= 0");
  }

  ScanImage img;
  img.nx = settings.nx;
  img.ny = settings.ny;
  img.pixel_pitch_um = settings.pixel_pitch_um;
  img.origin_x_um = settings.origin_x_um;
  img.origin_y_um = settings.origin_y_um;
  img.values.assign(static_cast<std::size_t>(img.nx) * img.ny, settings.background);

  const double sigma = settings.psf_fwhm_nm * 1e-3 / kFwhmPerSigma;
  const double pixel_area = settings.pixel_pitch_um * settings.pixel_pitch_um;
  for (const auto& mol : scene.molecules) {
    const double resonance = shifted_center(mol, scene.electrode) + mol.vibronic_offset;
    const double brightness = settings.brightness * lorentzian(laser.frequency - resonance, mol.vibronic_fwhm);
    const double peak = brightness * pixel_area / (2.0 * kPi * sigma * sigma);
    for (int iy = 0; iy < img.ny; ++iy) {
      const double dy = img.y_um(iy) - mol.position.y_um;
      for (int ix = 0; ix < img.nx; ++ix) {
        const double dx = img.x_um(ix) - mol.position.x_um;
        img.values[static_cast<std::size_t>(iy) * img.nx + ix] +=
            peak * std::exp(-0.5 * (dx * dx + dy * dy) / (sigma * sigma));
      }
    }
  }

  if (noise_seed) {
    Rng rng(*noise_seed);
    for (auto& v : img.values) {
      v = v > 0.0 ? static_cast<double>(std::poisson_distribution<long long>(v)(rng)) : 0.0;
    }
  }
  return img;
}

PeakFit fit_cross_section(const ScanImage& image) {
  if (image.values.empty()) throw InputError("fit_cross_section: empty image");
  const auto imax = static_cast<std::size_t>(
      std::max_element(image.values.begin(), image.values.end()) - image.values.begin());
  const int row = static_cast<int>(imax / static_cast<std::size_t>(image.nx));
  std::vector<double> x(static_cast<std::size_t>(image.nx)), y(x.size());
  for (int ix = 0; ix < image.nx; ++ix) {
    x[static_cast<std::size_t>(ix)] = image.x_um(ix) * 1e3;
    y[static_cast<std::size_t>(ix)] = image.at(ix, row);
  }
  return fit_gaussian(x, y);
}

std::string encode_pgm(const ScanImage& image, double* scale) {
  const double peak = image.values.empty() ? 0.0 : *std::max_element(image.values.begin(), image.values.end());
  const double factor = peak > 65535.0 ? 65535.0 / peak : 1.0;
  long maxval = 1;
  std::vector<long> pixels(image.values.size());
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    pixels[i] = std::lround(std::max(0.0, image.values[i]) * factor);
    maxval = std::max(maxval, pixels[i]);
  }
  std::string out = "P2\n" + std::to_string(image.nx) + " " + std::to_string(image.ny) + "\n" +
                    std::to_string(maxval) + "\n";
  for (int iy = 0; iy < image.ny; ++iy) {
    for (int ix = 0; ix < image.nx; ++ix) {
      if (ix) out += ' ';
      out += std::to_string(pixels[static_cast<std::size_t>(iy) * image.nx + ix]);
    }
    out += '\n';
  }
  if (scale) *scale = factor;
  return out;
}

double write_pgm(const ScanImage& image, const std::filesystem::path& path) {
  double factor = 1.0;
  write_file_atomic(path, encode_pgm(image, &factor));
  return factor;
}

std::string encode_spectrum_csv(const Spectrum& spectrum) {
  std::string out = "axis,value\n";
  for (std::size_t i = 0; i < spectrum.axis.size(); ++i) {
    out += format_double(spectrum.axis[i]) + "," + format_double(spectrum.values[i]) + "\n";
  }
  return out;
}

std::string encode_stark_csv(std::span<const StarkRow> rows) {
  std::string out = "voltage,axis,value\n";
  for (const auto& row : rows) {
    const auto v = format_double(row.voltage);
    for (std::size_t i = 0; i < row.spectrum.axis.size(); ++i) {
      out += v + "," + format_double(row.spectrum.axis[i]) + "," + format_double(row.spectrum.values[i]) + "\n";
    }
  }
  return out;
}

}  // namespace molsps
