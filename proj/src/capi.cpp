#include "molsps/molsps.h"

#include <cmath>
#include <exception>
#include <new>
#include <string>
#include <vector>

#include "molsps/config.hpp"
#include "molsps/correlator.hpp"
#include "molsps/errors.hpp"
#include "molsps/interference.hpp"
#include "molsps/io.hpp"
#include "molsps/kmc.hpp"
#include "molsps/random.hpp"
#include "molsps/spectroscopy.hpp"
#include "molsps/tagio.hpp"

#ifndef MOLSPS_VERSION
#define MOLSPS_VERSION "0.0.0"
#endif

struct msps_config {
  molsps::Config value;
};
struct msps_photons {
  std::vector<molsps::PhotonRecord> value;
};
struct msps_tags {
  molsps::TimeTagSet value;
};
struct msps_histogram {
  molsps::CorrelationHistogram value;
};
struct msps_spectrum {
  molsps::Spectrum value;
  std::vector<molsps::SpectralLine> lines;
};
struct msps_stark_map {
  std::vector<molsps::StarkRow> rows;
};
struct msps_image {
  molsps::ScanImage value;
};

namespace {

thread_local std::string last_error;

msps_status fail(msps_status status, const std::string& message) {
  last_error = message;
  return status;
}

// Runs `body`, translating exceptions into status codes.
template <class F>
msps_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return MSPS_OK;
  } catch (const molsps::Error& e) {
    return fail(static_cast<msps_status>(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(MSPS_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(MSPS_ERR_INTERNAL, e.what());
  }
}

template <class T>
void require(const T* p, const char* name) {
  if (!p) throw molsps::InputError(std::string(name) + " must not be NULL");
}

const molsps::SceneSpec& scene_of(const msps_config* cfg, std::size_t scene) {
  require(cfg, "config");
  if (scene >= cfg->value.microscopes.size()) {
    throw molsps::InputError("scene index " + std::to_string(scene) + " out of range");
  }
  return cfg->value.scene(scene);
}

void to_peak(const molsps::PeakFit& fit, msps_peak_fit* out) {
  out->center = fit.center;
  out->fwhm = fit.fwhm;
  out->amplitude = fit.amplitude;
  out->offset = fit.offset;
  out->residual_norm = fit.residual_norm;
}

}  // namespace

extern "C" {

const char* msps_version(void) { return MOLSPS_VERSION; }
const char* msps_last_error(void) { return last_error.c_str(); }

msps_status msps_config_load(const char* path, msps_config** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new msps_config{molsps::load_config(path)};
  });
}

msps_status msps_config_parse(const char* text, size_t length, msps_config** out) {
  return guarded([&] {
    require(text, "text");
    require(out, "out");
    *out = new msps_config{molsps::parse_config(std::string_view(text, length))};
  });
}

void msps_config_free(msps_config* cfg) { delete cfg; }

size_t msps_config_scene_count(const msps_config* cfg) { return cfg ? cfg->value.microscopes.size() : 0; }

const char* msps_config_scene_label(const msps_config* cfg, size_t scene) {
  if (!cfg || scene >= cfg->value.microscopes.size()) return "";
  return cfg->value.microscopes[scene].label.c_str();
}

size_t msps_config_molecule_count(const msps_config* cfg, size_t scene) {
  if (!cfg || scene >= cfg->value.microscopes.size()) return 0;
  return cfg->value.scene(scene).molecules.size();
}

int msps_config_molecule_id(const msps_config* cfg, size_t scene, size_t index) {
  if (index >= msps_config_molecule_count(cfg, scene)) return -1;
  return cfg->value.scene(scene).molecules[index].id;
}

msps_status msps_config_set_voltage(msps_config* cfg, size_t scene, double volts) {
  return guarded([&] {
    scene_of(cfg, scene);
    molsps::ElectrodeSpec e = cfg->value.scene(scene).electrode;
    e.voltage = volts;
    e.validate();
    cfg->value.scene(scene).electrode = e;
  });
}

msps_status msps_config_pulse_period(const msps_config* cfg, double* seconds) {
  return guarded([&] {
    require(cfg, "config");
    require(seconds, "seconds");
    *seconds = cfg->value.laser.pulse_period();
  });
}

int msps_config_is_pulsed(const msps_config* cfg) {
  return cfg && cfg->value.laser.mode == molsps::LaserMode::pulsed ? 1 : 0;
}

msps_status msps_config_scene_digest(const msps_config* cfg, size_t scene, char out[17]) {
  return guarded([&] {
    require(out, "out");
    const auto digest = molsps::scene_digest(scene_of(cfg, scene), cfg->value.laser);
    const auto n = digest.copy(out, 16);
    out[n] = '\0';
  });
}

msps_status msps_parse_quantity(const char* text, msps_dimension dim, double* out) {
  return guarded([&] {
    require(text, "text");
    require(out, "out");
    if (dim < MSPS_DIM_TIME || dim > MSPS_DIM_DIMENSIONLESS) throw molsps::InputError("unknown dimension");
    *out = molsps::parse_quantity(text, static_cast<molsps::Dimension>(dim), "value");
  });
}

uint64_t msps_derive_seed(uint64_t seed, uint64_t stream) { return molsps::derive_seed(seed, stream); }

msps_status msps_simulate(const msps_config* cfg, size_t scene, double duration, uint64_t seed,
                          msps_photons** out) {
  return guarded([&] {
    require(out, "out");
    const auto& s = scene_of(cfg, scene);
    *out = new msps_photons{molsps::simulate_stream(s, cfg->value.laser, duration, seed)};
  });
}

void msps_photons_free(msps_photons* photons) { delete photons; }

size_t msps_photons_count(const msps_photons* photons) { return photons ? photons->value.size() : 0; }

msps_status msps_photons_get(const msps_photons* photons, size_t index, msps_photon* out) {
  return guarded([&] {
    require(photons, "photons");
    require(out, "out");
    if (index >= photons->value.size()) throw molsps::InputError("photon index out of range");
    const auto& p = photons->value[index];
    *out = {p.emit_time, p.frequency, p.excite_time, p.source_id, p.branch == molsps::Branch::zpl ? 1 : 0};
  });
}

msps_status msps_photons_write_truth(const msps_photons* photons, const char* path) {
  return guarded([&] {
    require(photons, "photons");
    require(path, "path");
    molsps::write_truth_csv(photons->value, path);
  });
}

msps_status msps_detect(const msps_config* cfg, const msps_photons* photons, msps_split split, double duration,
                        uint64_t seed, msps_tags** out) {
  return guarded([&] {
    require(cfg, "config");
    require(photons, "photons");
    require(out, "out");
    const auto mode = split == MSPS_SPLIT_HBT ? molsps::Split::hbt : molsps::Split::single;
    *out = new msps_tags{molsps::apply_detection(photons->value, cfg->value.detection, mode, duration, seed)};
  });
}

msps_status msps_tags_read(const char* path, double duration, msps_tags** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    std::optional<double> d;
    if (duration > 0.0) d = duration;
    *out = new msps_tags{molsps::read_tags(path, d)};
  });
}

msps_status msps_tags_write(const msps_tags* tags, const char* path, msps_tag_format format) {
  return guarded([&] {
    require(tags, "tags");
    require(path, "path");
    molsps::write_tags(tags->value, path,
                       format == MSPS_FORMAT_CSV ? molsps::TagFormat::csv : molsps::TagFormat::ptag);
  });
}

void msps_tags_free(msps_tags* tags) { delete tags; }
double msps_tags_duration(const msps_tags* tags) { return tags ? tags->value.duration : 0.0; }
uint64_t msps_tags_resolution_ps(const msps_tags* tags) { return tags ? tags->value.resolution_ps : 0; }
size_t msps_tags_channel_count(const msps_tags* tags) { return tags ? tags->value.channels.size() : 0; }

msps_status msps_tags_channel(const msps_tags* tags, int channel, const uint64_t** data, size_t* n) {
  return guarded([&] {
    require(tags, "tags");
    require(data, "data");
    require(n, "n");
    const auto it = tags->value.channels.find(channel);
    if (it == tags->value.channels.end()) {
      *data = nullptr;
      *n = 0;
    } else {
      *data = it->second.data();
      *n = it->second.size();
    }
  });
}

msps_status msps_correlate(const msps_tags* tags, int channel_a, int channel_b, double bin_width,
                           double max_lag, msps_histogram** out) {
  return guarded([&] {
    require(tags, "tags");
    require(out, "out");
    *out = new msps_histogram{molsps::correlate(tags->value, channel_a, channel_b, bin_width, max_lag)};
  });
}

msps_status msps_histogram_normalize(const msps_histogram* raw, msps_histogram** out) {
  return guarded([&] {
    require(raw, "histogram");
    require(out, "out");
    *out = new msps_histogram{molsps::normalize_g2(raw->value)};
  });
}

void msps_histogram_free(msps_histogram* h) { delete h; }

msps_status msps_histogram_info_get(const msps_histogram* h, msps_histogram_info* out) {
  return guarded([&] {
    require(h, "histogram");
    require(out, "out");
    const auto& v = h->value;
    *out = {v.bin_width, v.max_lag, v.rate_a, v.rate_b, v.duration, v.normalized ? 1 : 0};
  });
}

msps_status msps_histogram_bins(const msps_histogram* h, const double** bins, size_t* n) {
  return guarded([&] {
    require(h, "histogram");
    require(bins, "bins");
    require(n, "n");
    *bins = h->value.bins.data();
    *n = h->value.bins.size();
  });
}

msps_status msps_histogram_write_csv(const msps_histogram* h, const char* path) {
  return guarded([&] {
    require(h, "histogram");
    require(path, "path");
    std::string text = "lag_s,value\n";
    for (std::size_t i = 0; i < h->value.bins.size(); ++i) {
      text += molsps::format_double(h->value.lag(i)) + "," + molsps::format_double(h->value.bins[i]) + "\n";
    }
    molsps::write_file_atomic(path, text);
  });
}

msps_status msps_fit_antibunching(const msps_histogram* normalized, msps_antibunching* out) {
  return guarded([&] {
    require(normalized, "histogram");
    require(out, "out");
    const auto fit = molsps::fit_antibunching(normalized->value);
    *out = {fit.g2_zero, fit.decay_time, fit.plateau, fit.residual_norm, fit.decay_identified ? 1 : 0};
  });
}

msps_status msps_pulsed_peak_ratio(const msps_histogram* raw, double period, double window,
                                  msps_pulsed_ratio* out) {
  return guarded([&] {
    require(raw, "histogram");
    require(out, "out");
    const auto r = molsps::pulsed_peak_ratio(raw->value, period, window);
    *out = {r.ratio, r.central_area, r.mean_side_area, r.side_peaks};
  });
}

msps_status msps_wavepacket_overlap(double gamma_a, double gamma_b, double detuning, double ta, double tb,
                                    double* out) {
  return guarded([&] {
    require(out, "out");
    *out = molsps::wavepacket_overlap({gamma_a, detuning, ta}, {gamma_b, 0.0, tb});
  });
}

msps_status msps_hom(const msps_config* cfg, size_t scene_a, size_t scene_b, double voltage_b,
                     const msps_hom_settings* settings, msps_hom_result* out) {
  return guarded([&] {
    require(settings, "settings");
    require(out, "out");
    const auto& a = scene_of(cfg, scene_a);
    molsps::SceneSpec b = scene_of(cfg, scene_b);
    b.electrode.voltage = voltage_b;
    b.electrode.validate();
    molsps::HomSettings hs;
    hs.n_pulses = settings->n_pulses;
    hs.seed = settings->seed;
    hs.force_simultaneous = settings->force_simultaneous != 0;
    const auto r = molsps::simulate_hom(a, b, cfg->value.laser, hs);
    *out = {r.n_pulses, r.both_emitted, r.singles, r.coincidences, r.p_estimate, r.p_error, r.voltage};
  });
}

msps_status msps_excitation_spectrum(const msps_config* cfg, size_t scene, msps_spectrum** out) {
  return guarded([&] {
    require(out, "out");
    const auto& s = scene_of(cfg, scene);
    const auto& sp = cfg->value.spectroscopy;
    molsps::ExcitationScan scan{sp.scan_start, sp.scan_stop, sp.scan_step, sp.saturation,
                                cfg->value.laser.laser_linewidth};
    *out = new msps_spectrum{molsps::excitation_spectrum(s, cfg->value.detection, scan), {}};
  });
}

msps_status msps_emission_spectrum(const msps_config* cfg, size_t scene, int molecule_id, msps_spectrum** out) {
  return guarded([&] {
    require(out, "out");
    const auto& s = scene_of(cfg, scene);
    const auto& sp = cfg->value.spectroscopy;
    molsps::SpectrometerSettings spec{sp.spectrometer_resolution_nm, sp.spectrum_start_nm, sp.spectrum_stop_nm,
                                      sp.spectrum_step_nm};
    auto e = molsps::emission_spectrum(s.molecule(molecule_id), s, spec);
    *out = new msps_spectrum{std::move(e.rendered), std::move(e.lines)};
  });
}

void msps_spectrum_free(msps_spectrum* s) { delete s; }

msps_status msps_spectrum_data(const msps_spectrum* s, const double** axis, const double** values, size_t* n) {
  return guarded([&] {
    require(s, "spectrum");
    require(axis, "axis");
    require(values, "values");
    require(n, "n");
    *axis = s->value.axis.data();
    *values = s->value.values.data();
    *n = s->value.axis.size();
  });
}

size_t msps_spectrum_line_count(const msps_spectrum* s) { return s ? s->lines.size() : 0; }

msps_status msps_spectrum_line(const msps_spectrum* s, size_t index, msps_line* out) {
  return guarded([&] {
    require(s, "spectrum");
    require(out, "out");
    if (index >= s->lines.size()) throw molsps::InputError("line index out of range");
    const auto& l = s->lines[index];
    *out = {l.wavelength_nm, l.weight, l.zero_phonon ? 1 : 0};
  });
}

msps_status msps_spectrum_fit_lorentzian(const msps_spectrum* s, msps_peak_fit* out) {
  return guarded([&] {
    require(s, "spectrum");
    require(out, "out");
    to_peak(molsps::fit_lorentzian(s->value.axis, s->value.values), out);
  });
}

msps_status msps_spectrum_write_csv(const msps_spectrum* s, const char* path) {
  return guarded([&] {
    require(s, "spectrum");
    require(path, "path");
    molsps::write_file_atomic(path, molsps::encode_spectrum_csv(s->value));
  });
}

msps_status msps_stark_scan(const msps_config* cfg, size_t scene_a, size_t scene_b, const double* voltages,
                            size_t n, msps_stark_map** out) {
  return guarded([&] {
    require(out, "out");
    if (n > 0) require(voltages, "voltages");
    const auto& a = scene_of(cfg, scene_a);
    const auto& b = scene_of(cfg, scene_b);
    const auto& sp = cfg->value.spectroscopy;
    molsps::ExcitationScan scan{sp.scan_start, sp.scan_stop, sp.scan_step, sp.saturation,
                                cfg->value.laser.laser_linewidth};
    *out = new msps_stark_map{
        molsps::stark_scan(a, b, std::span<const double>(voltages, n), cfg->value.detection, scan)};
  });
}

void msps_stark_map_free(msps_stark_map* map) { delete map; }
size_t msps_stark_map_rows(const msps_stark_map* map) { return map ? map->rows.size() : 0; }

msps_status msps_stark_map_row(const msps_stark_map* map, size_t index, msps_stark_row* out) {
  return guarded([&] {
    require(map, "map");
    require(out, "out");
    if (index >= map->rows.size()) throw molsps::InputError("row index out of range");
    const auto& r = map->rows[index];
    *out = {r.voltage, r.peaks.separation, r.peaks.fwhm, r.peaks.maxima, r.peaks.indistinguishable ? 1 : 0};
  });
}

msps_status msps_stark_map_write_csv(const msps_stark_map* map, const char* path) {
  return guarded([&] {
    require(map, "map");
    require(path, "path");
    molsps::write_file_atomic(path, molsps::encode_stark_csv(map->rows));
  });
}

msps_status msps_confocal_scan(const msps_config* cfg, size_t scene, int noisy, uint64_t seed, msps_image** out) {
  return guarded([&] {
    require(out, "out");
    const auto& s = scene_of(cfg, scene);
    std::optional<std::uint64_t> noise;
    if (noisy) noise = seed;
    *out = new msps_image{molsps::confocal_scan(s, cfg->value.laser, cfg->value.scan, noise)};
  });
}

void msps_image_free(msps_image* img) { delete img; }

msps_status msps_image_info_get(const msps_image* img, msps_image_info* out) {
  return guarded([&] {
    require(img, "image");
    require(out, "out");
    const auto& v = img->value;
    *out = {v.nx, v.ny, v.pixel_pitch_um, v.origin_x_um, v.origin_y_um};
  });
}

msps_status msps_image_values(const msps_image* img, const double** values, size_t* n) {
  return guarded([&] {
    require(img, "image");
    require(values, "values");
    require(n, "n");
    *values = img->value.values.data();
    *n = img->value.values.size();
  });
}

msps_status msps_image_fit_cross_section(const msps_image* img, msps_peak_fit* out) {
  return guarded([&] {
    require(img, "image");
    require(out, "out");
    to_peak(molsps::fit_cross_section(img->value), out);
  });
}

msps_status msps_image_write_pgm(const msps_image* img, const char* path, double* scale) {
  return guarded([&] {
    require(img, "image");
    require(path, "path");
    const double factor = molsps::write_pgm(img->value, path);
    if (scale) *scale = factor;
  });
}

double msps_natural_linewidth(double t1) {
  return t1 > 0.0 ? molsps::natural_linewidth(t1) : std::nan("");
}

double msps_diffraction_fwhm(double wavelength_nm, double na) {
  return wavelength_nm > 0.0 && na > 0.0 ? molsps::diffraction_fwhm(wavelength_nm, na) : std::nan("");
}

double msps_stark_calibrate(double separation_hz, double merge_voltage, double gap_m) {
  try {
    return molsps::stark_calibrate(separation_hz, merge_voltage, gap_m);
  } catch (const std::exception& e) {
    last_error = e.what();
    return std::nan("");
  }
}

msps_status msps_rate_budget(const msps_config* cfg, size_t scene, msps_budget_entry* entries, size_t capacity,
                             size_t* count) {
  return guarded([&] {
    require(count, "count");
    if (capacity > 0) require(entries, "entries");
    const auto& s = scene_of(cfg, scene);
    *count = s.molecules.size();
    for (std::size_t i = 0; i < s.molecules.size() && i < capacity; ++i) {
      const auto& m = s.molecules[i];
      const double pump = molsps::pump_rate(m, cfg->value.laser, s.electrode);
      const auto pop = molsps::steady_state(pump, s.k_vib, 1.0 / m.lifetime_t1);
      entries[i] = {m.id, pump, pop.excited, molsps::rate_budget(m, cfg->value.detection, pop.excited)};
    }
  });
}

msps_status msps_write_file_atomic(const char* path, const void* data, size_t length) {
  return guarded([&] {
    require(path, "path");
    if (length > 0) require(data, "data");
    molsps::write_file_atomic(path, std::string_view(static_cast<const char*>(data), length));
  });
}

msps_status msps_file_sha256(const char* path, char out[65]) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    const auto h = molsps::file_sha256(path);
    const auto n = h.copy(out, 64);
    out[n] = '\0';
  });
}

}  // extern "C"
