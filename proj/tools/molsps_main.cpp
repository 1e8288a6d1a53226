// molsps: command-line front end over the C API.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "molsps/molsps.h"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

// Carries an msps_status out of the subcommand bodies.
struct Failure : std::runtime_error {
  msps_status status;
  Failure(msps_status s, const std::string& what) : std::runtime_error(what), status(s) {}
};

void check(msps_status s, const std::string& context = {}) {
  if (s == MSPS_OK) return;
  std::string msg = msps_last_error();
  throw Failure(s, context.empty() ? msg : context + ": " + msg);
}

template <class T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using Config = std::unique_ptr<msps_config, Deleter<msps_config, msps_config_free>>;
using Photons = std::unique_ptr<msps_photons, Deleter<msps_photons, msps_photons_free>>;
using Tags = std::unique_ptr<msps_tags, Deleter<msps_tags, msps_tags_free>>;
using Histogram = std::unique_ptr<msps_histogram, Deleter<msps_histogram, msps_histogram_free>>;
using SpectrumPtr = std::unique_ptr<msps_spectrum, Deleter<msps_spectrum, msps_spectrum_free>>;
using StarkMap = std::unique_ptr<msps_stark_map, Deleter<msps_stark_map, msps_stark_map_free>>;
using Image = std::unique_ptr<msps_image, Deleter<msps_image, msps_image_free>>;

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double quantity(const std::string& text, msps_dimension dim, const std::string& flag) {
  double v = 0.0;
  check(msps_parse_quantity(text.c_str(), dim, &v), flag);
  return v;
}

std::vector<double> parse_sweep(const std::string& text) {
  std::vector<double> parts;
  std::size_t start = 0;
  while (true) {
    const auto colon = text.find(':', start);
    const auto piece = text.substr(start, colon == std::string::npos ? std::string::npos : colon - start);
    double v = 0.0;
    const auto r = std::from_chars(piece.data(), piece.data() + piece.size(), v);
    if (r.ec != std::errc() || r.ptr != piece.data() + piece.size()) {
      throw Failure(MSPS_ERR_CONFIG, "--sweep: expected start:stop:step, got '" + text + "'");
    }
    parts.push_back(v);
    if (colon == std::string::npos) break;
    start = colon + 1;
  }
  if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0]) {
    throw Failure(MSPS_ERR_CONFIG, "--sweep: expected start:stop:step with step > 0 and stop >= start");
  }
  const auto n = static_cast<std::size_t>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9)) + 1;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = parts[0] + static_cast<double>(i) * parts[2];
  return out;
}

struct Common {
  std::string config;
  std::uint64_t seed = 1;
  std::string out = ".";
  std::string format;
  std::string scene = "0";
  std::optional<double> voltage;
};

struct Run {
  std::string command;
  Common* common = nullptr;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  json parameters = json::object();

  fs::path out_path(const std::string& name) {
    outputs.push_back(name);
    return fs::path(common->out) / name;
  }
};

void write_text(const fs::path& path, const std::string& text) {
  check(msps_write_file_atomic(path.string().c_str(), text.data(), text.size()), path.string());
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::string sha256(const std::string& path) {
  char hex[65];
  check(msps_file_sha256(path.c_str(), hex), path);
  return hex;
}

void write_manifest(Run& run) {
  json m;
  m["command"] = run.command;
  m["config"] = run.common->config;
  m["seed"] = run.common->seed;
  m["output_dir"] = run.common->out;
  m["tool_version"] = msps_version();
  m["parameters"] = run.parameters;
  json inputs = json::object();
  for (const auto& p : run.inputs) inputs[p] = sha256(p);
  m["input_digests"] = inputs;
  json outputs = json::object();
  for (const auto& name : run.outputs) outputs[name] = sha256((fs::path(run.common->out) / name).string());
  m["output_digests"] = outputs;
  write_json(fs::path(run.common->out) / (run.command + ".manifest.json"), m);
}

Config load(Run& run) {
  if (run.common->config.empty()) throw Failure(MSPS_ERR_CONFIG, "--config is required");
  msps_config* raw = nullptr;
  check(msps_config_load(run.common->config.c_str(), &raw), run.common->config);
  run.inputs.push_back(run.common->config);
  return Config(raw);
}

std::size_t scene_index(const msps_config* cfg, const std::string& which) {
  const std::size_t n = msps_config_scene_count(cfg);
  for (std::size_t i = 0; i < n; ++i) {
    if (which == msps_config_scene_label(cfg, i)) return i;
  }
  std::size_t idx = 0;
  const auto r = std::from_chars(which.data(), which.data() + which.size(), idx);
  if (r.ec != std::errc() || r.ptr != which.data() + which.size() || idx >= n) {
    throw Failure(MSPS_ERR_CONFIG, "--scene: no microscope '" + which + "'");
  }
  return idx;
}

std::size_t primary_scene(Run& run, msps_config* cfg) {
  const auto idx = scene_index(cfg, run.common->scene);
  if (run.common->voltage) check(msps_config_set_voltage(cfg, idx, *run.common->voltage), "--voltage");
  run.parameters["scene"] = idx;
  if (run.common->voltage) run.parameters["voltage"] = *run.common->voltage;
  return idx;
}

void require_two_scenes(const msps_config* cfg, const std::string& command) {
  if (msps_config_scene_count(cfg) < 2) {
    throw Failure(MSPS_ERR_CONFIG, command + ": config must declare a second labeled microscope");
  }
}

std::string tag_extension(const std::string& format) { return format == "csv" ? "csv" : "ptag"; }

json fit_json(const msps_peak_fit& f) {
  return {{"center", f.center}, {"fwhm", f.fwhm}, {"amplitude", f.amplitude}, {"offset", f.offset},
          {"residual_norm", f.residual_norm}};
}

// ---- subcommands ----

struct SimulateArgs {
  std::string duration = "10 ms";
  std::string split = "hbt";
  bool no_truth = false;
};

void cmd_simulate(Run& run, const SimulateArgs& a) {
  auto cfg = load(run);
  const auto scene = primary_scene(run, cfg.get());
  const double duration = quantity(a.duration, MSPS_DIM_TIME, "--duration");
  const auto format = run.common->format.empty() ? std::string("bin") : run.common->format;
  if (format == "json") throw Failure(MSPS_ERR_CONFIG, "--format: simulate writes csv or bin tags");
  run.parameters["duration"] = duration;
  run.parameters["split"] = a.split;
  run.parameters["format"] = format;

  msps_photons* photons = nullptr;
  check(msps_simulate(cfg.get(), scene, duration, msps_derive_seed(run.common->seed, 0), &photons), "simulate");
  Photons owned(photons);
  msps_tags* tags = nullptr;
  check(msps_detect(cfg.get(), photons, a.split == "single" ? MSPS_SPLIT_SINGLE : MSPS_SPLIT_HBT, duration,
                    msps_derive_seed(run.common->seed, 1), &tags),
        "detect");
  Tags owned_tags(tags);
  const auto path = run.out_path("tags." + tag_extension(format));
  check(msps_tags_write(tags, path.string().c_str(), format == "csv" ? MSPS_FORMAT_CSV : MSPS_FORMAT_PTAG),
        path.string());
  if (!a.no_truth) {
    const auto truth = run.out_path("truth.csv");
    check(msps_photons_write_truth(photons, truth.string().c_str()), truth.string());
  }
  std::printf("%zu photons emitted, %zu channels written to %s\n", msps_photons_count(photons),
              msps_tags_channel_count(tags), path.string().c_str());
}

struct CorrelateArgs {
  std::string input;
  std::string bin_width = "250 ps";
  std::string max_lag = "100 ns";
  std::string duration;
  int channel_a = 0;
  int channel_b = 1;
};

Tags read_input(Run& run, const std::string& input, const std::string& duration_text) {
  if (input.empty()) throw Failure(MSPS_ERR_CONFIG, "--input is required");
  const double duration = duration_text.empty() ? 0.0 : quantity(duration_text, MSPS_DIM_TIME, "--duration");
  msps_tags* tags = nullptr;
  check(msps_tags_read(input.c_str(), duration, &tags), input);
  run.inputs.push_back(input);
  return Tags(tags);
}

void cmd_correlate(Run& run, const CorrelateArgs& a) {
  auto tags = read_input(run, a.input, a.duration);
  const double bw = quantity(a.bin_width, MSPS_DIM_TIME, "--bin-width");
  const double max_lag = quantity(a.max_lag, MSPS_DIM_TIME, "--max-lag");
  run.parameters["bin_width"] = bw;
  run.parameters["max_lag"] = max_lag;
  run.parameters["channels"] = {a.channel_a, a.channel_b};

  msps_histogram* raw = nullptr;
  check(msps_correlate(tags.get(), a.channel_a, a.channel_b, bw, max_lag, &raw), "correlate");
  Histogram owned_raw(raw);
  msps_histogram* norm = nullptr;
  check(msps_histogram_normalize(raw, &norm), "normalize");
  Histogram owned_norm(norm);

  const double* counts = nullptr;
  const double* g2 = nullptr;
  std::size_t n = 0;
  check(msps_histogram_bins(raw, &counts, &n));
  check(msps_histogram_bins(norm, &g2, &n));
  msps_histogram_info info{};
  check(msps_histogram_info_get(raw, &info));
  std::string csv = "lag_s,counts,g2\n";
  const auto center = static_cast<long long>(n / 2);
  for (std::size_t i = 0; i < n; ++i) {
    const double lag = static_cast<double>(static_cast<long long>(i) - center) * info.bin_width;
    csv += num(lag) + "," + num(counts[i]) + "," + num(g2[i]) + "\n";
  }
  write_text(run.out_path("g2.csv"), csv);

  msps_antibunching fit{};
  check(msps_fit_antibunching(norm, &fit), "fit");
  json j;
  j["g2_zero"] = fit.g2_zero;
  j["decay_time_s"] = fit.decay_identified ? json(fit.decay_time) : json(nullptr);
  j["plateau"] = fit.plateau;
  j["residual_norm"] = fit.residual_norm;
  j["decay_identified"] = fit.decay_identified != 0;
  j["rate_a"] = info.rate_a;
  j["rate_b"] = info.rate_b;
  j["duration"] = info.duration;
  j["bin_width"] = info.bin_width;
  j["max_lag"] = info.max_lag;
  write_json(run.out_path("fit.json"), j);
  std::printf("g2(0) = %.4f, decay = %.4g s\n", fit.g2_zero, fit.decay_time);
}

struct PulsedArgs {
  std::string input;
  std::string period;
  std::string window = "100 ns";
  std::string bin_width = "1 ns";
  std::string max_lag;
  std::string duration;
  int channel_a = 0;
  int channel_b = 1;
};

void cmd_pulsed(Run& run, const PulsedArgs& a) {
  double period = 0.0;
  if (!a.period.empty()) {
    period = quantity(a.period, MSPS_DIM_TIME, "--period");
  } else if (!run.common->config.empty()) {
    auto cfg = load(run);
    check(msps_config_pulse_period(cfg.get(), &period), "period");
  } else {
    throw Failure(MSPS_ERR_CONFIG, "pulsed-g2 needs --period or --config");
  }
  auto tags = read_input(run, a.input, a.duration);
  const double window = quantity(a.window, MSPS_DIM_TIME, "--window");
  const double bw = quantity(a.bin_width, MSPS_DIM_TIME, "--bin-width");
  const double max_lag = a.max_lag.empty() ? 4.0 * period : quantity(a.max_lag, MSPS_DIM_TIME, "--max-lag");
  run.parameters["period"] = period;
  run.parameters["window"] = window;
  run.parameters["bin_width"] = bw;
  run.parameters["max_lag"] = max_lag;

  msps_histogram* raw = nullptr;
  check(msps_correlate(tags.get(), a.channel_a, a.channel_b, bw, max_lag, &raw), "correlate");
  Histogram owned(raw);
  msps_pulsed_ratio r{};
  check(msps_pulsed_peak_ratio(raw, period, window, &r), "pulsed-g2");
  json j;
  j["ratio"] = r.ratio;
  j["central_area"] = r.central_area;
  j["mean_side_area"] = r.mean_side_area;
  j["side_peaks"] = r.side_peaks;
  j["period"] = period;
  j["window"] = window;
  write_json(run.out_path("pulsed_g2.json"), j);
  std::printf("central / side = %.4f\n", r.ratio);
}

struct HomArgs {
  std::uint64_t pulses = 1000000;
  std::string sweep;
  bool simultaneous = false;
};

void cmd_hom(Run& run, const HomArgs& a) {
  auto cfg = load(run);
  require_two_scenes(cfg.get(), "hom");
  msps_hom_settings settings{a.pulses, run.common->seed, a.simultaneous ? 1 : 0};
  run.parameters["pulses"] = a.pulses;
  run.parameters["force_simultaneous"] = a.simultaneous;

  std::vector<double> voltages;
  if (!a.sweep.empty()) {
    voltages = parse_sweep(a.sweep);
    run.parameters["sweep"] = a.sweep;
  } else if (run.common->voltage) {
    voltages = {*run.common->voltage};
    run.parameters["voltage"] = *run.common->voltage;
  } else {
    throw Failure(MSPS_ERR_CONFIG, "hom needs --voltage or --sweep");
  }

  std::vector<msps_hom_result> results;
  for (double v : voltages) {
    msps_hom_result r{};
    check(msps_hom(cfg.get(), 0, 1, v, &settings, &r), "hom at " + num(v) + " V");
    results.push_back(r);
  }

  const bool as_json = run.common->format == "json" || (run.common->format.empty() && a.sweep.empty());
  if (as_json) {
    json rows = json::array();
    for (const auto& r : results) {
      rows.push_back({{"n_pulses", r.n_pulses}, {"both_emitted", r.both_emitted}, {"coincidences", r.coincidences},
                      {"p_estimate", r.p_estimate}, {"p_error", r.p_error}, {"voltage", r.voltage}});
    }
    write_json(run.out_path("hom.json"), rows.size() == 1 ? rows[0] : rows);
  } else {
    std::string csv = "voltage,p_estimate,p_error\n";
    for (const auto& r : results) csv += num(r.voltage) + "," + num(r.p_estimate) + "," + num(r.p_error) + "\n";
    write_text(run.out_path("hom.csv"), csv);
  }
  for (const auto& r : results) std::printf("%g V: P = %.5f +- %.5f\n", r.voltage, r.p_estimate, r.p_error);
}

struct SpectrumArgs {
  std::string kind = "excitation";
  std::optional<int> molecule;
};

void cmd_spectrum(Run& run, const SpectrumArgs& a) {
  auto cfg = load(run);
  const auto scene = primary_scene(run, cfg.get());
  run.parameters["kind"] = a.kind;
  msps_spectrum* s = nullptr;
  if (a.kind == "excitation") {
    check(msps_excitation_spectrum(cfg.get(), scene, &s), "excitation spectrum");
  } else {
    if (msps_config_molecule_count(cfg.get(), scene) == 0) {
      throw Failure(MSPS_ERR_PHYSICS, "spectrum: scene has no molecule");
    }
    const int id = a.molecule.value_or(msps_config_molecule_id(cfg.get(), scene, 0));
    run.parameters["molecule"] = id;
    check(msps_emission_spectrum(cfg.get(), scene, id, &s), "emission spectrum");
  }
  SpectrumPtr owned(s);
  const auto path = run.out_path(a.kind + ".csv");
  check(msps_spectrum_write_csv(s, path.string().c_str()), path.string());
  if (a.kind == "emission") {
    std::string csv = "wavelength_nm,weight,zero_phonon\n";
    for (std::size_t i = 0; i < msps_spectrum_line_count(s); ++i) {
      msps_line l{};
      check(msps_spectrum_line(s, i, &l));
      csv += num(l.wavelength_nm) + "," + num(l.weight) + "," + std::to_string(l.zero_phonon) + "\n";
    }
    write_text(run.out_path("emission_lines.csv"), csv);
  }
  std::printf("wrote %s\n", path.string().c_str());
}

void cmd_stark(Run& run, const std::string& sweep) {
  auto cfg = load(run);
  require_two_scenes(cfg.get(), "stark");
  std::vector<double> voltages;
  if (!sweep.empty()) {
    voltages = parse_sweep(sweep);
    run.parameters["sweep"] = sweep;
  } else if (run.common->voltage) {
    voltages = {*run.common->voltage};
    run.parameters["voltage"] = *run.common->voltage;
  } else {
    throw Failure(MSPS_ERR_CONFIG, "stark needs --voltage or --sweep");
  }
  msps_stark_map* map = nullptr;
  check(msps_stark_scan(cfg.get(), 0, 1, voltages.data(), voltages.size(), &map), "stark");
  StarkMap owned(map);
  const auto path = run.out_path("stark.csv");
  check(msps_stark_map_write_csv(map, path.string().c_str()), path.string());
  std::string csv = "voltage,separation_hz,fwhm_hz,maxima,indistinguishable\n";
  for (std::size_t i = 0; i < msps_stark_map_rows(map); ++i) {
    msps_stark_row r{};
    check(msps_stark_map_row(map, i, &r));
    csv += num(r.voltage) + "," + num(r.separation) + "," + num(r.fwhm) + "," + std::to_string(r.maxima) + "," +
           std::to_string(r.indistinguishable) + "\n";
  }
  write_text(run.out_path("stark_peaks.csv"), csv);
  std::printf("%zu rows written to %s\n", voltages.size(), path.string().c_str());
}

void cmd_scan(Run& run, bool noiseless) {
  auto cfg = load(run);
  const auto scene = primary_scene(run, cfg.get());
  run.parameters["noise"] = !noiseless;
  msps_image* img = nullptr;
  check(msps_confocal_scan(cfg.get(), scene, noiseless ? 0 : 1, run.common->seed, &img), "scan");
  Image owned(img);
  double scale = 1.0;
  const auto path = run.out_path("scan.pgm");
  check(msps_image_write_pgm(img, path.string().c_str(), &scale), path.string());
  msps_image_info info{};
  check(msps_image_info_get(img, &info));
  msps_peak_fit fit{};
  check(msps_image_fit_cross_section(img, &fit), "cross-section fit");
  json j;
  j["image"] = "scan.pgm";
  j["nx"] = info.nx;
  j["ny"] = info.ny;
  j["pixel_pitch_um"] = info.pixel_pitch_um;
  j["origin_x_um"] = info.origin_x_um;
  j["origin_y_um"] = info.origin_y_um;
  j["pgm_scale"] = scale;
  j["cross_section_fit_nm"] = fit_json(fit);
  write_json(run.out_path("scan.json"), j);
  std::printf("cross-section FWHM = %.1f nm\n", fit.fwhm);
}

void cmd_budget(Run& run) {
  auto cfg = load(run);
  const auto scene = primary_scene(run, cfg.get());
  std::size_t count = 0;
  check(msps_rate_budget(cfg.get(), scene, nullptr, 0, &count));
  std::vector<msps_budget_entry> entries(count);
  check(msps_rate_budget(cfg.get(), scene, entries.data(), entries.size(), &count));
  json mols = json::array();
  double total = 0.0;
  for (const auto& e : entries) {
    mols.push_back({{"id", e.molecule_id}, {"pump_rate", e.pump_rate},
                    {"excited_population", e.excited_population}, {"detected_rate", e.detected_rate}});
    total += e.detected_rate;
  }
  json j;
  j["molecules"] = mols;
  j["total_detected_rate"] = total;
  write_json(run.out_path("budget.json"), j);
  std::printf("detected 0-0 rate: %.4g /s\n", total);
}

int exit_code(msps_status s) {
  switch (s) {
    case MSPS_ERR_CONFIG: return 1;
    case MSPS_ERR_PHYSICS: return 2;
    case MSPS_ERR_IO: return 3;
    case MSPS_ERR_CONVERGENCE: return 4;
    case MSPS_ERR_INPUT: return 2;
    default: return 70;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation and analysis of molecular single-photon sources"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(msps_version()));

  Common common;
  auto add_common = [&](CLI::App* sub, bool config, bool seed) {
    if (config) sub->add_option("--config", common.config, "Scenario INI file");
    if (seed) sub->add_option("--seed", common.seed, "Master RNG seed")->capture_default_str();
    sub->add_option("--out", common.out, "Output directory")->capture_default_str();
    sub->add_option("--format", common.format, "Output format")->check(CLI::IsMember({"csv", "bin", "json"}));
  };
  auto add_scene = [&](CLI::App* sub) {
    sub->add_option("--scene", common.scene, "Microscope label or index")->capture_default_str();
    sub->add_option("--voltage", common.voltage, "Electrode voltage (V)");
  };

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Emit photons and record detector time tags");
  add_common(simulate, true, true);
  add_scene(simulate);
  simulate->add_option("--duration", sim.duration, "Acquisition time, e.g. '10 ms'")->capture_default_str();
  simulate->add_option("--split", sim.split, "Detector routing")
      ->check(CLI::IsMember({"single", "hbt"}))
      ->capture_default_str();
  simulate->add_flag("--no-truth", sim.no_truth, "Skip the emitted-photon dump");

  CorrelateArgs cor;
  auto* correlate = app.add_subcommand("correlate", "g2 histogram and antibunching fit");
  add_common(correlate, false, true);
  correlate->add_option("--input", cor.input, "Time-tag file (PTAG or CSV)")->required();
  correlate->add_option("--bin-width", cor.bin_width)->capture_default_str();
  correlate->add_option("--max-lag", cor.max_lag)->capture_default_str();
  correlate->add_option("--duration", cor.duration, "Acquisition time for CSV input");
  correlate->add_option("--channel-a", cor.channel_a)->capture_default_str();
  correlate->add_option("--channel-b", cor.channel_b)->capture_default_str();

  PulsedArgs pul;
  auto* pulsed = app.add_subcommand("pulsed-g2", "Central to side peak area ratio");
  add_common(pulsed, true, true);
  pulsed->add_option("--input", pul.input, "Time-tag file (PTAG or CSV)")->required();
  pulsed->add_option("--period", pul.period, "Pulse period (default: from --config)");
  pulsed->add_option("--window", pul.window, "Integration window per peak")->capture_default_str();
  pulsed->add_option("--bin-width", pul.bin_width)->capture_default_str();
  pulsed->add_option("--max-lag", pul.max_lag, "Default 4 periods");
  pulsed->add_option("--duration", pul.duration, "Acquisition time for CSV input");
  pulsed->add_option("--channel-a", pul.channel_a)->capture_default_str();
  pulsed->add_option("--channel-b", pul.channel_b)->capture_default_str();

  HomArgs hom_args;
  auto* hom = app.add_subcommand("hom", "Two-photon interference between two microscopes");
  add_common(hom, true, true);
  hom->add_option("--voltage", common.voltage, "Voltage on the second microscope (V)");
  hom->add_option("--sweep", hom_args.sweep, "Voltage sweep start:stop:step");
  hom->add_option("--pulses", hom_args.pulses)->capture_default_str();
  hom->add_flag("--simultaneous", hom_args.simultaneous, "Start both wavepackets at the pulse edge");

  SpectrumArgs spec_args;
  auto* spectrum = app.add_subcommand("spectrum", "Excitation or emission spectrum");
  add_common(spectrum, true, false);
  add_scene(spectrum);
  spectrum->add_option("--kind", spec_args.kind)
      ->check(CLI::IsMember({"excitation", "emission"}))
      ->capture_default_str();
  spectrum->add_option("--molecule", spec_args.molecule, "Molecule id for emission spectra");

  std::string stark_sweep;
  auto* stark = app.add_subcommand("stark", "Excitation spectra versus electrode voltage");
  add_common(stark, true, false);
  stark->add_option("--voltage", common.voltage, "Single voltage on the second microscope (V)");
  stark->add_option("--sweep", stark_sweep, "Voltage sweep start:stop:step");

  bool noiseless = false;
  auto* scan = app.add_subcommand("scan", "Confocal image and cross-section fit");
  add_common(scan, true, true);
  add_scene(scan);
  scan->add_flag("--noiseless", noiseless, "Write the expectation image without shot noise");

  auto* budget = app.add_subcommand("budget", "Detected photon rate per molecule");
  add_common(budget, true, false);
  add_scene(budget);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  Run run;
  run.common = &common;
  try {
    fs::create_directories(common.out);
    if (*simulate) {
      run.command = "simulate";
      cmd_simulate(run, sim);
    } else if (*correlate) {
      run.command = "correlate";
      cmd_correlate(run, cor);
    } else if (*pulsed) {
      run.command = "pulsed-g2";
      cmd_pulsed(run, pul);
    } else if (*hom) {
      run.command = "hom";
      cmd_hom(run, hom_args);
    } else if (*spectrum) {
      run.command = "spectrum";
      cmd_spectrum(run, spec_args);
    } else if (*stark) {
      run.command = "stark";
      cmd_stark(run, stark_sweep);
    } else if (*scan) {
      run.command = "scan";
      cmd_scan(run, noiseless);
    } else if (*budget) {
      run.command = "budget";
      cmd_budget(run);
    }
    write_manifest(run);
  } catch (const Failure& f) {
    std::fprintf(stderr, "error: %s\n", f.what());
    return exit_code(f.status);
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 70;
  }
  return 0;
}
