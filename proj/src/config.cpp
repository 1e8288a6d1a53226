#include "molsps/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <utility>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "molsps/errors.hpp"

namespace molsps {

namespace {

enum class Unit {
  time,
  frequency,
  rate,
  length,
  voltage,
  dimensionless,
  stark_linear,
  stark_quadratic,
  angle,
  micrometers,
  nanometers,
  wavenumber,
};

using SuffixTable = std::vector<std::pair<std::string_view, double>>;

const SuffixTable& suffixes(Unit unit) {
  static const SuffixTable time{{"", 1.0}, {"s", 1.0}, {"ms", 1e-3}, {"us", 1e-6}, {"ns", 1e-9},
                                {"ps", 1e-12}, {"fs", 1e-15}};
  static const SuffixTable frequency{{"", 1.0}, {"Hz", 1.0}, {"kHz", 1e3}, {"MHz", 1e6},
                                     {"GHz", 1e9}, {"THz", 1e12}};
  static const SuffixTable rate{{"", 1.0},   {"/s", 1.0},    {"/ms", 1e3},   {"/us", 1e6},
                                {"/ns", 1e9}, {"/ps", 1e12}, {"Hz", 1.0},    {"kHz", 1e3},
                                {"MHz", 1e6}, {"GHz", 1e9},  {"THz", 1e12}};
  static const SuffixTable length{{"", 1.0}, {"m", 1.0}, {"mm", 1e-3}, {"um", 1e-6}, {"nm", 1e-9}};
  static const SuffixTable voltage{{"", 1.0}, {"V", 1.0}, {"mV", 1e-3}, {"kV", 1e3}};
  static const SuffixTable dimensionless{{"", 1.0}, {"%", 1e-2}};
  static const SuffixTable stark_linear{
      {"", 1.0}, {"Hz/(V/m)", 1.0}, {"kHz/(V/m)", 1e3}, {"MHz/(V/m)", 1e6}};
  static const SuffixTable stark_quadratic{
      {"", 1.0}, {"Hz/(V/m)^2", 1.0}, {"kHz/(V/m)^2", 1e3}, {"MHz/(V/m)^2", 1e6}};
  static const SuffixTable angle{{"", 1.0}, {"rad", 1.0}, {"deg", kPi / 180.0}};
  static const SuffixTable micrometers{{"", 1.0}, {"um", 1.0}, {"nm", 1e-3}, {"mm", 1e3}};
  static const SuffixTable nanometers{{"", 1.0}, {"nm", 1.0}, {"um", 1e3}};
  static const SuffixTable wavenumber{{"", 1.0}, {"cm^-1", 1.0}, {"/cm", 1.0}};
  switch (unit) {
    case Unit::time: return time;
    case Unit::frequency: return frequency;
    case Unit::rate: return rate;
    case Unit::length: return length;
    case Unit::voltage: return voltage;
    case Unit::dimensionless: return dimensionless;
    case Unit::stark_linear: return stark_linear;
    case Unit::stark_quadratic: return stark_quadratic;
    case Unit::angle: return angle;
    case Unit::micrometers: return micrometers;
    case Unit::nanometers: return nanometers;
    case Unit::wavenumber: return wavenumber;
  }
  return dimensionless;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double parse_unit_value(std::string_view text, Unit unit, std::string_view key) {
  text = trim(text);
  double value = 0.0;
  const auto* begin = text.data();
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr == begin) {
    throw ConfigError(std::string(key), "key '" + std::string(key) + "': cannot read a number from '" +
                                            std::string(text) + "'");
  }
  const auto suffix = trim(std::string_view(ptr, static_cast<std::size_t>(end - ptr)));
  for (const auto& [name, scale] : suffixes(unit)) {
    if (suffix == name) return value * scale;
  }
  throw ConfigError(std::string(key), "key '" + std::string(key) + "': unknown unit '" +
                                          std::string(suffix) + "'");
}

std::vector<std::string_view> split_list(std::string_view text) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto stop = comma == std::string_view::npos ? text.size() : comma;
    parts.push_back(trim(text.substr(start, stop - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return parts;
}

std::vector<double> parse_list(std::string_view text, Unit unit, std::string_view key) {
  std::vector<double> values;
  for (auto part : split_list(text)) values.push_back(parse_unit_value(part, unit, key));
  return values;
}

long long parse_integer(std::string_view text, std::string_view key, std::string_view suffix = {}) {
  text = trim(text);
  long long value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  const auto rest = trim(std::string_view(ptr, static_cast<std::size_t>(text.data() + text.size() - ptr)));
  if (ec != std::errc() || ptr == text.data() || !(rest.empty() || rest == suffix)) {
    throw ConfigError(std::string(key), "key '" + std::string(key) + "': expected an integer, got '" +
                                            std::string(text) + "'");
  }
  return value;
}

using Setter = std::function<void(std::string_view value, const std::string& key)>;
using FieldTable = std::map<std::string, Setter, std::less<>>;

Setter number(double& field, Unit unit) {
  return [&field, unit](std::string_view v, const std::string& k) { field = parse_unit_value(v, unit, k); };
}

FieldTable molecule_fields(MoleculeSpec& m) {
  return {
      {"id",
       [&m](std::string_view v, const std::string& k) {
         if (parse_integer(v, k) != m.id) {
           throw ConfigError(k, "key '" + k + "': id does not match the section name");
         }
       }},
      {"position",
       [&m](std::string_view v, const std::string& k) {
         auto xy = parse_list(v, Unit::micrometers, k);
         if (xy.size() != 2) throw ConfigError(k, "key '" + k + "': expected 'x, y'");
         m.position = {xy[0], xy[1]};
       }},
      {"zpl_center", number(m.zpl_center, Unit::frequency)},
      {"lifetime_t1", number(m.lifetime_t1, Unit::time)},
      {"zpl_branching", number(m.zpl_branching, Unit::dimensionless)},
      {"vibronic_offset", number(m.vibronic_offset, Unit::frequency)},
      {"vibronic_fwhm", number(m.vibronic_fwhm, Unit::frequency)},
      {"stark_linear", number(m.stark_linear, Unit::stark_linear)},
      {"stark_quadratic", number(m.stark_quadratic, Unit::stark_quadratic)},
      {"polarization_angle", number(m.polarization_angle, Unit::angle)},
  };
}

FieldTable scene_fields(SceneSpec& s) {
  return {
      {"background_rate", number(s.background_rate, Unit::rate)},
      {"reference_wavelength", number(s.reference_wavelength_nm, Unit::nanometers)},
      {"k_vib", number(s.k_vib, Unit::rate)},
  };
}

FieldTable electrode_fields(ElectrodeSpec& e) {
  return {
      {"gap", number(e.gap, Unit::length)},
      {"voltage", number(e.voltage, Unit::voltage)},
      {"max_voltage", number(e.max_voltage, Unit::voltage)},
  };
}

FieldTable laser_fields(LaserSpec& l) {
  return {
      {"mode",
       [&l](std::string_view v, const std::string& k) {
         v = trim(v);
         if (v == "cw") {
           l.mode = LaserMode::cw;
         } else if (v == "pulsed") {
           l.mode = LaserMode::pulsed;
         } else {
           throw ConfigError(k, "key '" + k + "': expected 'cw' or 'pulsed'");
         }
       }},
      {"frequency", number(l.frequency, Unit::frequency)},
      {"cw_peak_pump_rate", number(l.cw_peak_pump_rate, Unit::rate)},
      {"laser_linewidth", number(l.laser_linewidth, Unit::frequency)},
      {"pulse_width", number(l.pulse_width, Unit::time)},
      {"pulse_rep_rate", number(l.pulse_rep_rate, Unit::frequency)},
      {"pulse_divider",
       [&l](std::string_view v, const std::string& k) {
         const auto n = parse_integer(v, k);
         if (n < 1) throw ConfigError(k, "key '" + k + "': must be a positive integer");
         l.pulse_divider = static_cast<std::uint32_t>(n);
       }},
      {"pulse_peak_pump_rate", number(l.pulse_peak_pump_rate, Unit::rate)},
  };
}

FieldTable detection_fields(DetectionSpec& d) {
  return {
      {"collection_efficiency", number(d.collection_efficiency, Unit::dimensionless)},
      {"zpl_filter_transmission", number(d.zpl_filter_transmission, Unit::dimensionless)},
      {"vibronic_filter_transmission", number(d.vibronic_filter_transmission, Unit::dimensionless)},
      {"fiber_coupling", number(d.fiber_coupling, Unit::dimensionless)},
      {"dark_count_rate", number(d.dark_count_rate, Unit::rate)},
      {"timing_jitter_sigma", number(d.timing_jitter_sigma, Unit::time)},
      {"dead_time", number(d.dead_time, Unit::time)},
      {"resolution",
       [&d](std::string_view v, const std::string& k) {
         const auto n = parse_integer(v, k, "ps");
         if (n < 1) throw ConfigError(k, "key '" + k + "': must be >= 1 ps");
         d.resolution_ps = static_cast<std::uint64_t>(n);
       }},
  };
}

FieldTable spectroscopy_fields(SpectroscopySettings& s) {
  return {
      {"scan_start", number(s.scan_start, Unit::frequency)},
      {"scan_stop", number(s.scan_stop, Unit::frequency)},
      {"scan_step", number(s.scan_step, Unit::frequency)},
      {"saturation", number(s.saturation, Unit::dimensionless)},
      {"spectrometer_resolution", number(s.spectrometer_resolution_nm, Unit::nanometers)},
      {"spectrum_start", number(s.spectrum_start_nm, Unit::nanometers)},
      {"spectrum_stop", number(s.spectrum_stop_nm, Unit::nanometers)},
      {"spectrum_step", number(s.spectrum_step_nm, Unit::nanometers)},
  };
}

FieldTable scan_fields(ScanSettings& s) {
  auto integer = [](int& field) {
    return [&field](std::string_view v, const std::string& k) {
      const auto n = parse_integer(v, k);
      if (n < 1) throw ConfigError(k, "key '" + k + "': must be a positive integer");
      field = static_cast<int>(n);
    };
  };
  return {
      {"psf_fwhm", number(s.psf_fwhm_nm, Unit::nanometers)},
      {"nx", integer(s.nx)},
      {"ny", integer(s.ny)},
      {"pixel_pitch", number(s.pixel_pitch_um, Unit::micrometers)},
      {"origin",
       [&s](std::string_view v, const std::string& k) {
         auto xy = parse_list(v, Unit::micrometers, k);
         if (xy.size() != 2) throw ConfigError(k, "key '" + k + "': expected 'x, y'");
         s.origin_x_um = xy[0];
         s.origin_y_um = xy[1];
       }},
      {"brightness", number(s.brightness, Unit::dimensionless)},
      {"background", number(s.background, Unit::dimensionless)},
  };
}

void apply_fields(const boost::property_tree::ptree& section, const std::string& section_name,
                  const FieldTable& table) {
  for (const auto& [key, node] : section) {
    const std::string qualified = section_name + "." + key;
    auto it = table.find(key);
    if (it == table.end()) {
      throw ConfigError(qualified, "unknown key '" + key + "' in section [" + section_name + "]");
    }
    it->second(node.data(), qualified);
  }
}

bool is_integer_text(std::string_view s) {
  if (s.empty()) return false;
  if (s.front() == '-') s.remove_prefix(1);
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

Microscope& microscope_for(Config& cfg, const std::string& label) {
  for (auto& m : cfg.microscopes) {
    if (m.label == label) return m;
  }
  cfg.microscopes.push_back(Microscope{label, SceneSpec{}});
  return cfg.microscopes.back();
}

std::vector<std::string> section_headers(std::string_view text) {
  std::vector<std::string> names;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    const auto last = line.find_last_not_of(" \t\r");
    if (first == std::string::npos || line[first] != '[' || line[last] != ']') continue;
    std::string name = line.substr(first + 1, last - first - 1);
    const auto a = name.find_first_not_of(" \t");
    const auto b = name.find_last_not_of(" \t");
    names.push_back(a == std::string::npos ? std::string() : name.substr(a, b - a + 1));
  }
  return names;
}

}  // namespace

const SceneSpec& Config::scene(std::size_t index) const {
  if (index >= microscopes.size()) {
    throw InputError("configuration defines no scene with index " + std::to_string(index));
  }
  return microscopes[index].scene;
}

SceneSpec& Config::scene(std::size_t index) {
  return const_cast<SceneSpec&>(std::as_const(*this).scene(index));
}

void Config::validate() const {
  for (const auto& m : microscopes) m.scene.validate();
  laser.validate();
  detection.validate();
  if (spectroscopy.scan_step <= 0.0 || spectroscopy.scan_stop <= spectroscopy.scan_start) {
    throw PhysicsError("spectroscopy: scan range must be increasing with a positive step");
  }
  if (spectroscopy.saturation < 0.0) throw PhysicsError("spectroscopy: saturation must be >= 0");
  if (scan.psf_fwhm_nm <= 0.0 || scan.pixel_pitch_um <= 0.0) {
    throw PhysicsError("scan: psf_fwhm and pixel_pitch must be > 0");
  }
}

double parse_quantity(std::string_view text, Dimension dim, std::string_view key) {
  switch (dim) {
    case Dimension::time: return parse_unit_value(text, Unit::time, key);
    case Dimension::frequency: return parse_unit_value(text, Unit::frequency, key);
    case Dimension::rate: return parse_unit_value(text, Unit::rate, key);
    case Dimension::length: return parse_unit_value(text, Unit::length, key);
    case Dimension::voltage: return parse_unit_value(text, Unit::voltage, key);
    case Dimension::dimensionless: return parse_unit_value(text, Unit::dimensionless, key);
  }
  return 0.0;
}

Config parse_config(std::string_view text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream in{std::string(text)};
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("line " + std::to_string(e.line()), "config line " + std::to_string(e.line()) +
                                                              ": " + e.message());
  }

  Config cfg;
  cfg.source_text = std::string(text);
  cfg.microscopes.push_back(Microscope{});
  std::vector<EmissionLine> emission_lines;
  bool has_emission = false;

  for (const auto& [name, node] : tree) {
    if (!node.data().empty() && node.empty()) {
      throw ConfigError(name, "key '" + name + "' appears outside any section");
    }
  }

  // The INI reader drops sections without keys; walk the headers instead.
  const pt::ptree no_keys;
  for (const auto& name : section_headers(text)) {
    const auto found = tree.find(name);
    const pt::ptree& section = found == tree.not_found() ? no_keys : found->second;
    const auto dot = name.find('.');
    const std::string kind = name.substr(0, dot);
    const std::string rest = dot == std::string::npos ? std::string() : name.substr(dot + 1);

    if (kind == "scene" || kind == "electrode") {
      auto& scope = microscope_for(cfg, rest);
      if (kind == "scene") {
        apply_fields(section, name, scene_fields(scope.scene));
      } else {
        apply_fields(section, name, electrode_fields(scope.scene.electrode));
      }
    } else if (kind == "molecule") {
      std::string label;
      std::string id_text = rest;
      if (const auto sep = rest.rfind('.'); sep != std::string::npos) {
        label = rest.substr(0, sep);
        id_text = rest.substr(sep + 1);
      }
      if (!is_integer_text(id_text)) {
        throw ConfigError(name, "section [" + name + "]: molecule id must be an integer");
      }
      auto& scope = microscope_for(cfg, label);
      MoleculeSpec mol;
      mol.id = std::stoi(id_text);
      apply_fields(section, name, molecule_fields(mol));
      for (const auto& other : scope.scene.molecules) {
        if (other.id == mol.id) throw ConfigError(name, "section [" + name + "]: duplicate molecule id");
      }
      scope.scene.molecules.push_back(mol);
    } else if (name == "laser") {
      apply_fields(section, name, laser_fields(cfg.laser));
    } else if (name == "detection") {
      apply_fields(section, name, detection_fields(cfg.detection));
    } else if (name == "spectroscopy") {
      apply_fields(section, name, spectroscopy_fields(cfg.spectroscopy));
    } else if (name == "scan") {
      apply_fields(section, name, scan_fields(cfg.scan));
    } else if (name == "emission") {
      std::vector<double> shifts;
      std::vector<double> weights;
      FieldTable table{
          {"shifts", [&](std::string_view v, const std::string& k) { shifts = parse_list(v, Unit::wavenumber, k); }},
          {"weights", [&](std::string_view v, const std::string& k) { weights = parse_list(v, Unit::dimensionless, k); }},
      };
      apply_fields(section, name, table);
      if (shifts.size() != weights.size()) {
        throw ConfigError("emission.weights", "section [emission]: shifts and weights differ in length");
      }
      for (std::size_t i = 0; i < shifts.size(); ++i) emission_lines.push_back({shifts[i], weights[i]});
      has_emission = true;
    } else {
      throw ConfigError(name, "unknown section [" + name + "]");
    }
  }

  for (auto& m : cfg.microscopes) {
    if (has_emission) m.scene.emission_lines = emission_lines;
    std::sort(m.scene.molecules.begin(), m.scene.molecules.end(),
              [](const MoleculeSpec& a, const MoleculeSpec& b) { return a.id < b.id; });
  }
  cfg.validate();
  return cfg;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw IoError("cannot read config '" + path.string() + "'");
  return parse_config(buffer.str());
}

}  // namespace molsps
