#include <doctest.h>

#include <string>

#include "molsps/config.hpp"
#include "molsps/errors.hpp"

using namespace molsps;

namespace {

std::string config_key(const char* text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "<none>";
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("full scenario with units") {
    const auto cfg = parse_config(R"(
[scene]
background_rate = 2 kHz
reference_wavelength = 590 nm
k_vib = 0.5 /ps

[electrode]
gap = 18 um
voltage = 42 V
max_voltage = 90 V

[molecule.7]
position = 1.5, -2
zpl_center = 180 MHz
lifetime_t1 = 9.4 ns
zpl_branching = 30 %
vibronic_offset = 7.2 THz
vibronic_fwhm = 30 GHz
stark_linear = 77.14 Hz/(V/m)
polarization_angle = 90 deg

[molecule.3]
zpl_center = -1 GHz

[laser]
mode = pulsed
frequency = 7.2 THz
pulse_width = 700 ps
pulse_rep_rate = 76 MHz
pulse_divider = 20
pulse_peak_pump_rate = 1 /ns
laser_linewidth = 1 MHz

[detection]
collection_efficiency = 0.2
fiber_coupling = 30 %
dark_count_rate = 100 /s
timing_jitter_sigma = 40 ps
dead_time = 50 ns
resolution = 4 ps
)");
    REQUIRE(cfg.microscopes.size() == 1);
    const auto& s = cfg.scene();
    CHECK(s.background_rate == 2000.0);
    CHECK(s.k_vib == doctest::Approx(5e11));
    CHECK(s.electrode.gap == doctest::Approx(18e-6));
    CHECK(s.electrode.voltage == 42.0);
    REQUIRE(s.molecules.size() == 2);
    CHECK(s.molecules[0].id == 3);  // sorted by id
    const auto& m = s.molecule(7);
    CHECK(m.position.x_um == 1.5);
    CHECK(m.position.y_um == -2.0);
    CHECK(m.zpl_center == 180e6);
    CHECK(m.lifetime_t1 == doctest::Approx(9.4e-9));
    CHECK(m.zpl_branching == doctest::Approx(0.3));
    CHECK(m.stark_linear == doctest::Approx(77.14));
    CHECK(m.polarization_angle == doctest::Approx(kPi / 2));
    CHECK(cfg.laser.mode == LaserMode::pulsed);
    CHECK(cfg.laser.pulse_width == doctest::Approx(700e-12));
    CHECK(cfg.laser.pulse_divider == 20u);
    CHECK(cfg.laser.pulse_peak_pump_rate == doctest::Approx(1e9));
    CHECK(cfg.detection.fiber_coupling == doctest::Approx(0.3));
    CHECK(cfg.detection.timing_jitter_sigma == doctest::Approx(40e-12));
    CHECK(cfg.detection.resolution_ps == 4u);
  }

  TEST_CASE("defaults") {
    const auto cfg = parse_config("[molecule.1]\n");
    const auto& m = cfg.scene().molecules.at(0);
    CHECK(m.lifetime_t1 == 9.4e-9);
    CHECK(m.zpl_branching == 0.3);
    CHECK(m.vibronic_fwhm == 30e9);
    CHECK(cfg.scene().reference_wavelength_nm == 590.0);
    CHECK(cfg.scene().electrode.gap == 18e-6);
    CHECK(cfg.scene().electrode.max_voltage == 90.0);
    CHECK(cfg.detection.dead_time == 50e-9);
    CHECK(cfg.laser.pulse_rep_rate == 76e6);
  }

  TEST_CASE("labeled second microscope") {
    const auto cfg = parse_config(R"(
[molecule.1]
zpl_center = 0 Hz
[scene.b]
background_rate = 5 /s
[electrode.b]
voltage = 12 V
[molecule.b.1]
zpl_center = 180 MHz
[molecule.b.2]
)");
    REQUIRE(cfg.microscopes.size() == 2);
    CHECK(cfg.microscopes[0].label.empty());
    CHECK(cfg.microscopes[1].label == "b");
    CHECK(cfg.scene(1).molecules.size() == 2);
    CHECK(cfg.scene(1).molecule(1).zpl_center == 180e6);
    CHECK(cfg.scene(1).electrode.voltage == 12.0);
    CHECK(cfg.scene(0).electrode.voltage == 0.0);
    CHECK(cfg.scene(1).background_rate == 5.0);
  }

  TEST_CASE("emission lines and analysis sections") {
    const auto cfg = parse_config(R"(
[molecule.1]
[emission]
shifts = 300 cm^-1, 900 cm^-1
weights = 1, 3
[spectroscopy]
scan_start = -50 MHz
scan_stop = 50 MHz
scan_step = 0.25 MHz
saturation = 3
spectrometer_resolution = 0.1 nm
[scan]
psf_fwhm = 330 nm
nx = 11
ny = 13
pixel_pitch = 50 nm
origin = -0.25, 0.5
)");
    REQUIRE(cfg.scene().emission_lines.size() == 2);
    CHECK(cfg.scene().emission_lines[1].shift_cm == 900.0);
    CHECK(cfg.scene().emission_lines[1].weight == 3.0);
    CHECK(cfg.spectroscopy.scan_step == 0.25e6);
    CHECK(cfg.spectroscopy.saturation == 3.0);
    CHECK(cfg.spectroscopy.spectrometer_resolution_nm == doctest::Approx(0.1));
    CHECK(cfg.scan.nx == 11);
    CHECK(cfg.scan.ny == 13);
    CHECK(cfg.scan.pixel_pitch_um == doctest::Approx(0.05));
    CHECK(cfg.scan.origin_x_um == -0.25);
  }

  TEST_CASE("errors name the key") {
    CHECK(config_key("[molecule.1]\nlifetime = 9 ns\n") == "molecule.1.lifetime");
    CHECK(config_key("[laser]\nmode = cw\nbogus = 1\n") == "laser.bogus");
    CHECK(config_key("[molecule.1]\nlifetime_t1 = 9.4 NS\n") == "molecule.1.lifetime_t1");
    CHECK(config_key("[molecule.1]\nzpl_center = 180 mhz\n") == "molecule.1.zpl_center");
    CHECK(config_key("[detection]\ncollection_efficiency = lots\n") == "detection.collection_efficiency");
    CHECK(config_key("[electrode]\ngap = 18 um\n[widget]\n") == "widget");
    CHECK(config_key("[molecule.x]\n") == "molecule.x");
    CHECK(config_key("[laser]\nmode = flash\n") == "laser.mode");
    CHECK(config_key("[emission]\nshifts = 1, 2\nweights = 1\n") == "emission.weights");
    CHECK(config_key("[scene\nbackground_rate = 1\n").rfind("line", 0) == 0);
  }

  TEST_CASE("physics violations are not config errors") {
    CHECK_THROWS_AS(parse_config("[molecule.1]\nlifetime_t1 = -1 ns\n"), PhysicsError);
    CHECK_THROWS_AS(parse_config("[electrode]\nvoltage = 120 V\n[molecule.1]\n"), PhysicsError);
    CHECK_THROWS_AS(parse_config("[laser]\nmode = pulsed\npulse_width = 1 us\n"), PhysicsError);
    CHECK_THROWS_AS(parse_config("[detection]\nfiber_coupling = 150 %\n"), PhysicsError);
  }

  TEST_CASE("missing file is an io error") {
    CHECK_THROWS_AS(load_config("/nonexistent/dir/none.ini"), IoError);
  }

  TEST_CASE("quantities") {
    CHECK(parse_quantity("250 ps", Dimension::time, "x") == doctest::Approx(250e-12));
    CHECK(parse_quantity("250ps", Dimension::time, "x") == doctest::Approx(250e-12));
    CHECK(parse_quantity("1e-9", Dimension::time, "x") == 1e-9);
    CHECK(parse_quantity("10 ms", Dimension::time, "x") == doctest::Approx(0.01));
    CHECK(parse_quantity("42V", Dimension::voltage, "x") == 42.0);
    CHECK(parse_quantity("3 GHz", Dimension::frequency, "x") == 3e9);
    CHECK(parse_quantity("1 /ns", Dimension::rate, "x") == 1e9);
    CHECK_THROWS_AS(parse_quantity("1 Ms", Dimension::time, "x"), ConfigError);
    CHECK_THROWS_AS(parse_quantity("", Dimension::time, "x"), ConfigError);
  }
}
