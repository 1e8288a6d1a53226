#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "molsps/errors.hpp"
#include "molsps/kmc.hpp"

using namespace molsps;

namespace {

constexpr double kT1 = 9.4e-9;
const double kGamma = 1.0 / kT1;

SceneSpec one_molecule(double zpl = 0.0) {
  SceneSpec scene;
  MoleculeSpec m;
  m.id = 1;
  m.zpl_center = zpl;
  scene.molecules.push_back(m);
  return scene;
}

LaserSpec cw(double pump) {
  LaserSpec laser;
  laser.cw_peak_pump_rate = pump;
  return laser;
}

LaserSpec pulsed(double pump) {
  LaserSpec laser;
  laser.mode = LaserMode::pulsed;
  laser.pulse_peak_pump_rate = pump;
  return laser;
}

DetectionSpec ideal_detection() {
  DetectionSpec d;
  d.collection_efficiency = 1.0;
  d.zpl_filter_transmission = 1.0;
  d.vibronic_filter_transmission = 1.0;
  d.fiber_coupling = 1.0;
  d.dead_time = 0.0;
  return d;
}

bool within_sigma(double observed, double n, double p, double k = 3.0) {
  return std::abs(observed - n * p) <= k * std::sqrt(n * p * (1.0 - p));
}

// P(at least two pump events in one window) with instant vibrational
// relaxation: a first pump at t1, a decay after u, then a second pump in
// the remaining w - t1 - u.
double two_pump_probability(double pump, double gamma, double width) {
  const int n = 400;
  const double h = width / n;
  auto simpson_weight = [n](int i) { return i == 0 || i == n ? 1.0 : (i % 2 ? 4.0 : 2.0); };
  double outer = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double t1 = i * h;
    const double rest = width - t1;
    double inner = 0.0;
    const double hu = rest / n;
    for (int j = 0; j <= n && rest > 0.0; ++j) {
      const double u = j * hu;
      inner += simpson_weight(j) * gamma * std::exp(-gamma * u) * (1.0 - std::exp(-pump * (rest - u)));
    }
    inner *= hu / 3.0;
    outer += simpson_weight(i) * pump * std::exp(-pump * t1) * inner;
  }
  return outer * h / 3.0;
}

std::map<long long, int> emissions_per_pulse(const std::vector<PhotonRecord>& photons, double period) {
  std::map<long long, int> counts;
  for (const auto& p : photons) ++counts[static_cast<long long>(std::floor(p.excite_time / period))];
  return counts;
}

}  // namespace

TEST_SUITE("kmc") {
  TEST_CASE("empty streams") {
    SceneSpec empty;
    CHECK(simulate_stream(empty, cw(1e7), 1e-3, 1).empty());
    CHECK(simulate_stream(one_molecule(), cw(0.0), 1e-3, 1).empty());
    CHECK_THROWS_AS(simulate_stream(one_molecule(), cw(1e7), 0.0, 1), PhysicsError);
    CHECK_THROWS_AS(simulate_stream(one_molecule(), cw(1e7), -1.0, 1), PhysicsError);
  }

  TEST_CASE("background-only scene") {
    SceneSpec scene;
    scene.background_rate = 1e5;
    const auto photons = simulate_stream(scene, cw(1e7), 0.1, 7);
    CHECK(std::abs(static_cast<double>(photons.size()) - 1e4) < 3.0 * std::sqrt(1e4));
    for (const auto& p : photons) {
      CHECK(p.source_id == kBackgroundSource);
      CHECK(p.branch == Branch::vibronic);
    }
  }

  TEST_CASE("determinism") {
    auto scene = one_molecule();
    scene.background_rate = 1e4;
    const auto a = simulate_stream(scene, cw(2e7), 2e-3, 42);
    const auto b = simulate_stream(scene, cw(2e7), 2e-3, 42);
    const auto c = simulate_stream(scene, cw(2e7), 2e-3, 43);
    REQUIRE(a.size() == b.size());
    REQUIRE(!a.empty());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].emit_time == b[i].emit_time);
      CHECK(a[i].excite_time == b[i].excite_time);
      CHECK(a[i].frequency == b[i].frequency);
      CHECK(a[i].source_id == b[i].source_id);
      CHECK(a[i].branch == b[i].branch);
    }
    CHECK((c.size() != a.size() || c.front().emit_time != a.front().emit_time));

    const auto det = DetectionSpec{};
    const auto ta = apply_detection(a, det, Split::hbt, 2e-3, 9);
    const auto tb = apply_detection(b, det, Split::hbt, 2e-3, 9);
    CHECK(ta.channels == tb.channels);
  }

  TEST_CASE("records are time ordered") {
    auto scene = one_molecule();
    MoleculeSpec second;
    second.id = 2;
    second.zpl_center = 50e6;
    scene.molecules.push_back(second);
    scene.background_rate = 1e5;
    const auto photons = simulate_stream(scene, cw(3e7), 5e-3, 3);
    REQUIRE(photons.size() > 1000);
    for (std::size_t i = 1; i < photons.size(); ++i) CHECK(photons[i - 1].emit_time <= photons[i].emit_time);
  }

  TEST_CASE("cw zero-phonon rate matches the steady state") {
    const double pump = 1.0 / 8.1e-9 - kGamma;
    const double duration = 0.2;
    const auto photons = simulate_stream(one_molecule(), cw(pump), duration, 2024);
    const auto zpl = std::count_if(photons.begin(), photons.end(),
                                   [](const PhotonRecord& p) { return p.branch == Branch::zpl; });
    const SceneSpec scene;
    const double expected = kGamma * steady_state(pump, scene.k_vib, kGamma).excited * 0.3;
    CHECK(expected == doctest::Approx(kGamma * 0.1383 * 0.3).epsilon(1e-3));
    CHECK(static_cast<double>(zpl) / duration == doctest::Approx(expected).epsilon(0.02));
    const double total = static_cast<double>(photons.size()) / duration;
    CHECK(total == doctest::Approx(expected / 0.3).epsilon(0.02));
  }

  TEST_CASE("each cycle waits for its own excitation") {
    const auto photons = simulate_stream(one_molecule(), cw(5e7), 0.02, 11);
    REQUIRE(photons.size() > 10000);
    for (std::size_t i = 0; i < photons.size(); ++i) {
      CHECK(photons[i].excite_time < photons[i].emit_time);
      if (i > 0) CHECK(photons[i].excite_time > photons[i - 1].emit_time);
    }
  }

  TEST_CASE("truth g2 of one molecule vanishes at zero lag") {
    const double pump = 1.0 / 8.1e-9 - kGamma;
    const double duration = 0.05;
    const auto photons = simulate_stream(one_molecule(), cw(pump), duration, 5);
    const double bin = kT1 / 20.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < photons.size(); ++i) {
      for (std::size_t j = i + 1; j < photons.size() && photons[j].emit_time - photons[i].emit_time < bin / 2;
           ++j) {
        ++pairs;
      }
    }
    const double n = static_cast<double>(photons.size());
    const double g2_bin = 2.0 * pairs / (n * n * bin / duration);
    CHECK(g2_bin < 0.05);
  }

  TEST_CASE("zero-phonon frequencies follow the natural Lorentzian") {
    auto scene = one_molecule(120e6);
    scene.molecules[0].stark_linear = 50.0;
    scene.electrode.voltage = 10.0;
    const double center = shifted_center(scene.molecules[0], scene.electrode);
    CHECK(center == doctest::Approx(120e6 - 50.0 * 10.0 / 18e-6));
    const auto photons = simulate_stream(scene, cw(1e8), 0.01, 99);
    std::vector<double> f;
    for (const auto& p : photons) {
      if (p.branch == Branch::zpl) f.push_back(p.frequency);
    }
    REQUIRE(f.size() >= 100000);
    f.resize(100000);
    std::sort(f.begin(), f.end());
    const double half = natural_linewidth(kT1) / 2.0;
    const double n = static_cast<double>(f.size());
    double d = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      const double cdf = 0.5 + std::atan((f[i] - center) / half) / kPi;
      d = std::max({d, std::abs(cdf - i / n), std::abs(cdf - (i + 1) / n)});
    }
    // Kolmogorov-Smirnov critical value at the 1% level.
    CHECK(d * std::sqrt(n) < 1.628);
  }

  TEST_CASE("vibronic lines sit below the zero-phonon line") {
    auto scene = one_molecule(0.0);
    scene.emission_lines = {{500.0, 1.0}};
    const auto photons = simulate_stream(scene, cw(5e7), 2e-3, 1);
    int vib = 0;
    for (const auto& p : photons) {
      if (p.branch != Branch::vibronic) continue;
      ++vib;
      CHECK(p.frequency == doctest::Approx(-wavenumber_to_hz(500.0)));
    }
    CHECK(vib > 0);
  }

  TEST_CASE("pulse period") {
    const auto laser = pulsed(1e9);
    CHECK(laser.pulse_period() == doctest::Approx(263.16e-9).epsilon(1e-5));
    CHECK(laser.pulse_period() == doctest::Approx(20.0 / 76e6).epsilon(1e-15));
  }

  TEST_CASE("pulsed gating") {
    auto scene = one_molecule();
    scene.k_vib = 1e15;
    const auto laser = pulsed(3e9);
    const double period = laser.pulse_period();
    const auto photons = simulate_stream(scene, laser, 1e-3, 17);
    REQUIRE(photons.size() > 3000);
    for (const auto& p : photons) {
      const double phase = p.excite_time - std::floor(p.excite_time / period) * period;
      CHECK(phase < laser.pulse_width + 1e-11);
    }
  }

  TEST_CASE("weak pulsed pump follows the per-window excitation probability") {
    const double pump = 1e7;
    const auto laser = pulsed(pump);
    const double duration = 0.05;
    const auto photons = simulate_stream(one_molecule(), laser, duration, 31);
    const double pulses = std::floor(duration / laser.pulse_period());
    const auto per_pulse = emissions_per_pulse(photons, laser.pulse_period());
    const double p = 1.0 - std::exp(-pump * laser.pulse_width);
    CHECK(p == doctest::Approx(pulse_excitation_probability(pump, laser.pulse_width)));
    CHECK(within_sigma(static_cast<double>(per_pulse.size()), pulses, p));
  }

  TEST_CASE("strong pulsed pump re-excites within the window") {
    auto scene = one_molecule();
    scene.k_vib = 1e15;
    const double pump = 1e9;
    const auto laser = pulsed(pump);
    const double duration = 0.05;
    const auto photons = simulate_stream(scene, laser, duration, 8);
    const double pulses = std::floor(duration / laser.pulse_period());
    const auto per_pulse = emissions_per_pulse(photons, laser.pulse_period());
    double one = 0.0, multi = 0.0;
    for (const auto& [k, count] : per_pulse) (count == 1 ? one : multi) += 1.0;
    const double p_any = 1.0 - std::exp(-pump * laser.pulse_width);
    const double p_multi = two_pump_probability(pump, kGamma, laser.pulse_width);
    // Thousands per million pulses, not a few: re-excitation is intrinsic.
    CHECK(p_multi > 1e-3);
    CHECK(p_multi < kGamma * laser.pulse_width);
    CHECK(within_sigma(one + multi, pulses, p_any));
    CHECK(within_sigma(multi, pulses, p_multi));
  }

  TEST_CASE("identity detection chain") {
    auto scene = one_molecule();
    scene.background_rate = 1e5;
    const double duration = 2e-3;
    const auto photons = simulate_stream(scene, cw(2e7), duration, 4);
    const auto tags = apply_detection(photons, ideal_detection(), Split::single, duration, 4);
    REQUIRE(tags.channels.size() == 1);
    const auto& ch = tags.channel(0);
    REQUIRE(ch.size() == photons.size());
    for (std::size_t i = 0; i < ch.size(); ++i) {
      CHECK(ch[i] == static_cast<std::uint64_t>(std::floor(photons[i].emit_time * 1e12)));
    }
    CHECK(tags.resolution_ps == 1u);
    CHECK(tags.duration == duration);
    CHECK_THROWS_AS(tags.channel(1), InputError);
  }

  TEST_CASE("survival is binomial in the efficiency product") {
    std::vector<PhotonRecord> photons(1000000);
    for (std::size_t i = 0; i < photons.size(); ++i) {
      photons[i].emit_time = 1e-6 * static_cast<double>(i);
      photons[i].source_id = 1;
      photons[i].branch = Branch::zpl;
    }
    DetectionSpec det = ideal_detection();
    det.collection_efficiency = 0.3;
    det.zpl_filter_transmission = 0.5;
    det.fiber_coupling = 0.3;
    const auto single = apply_detection(photons, det, Split::single, 1.0, 12);
    const double survivors = static_cast<double>(single.channel(0).size());
    CHECK(within_sigma(survivors, 1e6, 0.045));

    const auto hbt = apply_detection(photons, det, Split::hbt, 1.0, 12);
    const double a = static_cast<double>(hbt.channel(0).size());
    const double b = static_cast<double>(hbt.channel(1).size());
    CHECK(within_sigma(a + b, 1e6, 0.045));
    CHECK(within_sigma(a, a + b, 0.5));
  }

  TEST_CASE("filters act per branch and background bypasses the optics") {
    std::vector<PhotonRecord> photons(3000);
    for (std::size_t i = 0; i < photons.size(); ++i) {
      photons[i].emit_time = 1e-6 * static_cast<double>(i);
      photons[i].source_id = i % 3 == 2 ? kBackgroundSource : 1;
      photons[i].branch = i % 3 == 0 ? Branch::zpl : Branch::vibronic;
    }
    DetectionSpec det = ideal_detection();
    det.vibronic_filter_transmission = 0.0;
    const auto tags = apply_detection(photons, det, Split::single, 1.0, 1);
    CHECK(tags.channel(0).size() == 2000);
    det.collection_efficiency = 0.0;
    CHECK(apply_detection(photons, det, Split::single, 1.0, 1).channel(0).size() == 1000);
  }

  TEST_CASE("tag invariants with dead time, jitter and dark counts") {
    auto scene = one_molecule();
    scene.background_rate = 2e5;
    const double duration = 5e-3;
    const auto photons = simulate_stream(scene, cw(5e7), duration, 21);
    DetectionSpec det = ideal_detection();
    det.dead_time = 50e-9;
    det.timing_jitter_sigma = 40e-12;
    det.dark_count_rate = 1e4;
    det.resolution_ps = 4;
    const auto tags = apply_detection(photons, det, Split::hbt, duration, 21);
    const std::uint64_t dead_ticks = 12500;
    const std::uint64_t end = static_cast<std::uint64_t>(duration * 1e12 / 4.0);
    for (const auto& [id, list] : tags.channels) {
      REQUIRE(list.size() > 100);
      for (std::size_t i = 0; i < list.size(); ++i) {
        CHECK(list[i] < end);
        if (i > 0) CHECK(list[i] - list[i - 1] >= dead_ticks);
      }
    }
  }

  TEST_CASE("dark counts are independent per channel") {
    DetectionSpec det = ideal_detection();
    det.dark_count_rate = 1e3;
    const std::vector<PhotonRecord> none;
    const auto tags = apply_detection(none, det, Split::hbt, 10.0, 77);
    const auto& a = tags.channel(0);
    const auto& b = tags.channel(1);
    CHECK(std::abs(static_cast<double>(a.size()) - 1e4) < 3.0 * 100.0);
    CHECK(std::abs(static_cast<double>(b.size()) - 1e4) < 3.0 * 100.0);
    CHECK(a != b);
  }

  TEST_CASE("jitter is Gaussian around the emit time") {
    std::vector<PhotonRecord> photons(20000);
    for (std::size_t i = 0; i < photons.size(); ++i) {
      photons[i].emit_time = 1e-6 * (1.0 + static_cast<double>(i));
      photons[i].source_id = 1;
      photons[i].branch = Branch::zpl;
    }
    DetectionSpec det = ideal_detection();
    det.timing_jitter_sigma = 40e-12;
    const auto tags = apply_detection(photons, det, Split::single, 1.0, 5);
    const auto& ch = tags.channel(0);
    REQUIRE(ch.size() == photons.size());
    double mean = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < ch.size(); ++i) {
      const double d = static_cast<double>(ch[i]) - photons[i].emit_time * 1e12;
      mean += d;
      sq += d * d;
    }
    mean /= static_cast<double>(ch.size());
    const double sd = std::sqrt(sq / static_cast<double>(ch.size()) - mean * mean);
    CHECK(std::abs(mean + 0.5) < 3.0 * 40.0 / std::sqrt(20000.0));
    CHECK(sd == doctest::Approx(40.0).epsilon(0.03));
  }

  TEST_CASE("detection input checks") {
    std::vector<PhotonRecord> photons(2);
    photons[0].emit_time = 2e-6;
    photons[1].emit_time = 1e-6;
    CHECK_THROWS_AS(apply_detection(photons, DetectionSpec{}, Split::single, 1.0, 1), InputError);
    CHECK_THROWS_AS(apply_detection({}, DetectionSpec{}, Split::single, 0.0, 1), PhysicsError);
    DetectionSpec bad;
    bad.collection_efficiency = 1.5;
    CHECK_THROWS_AS(apply_detection({}, bad, Split::single, 1.0, 1), PhysicsError);
  }

  TEST_CASE("scene digest") {
    auto scene = one_molecule();
    const LaserSpec laser = cw(1e7);
    const auto d0 = scene_digest(scene, laser);
    CHECK(d0.size() == 16);
    CHECK(d0 == scene_digest(scene, laser));
    scene.electrode.voltage = 1.0;
    CHECK(d0 != scene_digest(scene, laser));
  }
}
