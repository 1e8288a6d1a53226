/* Exercises the shared library through its C header only. */

#include <math.h>
#include <stdio.h>
#include <string.h>

#include "molsps/molsps.h"

static int failures = 0;

#define EXPECT(cond)                                               \
  do {                                                             \
    if (!(cond)) {                                                 \
      fprintf(stderr, "%s:%d: failed: %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                  \
    }                                                              \
  } while (0)

static const char kScene[] =
    "[molecule.1]\n"
    "zpl_center = 0 Hz\n"
    "[scene.b]\n"
    "[molecule.b.1]\n"
    "zpl_center = 180 MHz\n"
    "stark_linear = 77.142857142857 Hz/(V/m)\n"
    "[laser]\n"
    "mode = cw\n"
    "cw_peak_pump_rate = 17073811.4 /s\n"
    "[detection]\n"
    "collection_efficiency = 1\n"
    "zpl_filter_transmission = 1\n"
    "vibronic_filter_transmission = 1\n"
    "fiber_coupling = 1\n"
    "dead_time = 0 ns\n";

static void test_errors(void) {
  msps_config* cfg = NULL;
  const char bad[] = "[laser]\nbogus = 1\n";
  EXPECT(msps_config_parse(bad, strlen(bad), &cfg) == MSPS_ERR_CONFIG);
  EXPECT(cfg == NULL);
  EXPECT(strstr(msps_last_error(), "bogus") != NULL);
  const char physics[] = "[molecule.1]\nlifetime_t1 = -1 ns\n";
  EXPECT(msps_config_parse(physics, strlen(physics), &cfg) == MSPS_ERR_PHYSICS);
  EXPECT(msps_config_load("/nonexistent/scene.ini", &cfg) == MSPS_ERR_IO);
  EXPECT(msps_config_parse(NULL, 0, &cfg) == MSPS_ERR_INPUT);
  EXPECT(msps_config_parse(kScene, strlen(kScene), NULL) == MSPS_ERR_INPUT);
  EXPECT(isnan(msps_stark_calibrate(1.0, 0.0, 1e-6)));
  EXPECT(strlen(msps_last_error()) > 0);

  double q = 0.0;
  EXPECT(msps_parse_quantity("250 ps", MSPS_DIM_TIME, &q) == MSPS_OK);
  EXPECT(fabs(q - 250e-12) < 1e-24);
  EXPECT(strlen(msps_last_error()) == 0);
  EXPECT(msps_parse_quantity("250 PS", MSPS_DIM_TIME, &q) == MSPS_ERR_CONFIG);

  /* Releasing NULL handles is a no-op. */
  msps_config_free(NULL);
  msps_photons_free(NULL);
  msps_tags_free(NULL);
  msps_histogram_free(NULL);
  msps_spectrum_free(NULL);
  msps_stark_map_free(NULL);
  msps_image_free(NULL);
}

static void test_pipeline(void) {
  msps_config* cfg = NULL;
  EXPECT(msps_config_parse(kScene, strlen(kScene), &cfg) == MSPS_OK);
  if (!cfg) return;
  EXPECT(msps_config_scene_count(cfg) == 2);
  EXPECT(strcmp(msps_config_scene_label(cfg, 1), "b") == 0);
  EXPECT(msps_config_molecule_count(cfg, 1) == 1);
  EXPECT(msps_config_molecule_id(cfg, 0, 0) == 1);
  EXPECT(msps_config_is_pulsed(cfg) == 0);
  char digest[17];
  EXPECT(msps_config_scene_digest(cfg, 0, digest) == MSPS_OK);
  EXPECT(strlen(digest) == 16);

  msps_photons* photons = NULL;
  EXPECT(msps_simulate(cfg, 0, 0.02, msps_derive_seed(7, 0), &photons) == MSPS_OK);
  EXPECT(msps_photons_count(photons) > 100000);
  msps_photon p;
  EXPECT(msps_photons_get(photons, 0, &p) == MSPS_OK);
  EXPECT(p.source_id == 1);
  EXPECT(p.excite_time < p.emit_time);
  EXPECT(msps_photons_get(photons, msps_photons_count(photons), &p) == MSPS_ERR_INPUT);

  msps_tags* tags = NULL;
  EXPECT(msps_detect(cfg, photons, MSPS_SPLIT_HBT, 0.02, msps_derive_seed(7, 1), &tags) == MSPS_OK);
  EXPECT(msps_tags_channel_count(tags) == 2);
  EXPECT(msps_tags_resolution_ps(tags) == 1);
  const uint64_t* ch0 = NULL;
  size_t n0 = 0;
  EXPECT(msps_tags_channel(tags, 0, &ch0, &n0) == MSPS_OK);
  EXPECT(n0 > 0);
  for (size_t i = 1; i < n0; ++i) EXPECT(ch0[i] > ch0[i - 1]);

  msps_histogram* raw = NULL;
  msps_histogram* g2 = NULL;
  EXPECT(msps_correlate(tags, 0, 1, 250e-12, 100e-9, &raw) == MSPS_OK);
  EXPECT(msps_histogram_normalize(raw, &g2) == MSPS_OK);
  msps_histogram_info info;
  EXPECT(msps_histogram_info_get(g2, &info) == MSPS_OK);
  EXPECT(info.normalized == 1);
  const double* bins = NULL;
  size_t nb = 0;
  EXPECT(msps_histogram_bins(g2, &bins, &nb) == MSPS_OK);
  EXPECT(nb == 801);
  EXPECT(bins[nb / 2] < 0.05);
  msps_antibunching fit;
  EXPECT(msps_fit_antibunching(g2, &fit) == MSPS_OK);
  EXPECT(fit.decay_identified == 1);
  EXPECT(fabs(fit.decay_time - 8.1e-9) < 0.6e-9);
  EXPECT(msps_fit_antibunching(raw, &fit) == MSPS_ERR_INPUT);

  double ov = 0.0;
  EXPECT(msps_wavepacket_overlap(1 / 9.4e-9, 1 / 9.4e-9, 180e6, 0.0, 0.0, &ov) == MSPS_OK);
  EXPECT(fabs(ov - 0.00877) < 1e-4);

  msps_budget_entry entries[4];
  size_t count = 0;
  EXPECT(msps_rate_budget(cfg, 0, entries, 4, &count) == MSPS_OK);
  EXPECT(count == 1);
  EXPECT(fabs(entries[0].excited_population - 0.1383) < 1e-3);

  EXPECT(msps_config_set_voltage(cfg, 1, 42.0) == MSPS_OK);
  EXPECT(msps_config_set_voltage(cfg, 1, 500.0) == MSPS_ERR_PHYSICS);
  EXPECT(msps_config_set_voltage(cfg, 9, 1.0) == MSPS_ERR_INPUT);

  msps_spectrum* spec = NULL;
  EXPECT(msps_excitation_spectrum(cfg, 0, &spec) == MSPS_OK);
  msps_peak_fit peak;
  EXPECT(msps_spectrum_fit_lorentzian(spec, &peak) == MSPS_OK);
  EXPECT(fabs(peak.fwhm - msps_natural_linewidth(9.4e-9)) < 0.01 * peak.fwhm);
  EXPECT(msps_spectrum_line_count(spec) == 0);

  msps_histogram_free(g2);
  msps_histogram_free(raw);
  msps_spectrum_free(spec);
  msps_tags_free(tags);
  msps_photons_free(photons);
  msps_config_free(cfg);
}

int main(void) {
  EXPECT(strlen(msps_version()) > 0);
  EXPECT(msps_derive_seed(1, 0) != msps_derive_seed(1, 1));
  EXPECT(fabs(msps_diffraction_fwhm(590.0, 1.12) - 268.66) < 0.1);
  test_errors();
  test_pipeline();
  if (failures) {
    fprintf(stderr, "%d failure(s)\n", failures);
    return 1;
  }
  printf("capi smoke: ok\n");
  return 0;
}
