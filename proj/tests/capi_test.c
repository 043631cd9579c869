#include <math.h>
#include <stdio.h>
#include <string.h>

#include "drdoo/drdoo.h"

static int failures = 0;

#define EXPECT(cond)                                                \
  do {                                                              \
    if (!(cond)) {                                                  \
      ++failures;                                                   \
      fprintf(stderr, "%s:%d: failed: %s\n", __FILE__, __LINE__, #cond); \
    }                                                               \
  } while (0)

static void test_config(void) {
  drdoo_config* c = NULL;
  char* hex = NULL;
  char* hex2 = NULL;
  EXPECT(drdoo_config_default(&c) == DRDOO_OK);
  EXPECT(drdoo_config_hash(c, &hex) == DRDOO_OK);
  EXPECT(hex && strlen(hex) == 64);
  EXPECT(drdoo_config_set(c, "experiment.n", "15") == DRDOO_OK);
  EXPECT(drdoo_config_hash(c, &hex2) == DRDOO_OK);
  EXPECT(strcmp(hex, hex2) != 0);
  EXPECT(drdoo_config_set(c, "experiment.colour", "red") == DRDOO_ERR_CONFIG);
  EXPECT(strlen(drdoo_last_error()) > 0);
  drdoo_string_free(hex);
  drdoo_string_free(hex2);
  drdoo_config_free(c);

  c = NULL;
  EXPECT(drdoo_config_parse("[model]\nkind = banana\n", &c) == DRDOO_ERR_CONFIG);
  EXPECT(c == NULL);
  EXPECT(drdoo_config_load("/nonexistent.ini", &c) == DRDOO_ERR_CONFIG);
  EXPECT(drdoo_config_default(NULL) == DRDOO_ERR_INVALID_ARGUMENT);
  EXPECT(strlen(drdoo_status_name(DRDOO_ERR_SOLVER)) > 0);
  EXPECT(strlen(drdoo_version()) > 0);
}

static void test_numeric(void) {
  const double q[2] = {0.75, 0.25}, p[2] = {0.5, 0.5};
  double v = 0, c = 0, w[2] = {0, 0};
  const double f[2] = {0.0, 1.0};
  EXPECT(drdoo_divergence_chi2(q, p, 2, &v) == DRDOO_OK);
  EXPECT(fabs(v - 1.0 / 8) < 1e-15);
  EXPECT(drdoo_inner_value(f, p, 2, 0.2, &v, &c, w) == DRDOO_OK);
  EXPECT(fabs(w[0] - 0.55) < 1e-12 && fabs(w[1] - 0.45) < 1e-12);
  EXPECT(v < 0.5);
  EXPECT(drdoo_inner_value(f, p, 2, 0.0, &v, &c, w) == DRDOO_OK);
  EXPECT(fabs(v - 0.5) < 1e-15 && w[0] == 0.5);
  EXPECT(drdoo_inner_value(NULL, p, 2, 0.1, &v, &c, w) == DRDOO_ERR_INVALID_ARGUMENT);
}

static void test_solve(void) {
  drdoo_config* c = NULL;
  drdoo_sample* s = NULL;
  char* json = NULL;
  double ys[10];
  int i;
  for (i = 0; i < 10; ++i) ys[i] = i + 1;
  EXPECT(drdoo_config_default(&c) == DRDOO_OK);
  EXPECT(drdoo_sample_create(ys, NULL, 10, 1, &s) == DRDOO_OK);
  EXPECT(drdoo_sample_size(s) == 10 && drdoo_sample_dim(s) == 1);
  EXPECT(drdoo_solve_json(c, s, 0.0, &json) == DRDOO_OK);
  EXPECT(json && strstr(json, "\"method\": \"critical_quantile\"") != NULL);
  drdoo_string_free(json);
  json = NULL;
  EXPECT(drdoo_analyze_json(c, s, &json) == DRDOO_OK);
  EXPECT(json && strstr(json, "\"warnings\"") != NULL);
  drdoo_string_free(json);
  drdoo_sample_free(s);

  {
    const double bad_w[2] = {0.5, -0.5};
    EXPECT(drdoo_sample_create(ys, bad_w, 2, 1, &s) == DRDOO_ERR_INVALID_ARGUMENT);
  }

  EXPECT(drdoo_config_set(c, "model.kind", "quadratic") == DRDOO_OK);
  EXPECT(drdoo_config_set(c, "population.kind", "gaussian") == DRDOO_OK);
  {
    const double two[2] = {0.0, 3.0};
    char* csv = NULL;
    EXPECT(drdoo_sample_create(two, NULL, 2, 1, &s) == DRDOO_OK);
    EXPECT(drdoo_sample_to_csv(s, &csv) == DRDOO_OK);
    EXPECT(csv && strncmp(csv, "y_1", 3) == 0);
    drdoo_string_free(csv);
    json = NULL;
    EXPECT(drdoo_solve_json(c, s, -1.0, &json) == DRDOO_ERR_SOLVER);
    EXPECT(json == NULL);
    drdoo_sample_free(s);
  }
  s = NULL;
  EXPECT(drdoo_sample_draw(c, 25, 7, &s) == DRDOO_OK);
  EXPECT(drdoo_sample_size(s) == 25);
  drdoo_sample_free(s);
  drdoo_config_free(c);
}

static void test_reproduce(void) {
  drdoo_config* c = NULL;
  char* manifest = NULL;
  EXPECT(drdoo_config_default(&c) == DRDOO_OK);
  EXPECT(drdoo_config_set(c, "experiment.n_datasets", "4") == DRDOO_OK);
  EXPECT(drdoo_config_set(c, "grid.points_per_sign", "3") == DRDOO_OK);
  EXPECT(drdoo_reproduce(c, "fig1", "/proc/drdoo_nope", 1, &manifest) == DRDOO_ERR_IO);
  EXPECT(drdoo_reproduce(c, "fig9", "/tmp", 1, &manifest) == DRDOO_ERR_INVALID_ARGUMENT);
  drdoo_config_free(c);
}

int main(void) {
  test_config();
  test_numeric();
  test_solve();
  test_reproduce();
  if (failures) fprintf(stderr, "%d expectation(s) failed\n", failures);
  else printf("capi: all expectations passed\n");
  return failures ? 1 : 0;
}
