#include "music_ffi.h"
#include <stdio.h>
#include <stdlib.h>

#define CHECK(call)                                                        \
  do {                                                                     \
    MusicStatus s_ = (call);                                               \
    if (s_ != MUSIC_STATUS_OK) {                                           \
      fprintf(stderr, "%s -> %d: %s\n", #call, (int)s_, music_last_error()); \
      return 1;                                                            \
    }                                                                      \
  } while (0)

int main(void) {
  double j0;
  CHECK(music_bessel_j(0, 1.0, &j0));
  if (j0 < 0.7651976865 || j0 > 0.7651976866) return 2;

  MusicConfig *cfg = NULL;
  if (music_config_from_case(9, "EPS1", 1, &cfg) != MUSIC_STATUS_INVALID) return 3;
  if (music_last_error() == NULL) return 4;

  CHECK(music_config_from_case(5, "EPS1", 1, &cfg));
  MusicResult *res = NULL;
  CHECK(music_run(cfg, &res));

  size_t n = 0;
  CHECK(music_result_singular_values(res, NULL, 0, &n));
  double *sv = malloc(n * sizeof *sv);
  CHECK(music_result_singular_values(res, sv, n, &n));
  for (size_t i = 1; i < n; i++)
    if (sv[i] > sv[i - 1]) return 5;
  free(sv);

  size_t peaks = 0;
  CHECK(music_result_peak_count(res, &peaks));
  for (size_t i = 0; i < peaks; i++) {
    double x, y, v;
    CHECK(music_result_peak(res, i, &x, &y, &v));
    printf("peak %zu: (%.3f, %.3f) %.4g\n", i, x, y, v);
  }
  if (peaks != 3) return 6;

  music_result_free(res);
  music_config_free(cfg);
  return 0;
}
