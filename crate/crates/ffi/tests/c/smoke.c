#include <stdio.h>
#include <string.h>

#include "photonlab.h"

#define CHECK(cond)                                                       \
    do {                                                                  \
        if (!(cond)) {                                                    \
            fprintf(stderr, "%s:%d: %s (%s)\n", __FILE__, __LINE__, #cond, \
                    pl_last_error());                                     \
            return 1;                                                     \
        }                                                                 \
    } while (0)

int main(void) {
    PlStream *s = NULL;
    PlHistogram *h = NULL;
    PlG2 g;
    size_t n = 0;

    CHECK(strncmp(pl_version(), "photonlab ", 10) == 0);
    CHECK(pl_stream_len(NULL, &n) == PL_STATUS_NULL_POINTER);
    CHECK(strlen(pl_last_error()) > 0);

    CHECK(pl_simulate_bundled("qd1_hbt", 100000, 1, &s) == PL_STATUS_OK);
    CHECK(pl_stream_len(s, &n) == PL_STATUS_OK && n > 0);
    CHECK(pl_correlate(s, 100, 100000, &h) == PL_STATUS_OK);
    CHECK(pl_g2_zero(h, 1000.0 / 76.0, 2.0, 80.0, &g) == PL_STATUS_OK);
    CHECK(g.value >= 0.0 && g.value < 0.3);

    PlEstimate a = {2.93e5, 0.0}, b = {5.22e3, 0.0}, e = {0.0079, 0.0}, out;
    CHECK(pl_eta_relative(a, b, e, &out) == PL_STATUS_OK);
    CHECK(out.value > 0.4425 && out.value < 0.4435);

    pl_histogram_free(h);
    pl_stream_free(s);
    printf("ok g2=%.4f eta=%.4f\n", g.value, out.value);
    return 0;
}
