/* Build: cargo build -p qgrad-ffi --release
 *        cc -Icrates/ffi/include crates/ffi/examples/demo.c target/release/libqgrad_ffi.a -lm -lpthread -ldl -o demo */
#include <math.h>
#include <stdio.h>
#include "qgrad.h"

static double tilted(const double *x, size_t dim, void *user) {
    const double *slope = user;
    double v = 0.0;
    for (size_t j = 0; j < dim; ++j) v += slope[j] * sin(x[j]);
    return 0.25 * v;
}

int main(void) {
    char msg[256];
    QgradScheme *scheme = NULL;
    if (qgrad_scheme_new(2, &scheme) != QGRAD_STATUS_OK) return 1;
    char coeff[64];
    qgrad_scheme_coefficient_string(scheme, -2, coeff, sizeof coeff, NULL);
    printf("a_-2 = %s of %zu coefficients\n", coeff, qgrad_scheme_len(scheme));
    qgrad_scheme_free(scheme);

    double slope[2] = {0.8, -0.4};
    double grad[2] = {0.2, -0.1};
    QgradObjective *f = NULL;
    if (qgrad_objective_from_callback(2, 1.0, 0.5, tilted, slope, grad, &f) != QGRAD_STATUS_OK) return 1;
    double est[2];
    uint64_t calls = 0;
    QgradStatus st = qgrad_run_qge(f, 0.5, 1.0, INFINITY, 0.2, 42, QGRAD_COST_MODEL_EXACT_SIM, false, est, 2, &calls);
    if (st != QGRAD_STATUS_OK) {
        qgrad_last_error_message(msg, sizeof msg);
        fprintf(stderr, "run failed (%d): %s\n", (int)st, msg);
        return 1;
    }
    printf("estimate (%.4f, %.4f) after %llu oracle calls\n", est[0], est[1], (unsigned long long)calls);
    qgrad_objective_free(f);
    return 0;
}
