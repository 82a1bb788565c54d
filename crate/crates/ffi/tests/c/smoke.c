#include <math.h>
#include <stdio.h>
#include "mpctune.h"

#define CHECK(call)                                                        \
    do {                                                                   \
        MpctuneStatus s_ = (call);                                         \
        if (s_ != MPCTUNE_STATUS_OK) {                                     \
            fprintf(stderr, "%s: %d %s\n", #call, s_, mpctune_last_error()); \
            return 1;                                                      \
        }                                                                  \
    } while (0)

static int bowl(void *user, const double *x, size_t d, double *value) {
    int *calls = user;
    double s = 0.0;
    for (size_t i = 0; i < d; i++) s += (x[i] - 0.25) * (x[i] - 0.25);
    *value = s;
    (*calls)++;
    return 0;
}

int main(void) {
    printf("mpctune %s\n", mpctune_version());

    MpctuneLp *lp = NULL;
    size_t x0, x1;
    CHECK(mpctune_lp_new(&lp));
    CHECK(mpctune_lp_add_var(lp, 0.0, INFINITY, 3.0, &x0));
    CHECK(mpctune_lp_add_var(lp, 0.0, INFINITY, 1.0, &x1));
    size_t idx[2] = {x0, x1};
    double val[2] = {1.0, 2.0};
    CHECK(mpctune_lp_add_row(lp, MPCTUNE_ROW_SENSE_GREATER_EQUAL, idx, val, 2, 4.0));
    MpctuneLpStatus st;
    double x[2], obj;
    CHECK(mpctune_lp_solve(lp, &st, x, 2, &obj, NULL));
    mpctune_lp_free(lp);
    if (st != MPCTUNE_LP_STATUS_OPTIMAL || fabs(obj - 2.0) > 1e-9) {
        fprintf(stderr, "lp: status %d objective %g\n", st, obj);
        return 1;
    }

    MpctuneTankUpdate u;
    CHECK(mpctune_backoff_update(95.0, 0.1, 100.0, &u));
    if (u.update_case != MPCTUNE_BACKOFF_CASE_ABOVE_BAND) return 1;
    if (mpctune_backoff_update(50.0, 0.1, -1.0, &u) != MPCTUNE_STATUS_DOMAIN) return 1;
    if (mpctune_last_error() == NULL) return 1;

    double lo[2] = {0.0, 0.0}, hi[2] = {0.5, 0.5};
    MpctuneBoConfig cfg = mpctune_bo_config_default();
    cfg.max_iter = 4;
    int calls = 0;
    MpctuneTrace *trace = NULL;
    CHECK(mpctune_bo_run(lo, hi, 2, &cfg, bowl, &calls, &trace));
    double best[2], v;
    CHECK(mpctune_trace_best(trace, best, 2, &v));
    size_t n = mpctune_trace_len(trace);
    mpctune_trace_free(trace);
    if (calls != 7 || n != 7) {
        fprintf(stderr, "bo: %d calls, %zu samples\n", calls, n);
        return 1;
    }
    printf("ok %g\n", v);
    return 0;
}
