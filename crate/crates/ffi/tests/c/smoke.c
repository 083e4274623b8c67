#include <math.h>
#include <stdio.h>

#include "rmt_lab.h"

int main(void) {
    double gamma[4];
    if (rmt_gamma_table(4, gamma, 4) != RMT_STATUS_OK || gamma[1] != 0.0) {
        return 1;
    }
    RmtEnsemble *ens = NULL;
    if (rmt_ensemble_new(RMT_ENSEMBLE_KIND_GOE, 8, 0, &ens) != RMT_STATUS_OK) {
        return 2;
    }
    double ev[8];
    RmtStatus st = rmt_sample_spectrum(ens, 42, true, ev, 8);
    rmt_ensemble_free(ens);
    if (st != RMT_STATUS_OK) {
        return 3;
    }
    double q;
    if (rmt_sc_quantile(2.0, &q) != RMT_STATUS_INVALID_ARGUMENT) {
        return 4;
    }
    char msg[128];
    rmt_last_error_message(msg, sizeof msg);
    printf("%s|%.3f\n", msg, fabs(ev[0]) < 10.0 ? 1.0 : 0.0);
    return 0;
}
