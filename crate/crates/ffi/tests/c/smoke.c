#include <math.h>
#include <stdio.h>
#include "glmbands.h"

int main(void) {
    GbDataset *ds = NULL;
    GbFit *fit = NULL;
    GbBand *band = NULL;
    double beta[2], phi, w;

    if (gb_dataset_lavelle(&ds) != GB_STATUS_OK) return 1;
    if (gb_fit(ds, GB_LINK_LOGIT, &fit) != GB_STATUS_OK) return 2;
    if (gb_fit_coefficients(fit, beta) != GB_STATUS_OK) return 3;
    if (gb_cone_angle(fit, -1.3, 0.8, &phi) != GB_STATUS_OK) return 4;
    if (gb_critical_value(phi, 0.95, GB_SIDE_TWO_SIDED, &w) != GB_STATUS_OK) return 5;
    if (gb_band_build(fit, -1.3, 0.8, GB_SIDE_TWO_SIDED, 0.95, 11, 0.0, 0.0, &band) != GB_STATUS_OK) return 6;
    if (gb_band_len(band) != 11) return 7;
    if (gb_critical_value(phi, 2.0, GB_SIDE_TWO_SIDED, &w) != GB_STATUS_SOLVER_ERROR &&
        gb_critical_value(phi, 2.0, GB_SIDE_TWO_SIDED, &w) != GB_STATUS_INPUT_ERROR) return 8;
    if (gb_last_error_message()[0] == '\0') return 9;
    printf("%.4f %.4f %.4f %.4f\n", beta[0], beta[1], phi, gb_band_critical_value(band));
    gb_band_free(band);
    gb_fit_free(fit);
    gb_dataset_free(ds);
    return 0;
}
