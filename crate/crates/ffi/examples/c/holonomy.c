/* Build from this directory: cc holonomy.c -I../../include -L../../../../target/debug -lholokit_ffi -lm
   Run with LD_LIBRARY_PATH=../../../../target/debug, or link libholokit_ffi.a instead. */
#include <stdio.h>
#include "holokit.h"

int main(void) {
    HkFixture *sphere = NULL;
    if (hk_fixture_builtin("sphere", &sphere) != HK_STATUS_OK) {
        fprintf(stderr, "%s\n", hk_last_error());
        return 1;
    }
    HkTransport *hol = NULL;
    HkStatus status = hk_holonomy(sphere, "latitude_60", 1024, &hol);
    if (status != HK_STATUS_OK && status != HK_STATUS_WARNING) {
        fprintf(stderr, "holonomy failed (%d): %s\n", (int)status, hk_last_error());
        hk_fixture_free(sphere);
        return 1;
    }
    double m[4];
    hk_transport_matrix(hol, m, 4);
    double angle = 0.0;
    if (hk_transport_angle(hol, &angle)) {
        printf("angle %.12f\n", angle);
    }
    printf("[[%g, %g], [%g, %g]] estimate %.3e\n", m[0], m[1], m[2], m[3], hk_transport_error_estimate(hol));
    hk_transport_free(hol);
    hk_fixture_free(sphere);
    return 0;
}
