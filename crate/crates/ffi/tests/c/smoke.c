#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "rootcause.h"

static int fail(const char *what) {
    const char *msg = rc_last_error();
    fprintf(stderr, "%s: %s\n", what, msg ? msg : "(no message)");
    return 1;
}

int main(int argc, char **argv) {
    if (argc != 2) {
        fprintf(stderr, "usage: smoke MODEL\n");
        return 2;
    }
    rc_model *model = NULL;
    if (rc_model_load(argv[1], &model) != RC_STATUS_OK) return fail("load");
    size_t n = rc_model_num_classes(model);
    double *scores = calloc(n, sizeof(double));
    size_t cls = 0;
    if (rc_model_predict(model, "deadlock: threads waiting on a lock", &cls, scores, n) != RC_STATUS_OK)
        return fail("predict");
    char *name = NULL;
    if (rc_model_class_name(model, cls, &name) != RC_STATUS_OK) return fail("class_name");
    printf("%s %s %zu\n", rc_model_kind(model), name, n);
    rc_string_free(name);

    char *stem = NULL;
    if (rc_stem("connections", &stem) != RC_STATUS_OK) return fail("stem");
    printf("%s\n", stem);
    rc_string_free(stem);

    uint64_t m[9] = {1, 1, 0, 0, 2, 0, 1, 0, 1};
    rc_weighted_metrics_t w;
    if (rc_weighted_metrics(m, 3, &w) != RC_STATUS_OK) return fail("metrics");
    printf("%.4f %.4f %.4f\n", w.precision, w.recall, w.f1);

    free(scores);
    rc_model_free(model);
    return 0;
}
