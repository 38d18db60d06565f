#include <math.h>
#include <stdio.h>
#include <string.h>

#include "roadlab.h"

#define CHECK(call)                                                          \
    do {                                                                     \
        RoadlabStatus st = (call);                                           \
        if (st != ROADLAB_STATUS_OK) {                                       \
            const char *msg = roadlab_last_error_message();                  \
            fprintf(stderr, "%s failed (%d): %s\n", #call, (int)st,          \
                    msg ? msg : "(no message)");                             \
            return 1;                                                        \
        }                                                                    \
    } while (0)

int main(void) {
    RoadlabSession *s = NULL;
    CHECK(roadlab_session_from_dataset("braess", &s));

    uint64_t child = 0;
    CHECK(roadlab_apply_modification(s, 0, "{\"kind\":\"close_road\",\"road\":3}", &child));

    double vs_initial = 0, vs_parent = 0;
    bool applicable = false;
    CHECK(roadlab_metric_deltas(s, child, &vs_initial, &vs_parent, &applicable));
    if (!applicable || fabs(vs_initial - 0.26) > 0.01) {
        fprintf(stderr, "unexpected improvement %f\n", vs_initial);
        return 1;
    }

    if (roadlab_delete_state(s, 0, NULL) != ROADLAB_STATUS_ROOT_DELETION) {
        fprintf(stderr, "root deletion was not refused\n");
        return 1;
    }

    char *doc = NULL;
    CHECK(roadlab_session_export(s, &doc));
    RoadlabSession *copy = NULL;
    CHECK(roadlab_session_import(doc, &copy));
    char *again = NULL;
    CHECK(roadlab_session_export(copy, &again));
    int same = strcmp(doc, again) == 0;
    roadlab_string_free(doc);
    roadlab_string_free(again);
    roadlab_session_free(copy);
    roadlab_session_free(s);
    if (!same) {
        fprintf(stderr, "export differs after import\n");
        return 1;
    }
    printf("ok %.4f\n", vs_initial);
    return 0;
}
