/* Minimal consumer of the C ABI: parse a profile, run the uniform eating
 * mechanism, and check equal treatment of equals.
 *
 * Build (from the repository root):
 *   cargo build -p randassign-ffi --release
 *   cc crates/ffi/examples/demo.c -Icrates/ffi/include \
 *      target/release/librandassign_ffi.a -lpthread -lm -ldl -o demo
 */
#include <stdio.h>
#include <string.h>
#include "randassign.h"

static const char *PROFILE =
    "{\"version\":1,"
    "\"agents\":[\"1\",\"2\",\"3\"],"
    "\"items\":[\"a\",\"b\",\"c\"],"
    "\"preferences\":{"
    "\"1\":[\"a\",\"b\",\"c\"],"
    "\"2\":[\"a\",\"c\",\"b\"],"
    "\"3\":[\"b\",\"a\",\"c\"]}}";

int main(void) {
    randassign_profile *profile = NULL;
    if (randassign_profile_parse(PROFILE, &profile) != RANDASSIGN_STATUS_OK) {
        fprintf(stderr, "parse failed: %s\n", randassign_last_error());
        return 1;
    }
    printf("profile with %zu agents\n", (size_t)randassign_profile_size(profile));

    char *assignment = NULL;
    if (randassign_run(profile, "upre", NULL, &assignment) != RANDASSIGN_STATUS_OK) {
        fprintf(stderr, "run failed: %s\n", randassign_last_error());
        randassign_profile_free(profile);
        return 1;
    }
    printf("upre output: %s\n", assignment);

    char *verdict = NULL;
    randassign_status status = randassign_check(profile, "sete", assignment, &verdict);
    printf("sete verdict (%d): %s\n", (int)status, verdict);

    randassign_string_free(verdict);
    randassign_string_free(assignment);
    randassign_profile_free(profile);
    return status == RANDASSIGN_STATUS_OK ? 0 : 1;
}
