#include <stdio.h>
#include <string.h>
#include "egg.h"

#define CHECK(cond) do { if (!(cond)) { fprintf(stderr, "failed: %s (%s)\n", #cond, egg_last_error() ? egg_last_error() : "-"); return 1; } } while (0)

int main(void) {
    EggSession *s = egg_session_new();
    CHECK(s != NULL);
    EggCache *c = NULL;
    CHECK(egg_session_eval(s, "hello world", &c) == EGG_STATUS_OK);
    CHECK(egg_cache_len(c) == 2);

    EggCache *w = NULL;
    CHECK(egg_cache_select(s, c, "", &w) == EGG_STATUS_OK);
    egg_cache_free(w);

    uint8_t *bytes = NULL;
    size_t len = 0;
    CHECK(egg_cache_serialize(c, &bytes, &len) == EGG_STATUS_OK);
    EggCache *back = NULL;
    CHECK(egg_cache_deserialize(s, bytes, len, &back) == EGG_STATUS_OK);
    egg_bytes_free(bytes, len);

    char *text = NULL;
    CHECK(egg_cache_render(s, back, &text) == EGG_STATUS_OK);
    CHECK(strcmp(text, "(hello,0) \xe2\x88\xa8 (world,0)") == 0);
    egg_string_free(text);

    EggCache *bad = NULL;
    CHECK(egg_session_eval(s, "a (", &bad) == EGG_STATUS_PARSE_ERROR);
    CHECK(egg_last_error() != NULL);

    egg_cache_free(back);
    egg_cache_free(c);
    egg_session_free(s);
    printf("ok %s\n", egg_version());
    return 0;
}
