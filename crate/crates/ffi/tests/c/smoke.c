#include <stdio.h>
#include <string.h>
#include "hhe.h"

#define CHECK(x) do { HheStatus s_ = (x); if (s_ != HHE_STATUS_OK) { \
    fprintf(stderr, "%s -> %d: %s\n", #x, (int)s_, hhe_last_error()); return 1; } } while (0)

int main(void) {
    HheCipher *c = NULL;
    HheKey *k = NULL;
    uint8_t seed[2] = {1, 2};
    uint8_t nonce[3] = {9, 9, 9};
    uint64_t ks[64];
    double m[60], back[60];
    uint64_t ct[60];
    HheSimSummary sum;

    CHECK(hhe_cipher_new(HHE_SCHEME_RUBATO, &c));
    CHECK(hhe_key_derive(c, seed, sizeof seed, &k));
    size_t l = hhe_cipher_block_len(c);
    CHECK(hhe_keystream(c, k, nonce, sizeof nonce, 0, ks, 64));
    for (size_t i = 0; i < l; i++) m[i] = (double)i / 7.0 - 3.0;
    CHECK(hhe_encrypt(c, k, nonce, sizeof nonce, 0, m, l, 1048576.0, ct));
    CHECK(hhe_decrypt(c, k, nonce, sizeof nonce, 0, ct, l, 1048576.0, back));
    for (size_t i = 0; i < l; i++) {
        double d = back[i] - m[i];
        if (d > 1e-5 || d < -1e-5) { fprintf(stderr, "roundtrip %zu\n", i); return 1; }
    }
    if (hhe_keystream(c, k, nonce, sizeof nonce, 0, ks, 10) != HHE_STATUS_BUFFER_TOO_SMALL) return 1;
    if (hhe_last_error() == NULL || strstr(hhe_last_error(), "60") == NULL) return 1;
    CHECK(hhe_simulate(c, HHE_VARIANT_D3, k, nonce, sizeof nonce, 2, 0, 0, &sum));
    printf("hhe %s: l=%zu d3 latency=%llu\n", hhe_version(), l, (unsigned long long)sum.latency_cycles);
    hhe_key_free(k);
    hhe_cipher_free(c);
    return sum.latency_cycles == 66 ? 0 : 1;
}
