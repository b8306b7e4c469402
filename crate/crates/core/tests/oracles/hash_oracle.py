#!/usr/bin/env python3
"""Straight-line reference for the field hashes.

Derives round constants from their seed strings with hashlib, evaluates MiMC
and Poseidon round by round on Python integers, and writes the frozen vectors
used by the Rust tests. It does not read the engine's constants file.

    python3 hash_oracle.py > ../fixtures/hash_vectors.toml
"""
import hashlib

P = 21888242871839275222246405745257275088548364400416034343698204186575808495617


def rc(kind, i):
    d = hashlib.sha256(f"AMR-{kind}-rc-{i}".encode()).digest()
    return int.from_bytes(d, "big") % P


MIMC_ROUNDS = 91
MIMC_RC = [rc("mimc", i) for i in range(MIMC_ROUNDS)]


def mimc_2p(left, right):
    xl, xr = left % P, right % P
    for i in range(MIMC_ROUNDS):
        t = (xl + MIMC_RC[i]) % P
        xl, xr = (xr + pow(t, 7, P)) % P, xl
    return xl


WIDTH, FULL, PARTIAL = 3, 8, 57
POS_RC = [rc("poseidon", i) for i in range((FULL + PARTIAL) * WIDTH)]
MDS = [[pow(i + j + WIDTH, P - 2, P) for j in range(WIDTH)] for i in range(WIDTH)]


def poseidon_2p(left, right):
    s = [0, left % P, right % P]
    half = FULL // 2
    for rnd in range(FULL + PARTIAL):
        s = [(s[j] + POS_RC[rnd * WIDTH + j]) % P for j in range(WIDTH)]
        if rnd < half or rnd >= half + PARTIAL:
            s = [pow(x, 5, P) for x in s]
        else:
            s[0] = pow(s[0], 5, P)
        s = [sum(MDS[i][j] * s[j] for j in range(WIDTH)) % P for i in range(WIDTH)]
    return s[0]


H2 = {"mimc": mimc_2p, "poseidon": poseidon_2p}
HP_TAG = int.from_bytes(b"AMR.hp.v1", "big")


def h_p(kind, data):
    padded = data + b"\x01"
    padded += b"\x00" * ((-len(padded)) % 31)
    s = H2[kind](0, HP_TAG)
    for off in range(0, len(padded), 31):
        s = H2[kind](s, int.from_bytes(padded[off:off + 31], "big"))
    return s


def hx(v):
    return "0x" + v.to_bytes(32, "big").hex()


K = bytes(range(32))
R = bytes(range(32, 64))
SK = bytes([0x11] * 32)

PAIRS = [(0, 0), (1, 2), (2, 1), (P - 1, 12345)]
MESSAGES = [b"", b"\x00", b"abc", bytes(range(64))]

print("# generated by tests/oracles/hash_oracle.py")
for kind in ("mimc", "poseidon"):
    for (a, b) in PAIRS:
        print("[[h2p]]")
        print(f'kind = "{kind}"')
        print(f'left = "{hx(a)}"\nright = "{hx(b)}"\ndigest = "{hx(H2[kind](a, b))}"\n')
    for m in MESSAGES:
        print("[[hp]]")
        print(f'kind = "{kind}"')
        print(f'data = "{m.hex()}"\ndigest = "{hx(h_p(kind, m))}"\n')
    print("[[note]]")
    print(f'kind = "{kind}"')
    print(f'k = "{K.hex()}"\nr = "{R.hex()}"\nsk = "{SK.hex()}"')
    print(f'commitment = "{hx(h_p(kind, b"AMR.cm" + K + R))}"')
    print(f'nullifier = "{hx(h_p(kind, b"AMR.sn" + K))}"')
    print(f'pk = "{hx(h_p(kind, b"AMR.pk" + SK))}"\n')
