# cython: language_level=3
"""Compiled pulse loops. Must stay draw-for-draw identical to ``_fallback``."""

from libc.stdint cimport uint64_t

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef double UNIT = 1.0 / 9007199254740992.0  # 2**-53


cdef inline uint64_t mix64(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline double draw(uint64_t pkey, uint64_t counter) noexcept nogil:
    return <double>(mix64(pkey + (counter + 1) * GOLDEN) >> 11) * UNIT


cdef inline int outcome(double u, double c0, double c1, double c2) noexcept nogil:
    if u < c0:
        return 0
    if u < c1:
        return 1
    if u < c2:
        return 2
    return 3


def bb84_counts(uint64_t key, long long first, long long n_packets, long long photons,
                double p_sig, double y0, double e_det):
    cdef long long signal = 0, noise = 0, sifted = 0, errors = 0, discarded = 0, idle = 0
    cdef long long p, i
    cdef uint64_t pkey, c
    cdef bint sig, noi, match
    with nogil:
        for p in range(first, first + n_packets):
            pkey = mix64(key + <uint64_t>(p + 1) * GOLDEN)
            for i in range(photons):
                c = <uint64_t>i * 6
                sig = draw(pkey, c) < p_sig
                noi = draw(pkey, c + 1) < y0
                if not sig and not noi:
                    idle += 1
                    continue
                match = (draw(pkey, c + 2) < 0.5) == (draw(pkey, c + 3) < 0.5)
                if sig:
                    signal += 1
                    if match:
                        sifted += 1
                        if draw(pkey, c + 4) < e_det:
                            errors += 1
                    else:
                        discarded += 1
                if noi:
                    noise += 1
                    if match:
                        sifted += 1
                        if draw(pkey, c + 5) < 0.5:
                            errors += 1
                    else:
                        discarded += 1
    return signal, noise, sifted, errors, discarded, idle


def sarg04_counts(uint64_t key, long long first, long long n_packets, long long photons,
                  double p_sig, double y0, double e_det):
    cdef long long signal = 0, noise = 0, conclusive = 0, errors = 0, inconclusive = 0, idle = 0
    cdef long long p, i
    cdef uint64_t pkey, c
    cdef double u
    cdef double wrong = 0.25 + e_det / 2
    with nogil:
        for p in range(first, first + n_packets):
            pkey = mix64(key + <uint64_t>(p + 1) * GOLDEN)
            for i in range(photons):
                c = <uint64_t>i * 3
                if draw(pkey, c) < p_sig:
                    signal += 1
                    u = draw(pkey, c + 2)
                    if u < 0.25:
                        conclusive += 1
                    elif u < wrong:
                        conclusive += 1
                        errors += 1
                    else:
                        inconclusive += 1
                elif draw(pkey, c + 1) < y0:
                    noise += 1
                    if draw(pkey, c + 2) < 0.25:
                        conclusive += 1
                        errors += 1
                    else:
                        inconclusive += 1
                else:
                    idle += 1
    return signal, noise, conclusive, errors, inconclusive, idle


def bbm92_counts(uint64_t key, long long first, long long n_packets, long long photons,
                 double p_a, double p_b, double y0, double e_det,
                 double hv0, double hv1, double hv2, double da0, double da1, double da2):
    cdef long long coinc = 0, sifted_hv = 0, errors_hv = 0, sifted_da = 0, errors_da = 0
    cdef long long discarded = 0, idle = 0, true_da = 0, same_da = 0
    cdef long long p, i, n_pairs, n_err
    cdef uint64_t pkey, c
    cdef bint sa, sb, na, nb, diag, wrong
    cdef int k
    with nogil:
        for p in range(first, first + n_packets):
            pkey = mix64(key + <uint64_t>(p + 1) * GOLDEN)
            for i in range(photons):
                c = <uint64_t>i * 11
                sa = draw(pkey, c) < p_a
                sb = draw(pkey, c + 1) < p_b
                na = draw(pkey, c + 2) < y0
                nb = draw(pkey, c + 3) < y0
                n_pairs = (sa and sb) + (sa and nb) + (na and sb) + (na and nb)
                if n_pairs == 0:
                    idle += 1
                    continue
                coinc += n_pairs
                diag = draw(pkey, c + 4) < 0.5
                if diag != (draw(pkey, c + 5) < 0.5):
                    discarded += n_pairs
                    continue
                n_err = 0
                if sa and sb:
                    if diag:
                        k = outcome(draw(pkey, c + 6), da0, da1, da2)
                    else:
                        k = outcome(draw(pkey, c + 6), hv0, hv1, hv2)
                    wrong = k == 1 or k == 2
                    if diag:
                        true_da += 1
                        same_da += not wrong
                    if draw(pkey, c + 7) < e_det:
                        wrong = not wrong
                    n_err += wrong
                if sa and nb:
                    n_err += draw(pkey, c + 8) < 0.5
                if na and sb:
                    n_err += draw(pkey, c + 9) < 0.5
                if na and nb:
                    n_err += draw(pkey, c + 10) < 0.5
                if diag:
                    sifted_da += n_pairs
                    errors_da += n_err
                else:
                    sifted_hv += n_pairs
                    errors_hv += n_err
    return coinc, sifted_hv, errors_hv, sifted_da, errors_da, discarded, idle, true_da, same_da
