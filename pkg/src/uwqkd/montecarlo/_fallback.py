"""numpy implementation of the pulse loops in ``_kernels.pyx``.

Draws are generated a block of packets at a time and the decisions are made
with boolean array arithmetic. The counts match the compiled kernels exactly.
"""

from __future__ import annotations

import numpy as np

from .rng import packet_keys_array, uniforms_array

# cap on uniforms held in memory per block
_BLOCK_DRAWS = 1 << 21


def _blocks(key: int, first: int, n_packets: int, photons: int, per_pulse: int):
    per_packet = photons * per_pulse
    step = max(1, _BLOCK_DRAWS // per_packet)
    for start in range(first, first + n_packets, step):
        count = min(step, first + n_packets - start)
        pkeys = packet_keys_array(key, start, count)
        yield uniforms_array(pkeys, per_packet).reshape(-1, per_pulse)


def bb84_counts(key, first, n_packets, photons, p_sig, y0, e_det):
    totals = np.zeros(6, dtype=np.int64)
    for u in _blocks(key, first, n_packets, photons, 6):
        sig = u[:, 0] < p_sig
        noi = u[:, 1] < y0
        match = (u[:, 2] < 0.5) == (u[:, 3] < 0.5)
        sig_kept = sig & match
        noi_kept = noi & match
        totals += (
            np.count_nonzero(sig),
            np.count_nonzero(noi),
            np.count_nonzero(sig_kept) + np.count_nonzero(noi_kept),
            np.count_nonzero(sig_kept & (u[:, 4] < e_det))
            + np.count_nonzero(noi_kept & (u[:, 5] < 0.5)),
            np.count_nonzero(sig & ~match) + np.count_nonzero(noi & ~match),
            np.count_nonzero(~sig & ~noi),
        )
    return tuple(int(t) for t in totals)


def sarg04_counts(key, first, n_packets, photons, p_sig, y0, e_det):
    totals = np.zeros(6, dtype=np.int64)
    wrong = 0.25 + e_det / 2
    for u in _blocks(key, first, n_packets, photons, 3):
        sig = u[:, 0] < p_sig
        noi = ~sig & (u[:, 1] < y0)
        v = u[:, 2]
        sig_right = sig & (v < 0.25)
        sig_wrong = sig & (v >= 0.25) & (v < wrong)
        noi_conc = noi & (v < 0.25)
        n_sig, n_noi = np.count_nonzero(sig), np.count_nonzero(noi)
        conclusive = (np.count_nonzero(sig_right) + np.count_nonzero(sig_wrong)
                      + np.count_nonzero(noi_conc))
        totals += (
            n_sig,
            n_noi,
            conclusive,
            np.count_nonzero(sig_wrong) + np.count_nonzero(noi_conc),
            n_sig + n_noi - conclusive,
            len(u) - n_sig - n_noi,
        )
    return tuple(int(t) for t in totals)


def _outcome(u: np.ndarray, c0: float, c1: float, c2: float) -> np.ndarray:
    return (u >= c0).astype(np.int8) + (u >= c1) + (u >= c2)


def bbm92_counts(key, first, n_packets, photons, p_a, p_b, y0, e_det,
                 hv0, hv1, hv2, da0, da1, da2):
    totals = np.zeros(9, dtype=np.int64)
    for u in _blocks(key, first, n_packets, photons, 11):
        sa, sb = u[:, 0] < p_a, u[:, 1] < p_b
        na, nb = u[:, 2] < y0, u[:, 3] < y0
        true_pair = sa & sb
        pairs = (true_pair.astype(np.int64) + (sa & nb) + (na & sb) + (na & nb))
        diag = u[:, 4] < 0.5
        match = diag == (u[:, 5] < 0.5)

        k = np.where(diag, _outcome(u[:, 6], da0, da1, da2), _outcome(u[:, 6], hv0, hv1, hv2))
        channel_wrong = (k == 1) | (k == 2)
        wrong = channel_wrong ^ (u[:, 7] < e_det)
        errs = ((true_pair & wrong).astype(np.int64)
                + (sa & nb & (u[:, 8] < 0.5))
                + (na & sb & (u[:, 9] < 0.5))
                + (na & nb & (u[:, 10] < 0.5)))

        kept_hv = match & ~diag
        kept_da = match & diag
        true_da = true_pair & kept_da
        totals += (
            pairs.sum(),
            pairs[kept_hv].sum(),
            errs[kept_hv].sum(),
            pairs[kept_da].sum(),
            errs[kept_da].sum(),
            pairs[~match].sum(),
            np.count_nonzero(pairs == 0),
            np.count_nonzero(true_da),
            np.count_nonzero(true_da & ~channel_wrong),
        )
    return tuple(int(t) for t in totals)
