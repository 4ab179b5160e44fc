"""Numba batch kernels for the vertically homogeneous fast paths.

Each replica owns a key derived from (master seed, purpose, replica index)
and consumes its own SplitMix64 stream, so results are bit-identical for any
thread count or schedule.  The uint64 primitives mirror rngcore.py exactly
(asserted in tests).

Per-column field values are passed as precomputed arrays, which covers
horizontal (x1) inhomogeneity; vertical inhomogeneity goes through the exact
Python path instead.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit, prange

U64 = np.uint64
_GAMMA = U64(0x9E3779B97F4A7C15)
_DERIVE_SALT = U64(0xA5A5A5A55A5A5A5A)

# purpose tags separating the engine's key spaces
PURPOSE_SIMULATE = 1
PURPOSE_LIMIT = 2
PURPOSE_LIMIT_TIMECHANGED = 3


@njit(cache=True, inline="always")
def _mix64(z):
    z ^= z >> U64(30)
    z = z * U64(0xBF58476D1CE4E5B9)
    z ^= z >> U64(27)
    z = z * U64(0x94D049BB133111EB)
    z ^= z >> U64(31)
    return z


@njit(cache=True, inline="always")
def _derive(key, n):
    return _mix64((key ^ _DERIVE_SALT) + U64(n) * _GAMMA)


@njit(cache=True, inline="always")
def _nxt(state):
    s = state + _GAMMA
    return _mix64(s), s


@njit(cache=True, inline="always")
def _u01(state):
    x, state = _nxt(state)
    return ((x >> U64(11)) + 0.5) * 2.0**-53, state


@njit(cache=True, inline="always")
def _exp1(state):
    u, state = _u01(state)
    return -math.log(u), state


@njit(cache=True, inline="always")
def _normal(state):
    u1, state = _u01(state)
    u2, state = _u01(state)
    return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2), state


@njit(cache=True, inline="always")
def _bit(state):
    x, state = _nxt(state)
    return np.int64(x & U64(1)), state


@njit(cache=True, inline="always")
def _geometric(state, p):
    if p >= 1.0:
        _, state = _nxt(state)
        return np.int64(1), state
    u, state = _u01(state)
    k = np.int64(math.floor(math.log(u) / math.log1p(-p))) + 1
    if k < 1:
        k = np.int64(1)
    return k, state


@njit(cache=True, inline="always")
def _trunc_geometric(state, p, n):
    # Geometric(p) conditioned on <= n
    if p >= 1.0:
        _, state = _nxt(state)
        return np.int64(1), state
    u, state = _u01(state)
    q = -math.expm1(n * math.log1p(-p))
    k = np.int64(math.floor(math.log1p(-u * q) / math.log1p(-p))) + 1
    if k < 1:
        k = np.int64(1)
    if k > n:
        k = np.int64(n)
    return k, state


@njit(cache=True)
def _poisson(state, mean):
    """Exact Poisson: Knuth product method below 10, PTRS rejection above."""
    if mean <= 0.0:
        return np.int64(0), state
    if mean < 10.0:
        enlam = math.exp(-mean)
        k = np.int64(0)
        prod = 1.0
        while True:
            u, state = _u01(state)
            prod *= u
            if prod <= enlam:
                return k, state
            k += 1
    slam = math.sqrt(mean)
    loglam = math.log(mean)
    b = 0.931 + 2.53 * slam
    a = -0.059 + 0.02483 * b
    invalpha = 1.1239 + 1.1328 / (b - 3.4)
    vr = 0.9277 - 3.6224 / (b - 2.0)
    while True:
        u, state = _u01(state)
        u -= 0.5
        v, state = _u01(state)
        us = 0.5 - abs(u)
        k = np.int64(math.floor((2.0 * a / us + b) * u + mean + 0.43))
        if us >= 0.07 and v <= vr:
            return k, state
        if k < 0 or (us < 0.013 and v > us):
            continue
        if (math.log(v) + math.log(invalpha) - math.log(a / (us * us) + b)
                <= -mean + k * loglam - math.lgamma(k + 1.0)):
            return k, state


@njit(cache=True, inline="always")
def _binom_logpmf(k, n, logp, log1mp, lgn1):
    kk = float(k)
    return (lgn1 - math.lgamma(kk + 1.0) - math.lgamma(n - kk + 1.0)
            + kk * logp + (n - kk) * log1mp)


@njit(cache=True)
def _binomial(state, n, p):
    """Exact Binomial(n, p): inversion below n*min(p,q) = 10, else Hormann's
    BTRD transformed rejection with an exact log-pmf acceptance test."""
    if n <= 0 or p <= 0.0:
        return np.int64(0), state
    if p >= 1.0:
        return np.int64(n), state
    flipped = p > 0.5
    pp = 1.0 - p if flipped else p
    if n * pp < 10.0:
        # BINV inversion
        q = 1.0 - pp
        s = pp / q
        aa = (n + 1.0) * s
        while True:
            r = math.exp(n * math.log(q))
            u, state = _u01(state)
            x = np.int64(0)
            ok = True
            while u > r:
                u -= r
                x += 1
                if x > n + 10:
                    ok = False
                    break
                r *= (aa / x - s)
            if ok:
                return (np.int64(n) - x if flipped else x), state
    # BTRS (Hormann), exact log-pmf acceptance
    q = 1.0 - pp
    fn = float(n)
    stddev = math.sqrt(fn * pp * q)
    m = np.int64(math.floor((fn + 1.0) * pp))
    b = 1.15 + 2.53 * stddev
    a = -0.0873 + 0.0248 * b + 0.01 * pp
    c = fn * pp + 0.5
    alpha = (2.83 + 5.1 / b) * stddev
    vr = 0.92 - 4.2 / b
    logp = math.log(pp)
    log1mp = math.log(q)
    lgn1 = math.lgamma(fn + 1.0)
    lpm = _binom_logpmf(m, fn, logp, log1mp, lgn1)
    while True:
        u, state = _u01(state)
        u -= 0.5
        v, state = _u01(state)
        us = 0.5 - abs(u)
        k = np.int64(math.floor((2.0 * a / us + b) * u + c))
        if us >= 0.07 and v <= vr:
            return (np.int64(n) - k if flipped else k), state
        if k < 0 or k > n:
            continue
        lv = math.log(v * alpha / (a / (us * us) + b))
        if lv <= _binom_logpmf(k, fn, logp, log1mp, lgn1) - lpm:
            return (np.int64(n) - k if flipped else k), state


@njit(cache=True, inline="always")
def _replica_state(master, purpose, replica):
    key = _mix64(U64(master))
    key = _derive(key, purpose)
    key = _derive(key, replica)
    return key


# ---------------------------------------------------------------------------
# batch simulators (results per replica; tau = -1 encodes censoring)
# ---------------------------------------------------------------------------


@njit(cache=True, parallel=True)
def pure_lattice_batch(master, n_rep, ell, mu_cols, max_steps,
                       tau, tau_p, T, T_p, steps):
    for r in prange(n_rep):
        state = _replica_state(master, PURPOSE_SIMULATE, r)
        A = np.int64(ell // 2)
        B = -A
        t_acc = 0.0
        t_pr = 0.0
        tp = np.int64(-1)
        tt = np.int64(-1)
        i = np.int64(0)
        while i < max_steps:
            n_in = (A - B) // 2
            if n_in <= 1 and tp < 0:
                tp = i
                t_pr = t_acc
            if n_in == 0:
                tt = i
                break
            t_acc += n_in * mu_cols[i]
            bA, state = _bit(state)
            bB, state = _bit(state)
            A += 1 if bA == 0 else -1
            B += 1 if bB == 0 else -1
            i += 1
        tau[r] = tt
        tau_p[r] = tp
        T[r] = t_acc
        T_p[r] = t_pr if tp >= 0 else t_acc
        steps[r] = i if tt < 0 else tt


@njit(cache=True, parallel=True)
def diluted_lattice_batch(master, n_rep, ell, p_cols, mu_cols, max_steps,
                          tau, tau_p, T, T_p, steps):
    for r in prange(n_rep):
        state = _replica_state(master, PURPOSE_SIMULATE, r)
        A = np.int64(ell // 2)
        B = -A
        t_acc = 0.0
        t_pr = 0.0
        tp = np.int64(-1)
        tt = np.int64(-1)
        i = np.int64(0)
        while i < max_steps:
            p = p_cols[i]
            n_in = (A - B) // 2
            u, state = _u01(state)
            if n_in == 0 or u < math.exp(n_in * math.log1p(-p)):
                # interior empty
                if tp < 0:
                    tp = i
                    t_pr = t_acc
                tt = i
                break
            # topmost occupied interior site: distance k from A
            k, state = _trunc_geometric(state, p, n_in)
            m = n_in - k
            if m == 0:
                count = np.int64(1)
                j = np.int64(1)
            else:
                u2, state = _u01(state)
                if u2 < math.exp(m * math.log1p(-p)):
                    count = np.int64(1)
                    j = np.int64(n_in - k + 1)
                else:
                    j, state = _trunc_geometric(state, p, m)
                    mid, state = _binomial(state, np.int64(n_in - k - j), p)
                    count = np.int64(2) + mid
            if count <= 1 and tp < 0:
                tp = i
                t_pr = t_acc
            t_acc += count * mu_cols[i]
            gU, state = _geometric(state, p)   # X-bar
            gL, state = _geometric(state, p)   # Y-underbar
            dA = gU - k
            if dA % 2 != 0:
                A += dA
            else:
                bA, state = _bit(state)
                A += dA + (1 if bA == 0 else -1)
            dB = j - gL
            if dB % 2 != 0:
                B += dB
            else:
                bB, state = _bit(state)
                B += dB + (1 if bB == 0 else -1)
            i += 1
        tau[r] = tt
        tau_p[r] = tp
        T[r] = t_acc
        T_p[r] = t_pr if tp >= 0 else t_acc
        steps[r] = i if tt < 0 else tt


@njit(cache=True, parallel=True)
def semilattice_batch(master, n_rep, ell, lam_cols, mu_cols, max_steps,
                      tau, tau_p, T, T_p, steps):
    for r in prange(n_rep):
        state = _replica_state(master, PURPOSE_SIMULATE, r)
        A = ell / 2.0
        B = -ell / 2.0
        t_acc = 0.0
        t_pr = 0.0
        tp = np.int64(-1)
        tt = np.int64(-1)
        i = np.int64(0)
        while i < max_steps:
            lam = lam_cols[i]
            w = A - B
            count, state = _poisson(state, lam * w)
            if count <= 1 and tp < 0:
                tp = i
                t_pr = t_acc
            if count == 0:
                tt = i
                break
            t_acc += count * mu_cols[i]
            e1, state = _exp1(state)
            e2, state = _exp1(state)
            gap_up = e1 / lam
            gap_dn = e2 / lam
            u, state = _u01(state)
            top = B + w * u ** (1.0 / count)
            if count == 1:
                bot = top
            else:
                u2, state = _u01(state)
                bot = B + (top - B) * (1.0 - u2 ** (1.0 / (count - 1)))
            A = A + 0.5 * (gap_up - (A - top))
            B = B + 0.5 * ((bot - B) - gap_dn)
            i += 1
        tau[r] = tt
        tau_p[r] = tp
        T[r] = t_acc
        T_p[r] = t_pr if tp >= 0 else t_acc
        steps[r] = i if tt < 0 else tt


# ---------------------------------------------------------------------------
# Euler-Maruyama sampler for the limiting pair
# ---------------------------------------------------------------------------


@njit(cache=True, parallel=True)
def em_pair_batch(master, purpose, n_rep, sigma_grid, weight_grid, dt,
                  theta, integral):
    """Simulate Y_t = 1 + int sigma dB to absorption at 0; accumulate the
    weighted area by trapezoid.  theta = nan when the horizon is reached.
    sigma_grid/weight_grid are evaluated at t_k = k*dt (len = n_steps + 1)."""
    n_steps = sigma_grid.shape[0] - 1
    sqdt = math.sqrt(dt)
    for r in prange(n_rep):
        state = _replica_state(master, purpose, r)
        y = 1.0
        integ = 0.0
        th = math.nan
        for k in range(n_steps):
            z, state = _normal(state)
            y2 = y + sigma_grid[k] * sqdt * z
            if y2 <= 0.0:
                frac = y / (y - y2)
                th = (k + frac) * dt
                integ += 0.5 * weight_grid[k] * y * frac * dt
                break
            integ += 0.5 * (weight_grid[k] * y + weight_grid[k + 1] * y2) * dt
            y = y2
        theta[r] = th
        integral[r] = integ


# ---------------------------------------------------------------------------
# distribution draws exposed for tests (chi-square cross-checks vs scipy)
# ---------------------------------------------------------------------------


@njit(cache=True)
def poisson_draws(key, mean, n):
    out = np.empty(n, dtype=np.int64)
    state = U64(key)
    for i in range(n):
        out[i], state = _poisson(state, mean)
    return out


@njit(cache=True)
def binomial_draws(key, size, p, n):
    out = np.empty(n, dtype=np.int64)
    state = U64(key)
    for i in range(n):
        out[i], state = _binomial(state, np.int64(size), p)
    return out


@njit(cache=True)
def geometric_draws(key, p, n):
    out = np.empty(n, dtype=np.int64)
    state = U64(key)
    for i in range(n):
        out[i], state = _geometric(state, p)
    return out


@njit(cache=True)
def raw_stream(key, n):
    out = np.empty(n, dtype=np.uint64)
    state = U64(key)
    for i in range(n):
        out[i], state = _nxt(state)
    return out
