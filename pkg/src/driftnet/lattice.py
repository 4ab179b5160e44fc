"""Pure and diluted lattice models.

The bounding walls live on integer heights of the parity opposite to the
eligible sites of their column, so the interval (B_i, A_i) always contains
exactly (A_i - B_i)/2 eligible sites.  Columns are advanced by the
parity-aware recursion: half-gap variables measured in site units, with a
fair tie-break bit whenever the candidate midpoint lands on an eligible
site of the next column.

Also provides the closed-form law of the pure-lattice maximal path length,
evaluated in log space so the sqrt(pi) tail regime (n up to 1e8) is
reachable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .fields import ScaledField, constant_profile
from .realization import LatticeRealization
from .records import RunRecord
from .rngcore import Stream, replica_stream


def check_ell(ell: int) -> int:
    ell = int(ell)
    if ell <= 0 or ell % 2 != 0 or (ell // 2) % 2 != 1:
        raise ValueError("ell/2 must be a positive odd integer")
    return ell


@dataclass
class LatticeWalkState:
    i: int
    A: int
    B: int
    T_acc: float = 0.0
    T_prime: float = 0.0
    tau_prime: int | None = None


@dataclass
class LatticeColumnStep:
    """Half-gap variables (site units) and interior occupancy of one column."""

    gap_x_up: int       # X-bar: first occupied above A
    gap_x_down: int     # X-underbar: A to topmost occupied <= A
    gap_y_up: int       # Y-bar: B to bottommost occupied >= B
    gap_y_down: int     # Y-underbar: first occupied below B
    count: int
    traffic_increment: float


def _update_wall(pos: int, up: int, down: int, tie_bit) -> int:
    """One wall update: pos + (up - down), with the +-1 tie-break correction
    when the increment is even.  tie_bit is called lazily with the candidate
    midpoint height."""
    d = up - down
    if d % 2 != 0:
        return pos + d
    bit = tie_bit(pos + d)
    return pos + d + (1 if bit == 0 else -1)


class _SampledColumns:
    """Fresh-field column source: site-by-site Bernoulli occupancy (exact for
    vertically inhomogeneous thinning) and stream tie bits."""

    def __init__(self, p: ScaledField, mu: ScaledField, rng: Stream):
        self.p = p
        self.mu = mu
        self.rng = rng

    def column(self, st: LatticeWalkState):
        i, A, B = st.i, st.A, st.B
        occupied = [y for y in range(B + 1, A, 2) if self.rng.bernoulli(self.p.eval(i, y))]
        y = A + 1
        while not self.rng.bernoulli(self.p.eval(i, y)):
            y += 2
        gap_x_up = (y - A + 1) // 2
        y = B - 1
        while not self.rng.bernoulli(self.p.eval(i, y)):
            y -= 2
        gap_y_down = (B - y + 1) // 2
        if occupied:
            gap_x_down = (A - occupied[-1] + 1) // 2
            gap_y_up = (occupied[0] - B + 1) // 2
        else:
            gap_x_down = gap_y_down + (A - B) // 2   # topmost <= A is below B
            gap_y_up = gap_x_up + (A - B) // 2       # bottommost >= B is above A
        traffic = sum(self.mu.eval(i, y) for y in occupied)
        return LatticeColumnStep(gap_x_up, gap_x_down, gap_y_up, gap_y_down,
                                 len(occupied), traffic)

    def tie_bit(self, i: int, y: int) -> int:
        return self.rng.u64() & 1


class _RealizedColumns:
    """Column source reading occupancy and tie bits off a shared realization."""

    def __init__(self, real: LatticeRealization, mu: ScaledField):
        self.real = real
        self.mu = mu

    def column(self, st: LatticeWalkState):
        i, A, B = st.i, st.A, st.B
        occupied = self.real.occupied_in(i, B + 1, A - 1)
        up = self.real.first_occupied_above(i, A)
        gap_x_up = (up - A + 1) // 2
        down = self.real.first_occupied_below(i, B)
        gap_y_down = (B - down + 1) // 2
        if occupied:
            gap_x_down = (A - occupied[-1] + 1) // 2
            gap_y_up = (occupied[0] - B + 1) // 2
        else:
            gap_x_down = (A - down + 1) // 2
            gap_y_up = (up - B + 1) // 2
        traffic = sum(self.mu.eval(i, y) for y in occupied)
        return LatticeColumnStep(gap_x_up, gap_x_down, gap_y_up, gap_y_down,
                                 len(occupied), traffic)

    def tie_bit(self, i: int, y: int) -> int:
        return self.real.xi(i, y)


def _run(ell: int, max_steps: int, seed_id: int, source) -> RunRecord:
    ell = check_ell(ell)
    if max_steps < 1:
        raise ValueError("max_steps must be >= 1")
    st = LatticeWalkState(i=0, A=ell // 2, B=-(ell // 2))
    tau = None
    for _ in range(max_steps):
        step = source.column(st)
        if step.count <= 1 and st.tau_prime is None:
            st.tau_prime = st.i
            st.T_prime = st.T_acc
        if step.count == 0:
            tau = st.i
            break
        st.T_acc += step.traffic_increment
        nxt = st.i + 1
        st.A = _update_wall(st.A, step.gap_x_up, step.gap_x_down,
                            lambda y: source.tie_bit(nxt, y))
        st.B = _update_wall(st.B, step.gap_y_up, step.gap_y_down,
                            lambda y: source.tie_bit(nxt, y))
        st.i = nxt
    steps_used = st.i if tau is None else tau
    return RunRecord(tau=tau, tau_prime=st.tau_prime, T=st.T_acc,
                     T_prime=st.T_prime if st.tau_prime is not None else st.T_acc,
                     steps_used=steps_used, seed_id=seed_id)


def run_diluted(ell: int, p: ScaledField, mu: ScaledField, max_steps: int,
                rng: Stream, seed_id: int = 0) -> RunRecord:
    """Simulate one diluted-lattice replica by sampling the thinning field."""
    return _run(ell, max_steps, seed_id, _SampledColumns(p, mu, rng))


def run_diluted_realized(ell: int, real: LatticeRealization, mu: ScaledField,
                         max_steps: int, seed_id: int = 0) -> RunRecord:
    """Same walk driven by a shared occupancy/choice realization."""
    return _run(ell, max_steps, seed_id, _RealizedColumns(real, mu))


def run_pure(ell: int, mu: ScaledField, max_steps: int, rng: Stream,
             seed_id: int = 0) -> RunRecord:
    """Pure lattice: the p == 1 specialization of the diluted recursion."""
    ell = check_ell(ell)
    p_one = ScaledField(constant_profile(1.0), ell=float(ell))
    return run_diluted(ell, p_one, mu, max_steps, rng, seed_id=seed_id)


def run_diluted_replica(ell: int, p: ScaledField, mu: ScaledField,
                        max_steps: int, master_seed: int, replica: int) -> RunRecord:
    return run_diluted(ell, p, mu, max_steps,
                       replica_stream(master_seed, replica), seed_id=replica)


# ---------------------------------------------------------------------------
# Exact law of the pure-lattice maximal path length
# ---------------------------------------------------------------------------

_LOG4 = math.log(4.0)


def exact_tau_pmf(ell: int, n: int) -> float:
    """P(tau = n) for the pure lattice: (ell/2n) C(2n, n + ell/2) / 4^n."""
    ell = check_ell(ell)
    if n < 1:
        raise ValueError("n must be >= 1")
    h = ell // 2
    if h > n:
        return 0.0
    log_binom = gammaln(2 * n + 1) - gammaln(n + h + 1) - gammaln(n - h + 1)
    return math.exp(math.log(ell / (2.0 * n)) + log_binom - n * _LOG4)


def exact_tau_pmf_array(ell: int, n_max: int) -> np.ndarray:
    """Vectorized pmf for n = 1 .. n_max (index 0 holds n=1)."""
    ell = check_ell(ell)
    h = ell // 2
    n = np.arange(1, n_max + 1, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        logp = (np.log(ell / (2.0 * n))
                + gammaln(2 * n + 1) - gammaln(n + h + 1) - gammaln(n - h + 1)
                - n * _LOG4)
    pmf = np.where(n >= h, np.exp(logp), 0.0)
    return pmf


def exact_tau_tail(ell: int, n: int) -> float:
    """P(tau >= n), by compensated summation of the pmf below n."""
    ell = check_ell(ell)
    if n < 1:
        raise ValueError("n must be >= 1")
    if n == 1:
        return 1.0
    pmf = exact_tau_pmf_array(ell, n - 1)
    return 1.0 - math.fsum(pmf.tolist())
