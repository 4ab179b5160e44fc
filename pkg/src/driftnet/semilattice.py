"""Bounding-walk simulation of the semi-lattice model.

The pair of boundary processes (A_i, B_i) starts at (+ell/2, -ell/2) and is
advanced one column at a time.  Each column only needs: the interior points
of [B, A], the first point above A and the first point below B.  Those live
in disjoint regions of an independent Poisson column, so they can be sampled
jointly and exactly in O(count) work, or read off a shared realization for
per-seed coupling checks against the network oracle.

This module is the exact reference path (works for vertically inhomogeneous
intensities); kernels.py holds the fast batch path for vertically
homogeneous profiles.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .fields import ScaledField
from .realization import SemiRealization
from .records import RunRecord
from .rngcore import Stream, replica_stream


@dataclass
class WalkState:
    i: int
    A: float
    B: float
    T_acc: float = 0.0
    T_prime: float = 0.0
    tau_prime: int | None = None
    merged: bool = False


@dataclass
class ColumnStep:
    """Everything the recursion consumes from one fresh column."""

    gap_above: float            # first point above A, minus A
    gap_below: float            # B minus first point below B
    interior_points: list[float] = field(default_factory=list)
    traffic_increment: float = 0.0

    @property
    def count(self) -> int:
        return len(self.interior_points)


def sample_column(state: WalkState, lam: ScaledField, mu: ScaledField,
                  rng: Stream) -> ColumnStep:
    """Jointly exact draw of one fresh column restricted to [B, A] and the
    two one-sided gaps.

    Interior: Poisson count with the column's vertical mass on [B, A],
    positions by inversion of the cumulative mass.  Gaps: a unit-exponential
    mass is inverted through the cumulative intensity above A (below B),
    which reduces to Exponential(lambda) in the homogeneous case.
    """
    i, A, B = state.i, state.A, state.B
    mass = lam.vertical_mass(i, B, A)
    count = rng.poisson(mass)
    targets = sorted(rng.uniform() * mass for _ in range(count))
    pts = [B + lam.mass_inverse(i, B, t, +1) for t in targets]
    gap_above = lam.mass_inverse(i, A, rng.exponential(), +1)
    gap_below = lam.mass_inverse(i, B, rng.exponential(), -1)
    traffic = sum(mu.eval(i, y) for y in pts)
    return ColumnStep(gap_above=gap_above, gap_below=gap_below,
                      interior_points=pts, traffic_increment=traffic)


def column_from_realization(state: WalkState, real: SemiRealization,
                            mu: ScaledField) -> ColumnStep:
    """Read the same quantities off a shared realization instead of sampling."""
    col = real.column(state.i)
    pts = col.points_in(state.B, state.A)
    gap_above = col.first_above(state.A) - state.A
    gap_below = state.B - col.first_below(state.B)
    traffic = sum(mu.eval(state.i, y) for y in pts)
    return ColumnStep(gap_above=gap_above, gap_below=gap_below,
                      interior_points=pts, traffic_increment=traffic)


def apply_column(state: WalkState, step: ColumnStep) -> WalkState:
    """Advance (A, B) by one column using the boundary recursion."""
    A, B = state.A, state.B
    upper_above = A + step.gap_above
    lower_below = B - step.gap_below
    if step.count:
        upper_below = step.interior_points[-1]   # topmost interior point
        lower_above = step.interior_points[0]    # bottommost interior point
    else:
        upper_below = lower_below
        lower_above = upper_above
    state.A = 0.5 * (upper_above + upper_below)
    state.B = 0.5 * (lower_above + lower_below)
    state.i += 1
    return state


def _run(ell: float, mu: ScaledField, max_steps: int, seed_id: int,
         next_column) -> RunRecord:
    if ell <= 0:
        raise ValueError("ell must be positive")
    if max_steps < 1:
        raise ValueError("max_steps must be >= 1")
    state = WalkState(i=0, A=ell / 2.0, B=-ell / 2.0)
    tau = None
    for _ in range(max_steps):
        step = next_column(state)
        if step.count <= 1 and state.tau_prime is None:
            state.tau_prime = state.i
            state.T_prime = state.T_acc
        if step.count == 0:
            tau = state.i
            break
        state.T_acc += step.traffic_increment
        apply_column(state, step)
    steps_used = state.i if tau is None else tau
    return RunRecord(tau=tau, tau_prime=state.tau_prime,
                     T=state.T_acc, T_prime=state.T_prime if state.tau_prime is not None else state.T_acc,
                     steps_used=steps_used, seed_id=seed_id)


def run_semilattice(ell: float, lam: ScaledField, mu: ScaledField,
                    max_steps: int, rng: Stream, seed_id: int = 0) -> RunRecord:
    """Simulate (tau, tau', T, T') for one replica by sampling fresh columns."""
    return _run(ell, mu, max_steps, seed_id,
                lambda st: sample_column(st, lam, mu, rng))


def run_semilattice_realized(ell: float, real: SemiRealization, mu: ScaledField,
                             max_steps: int, seed_id: int = 0) -> RunRecord:
    """Same walk, driven by a shared realization (for oracle coupling)."""
    return _run(ell, mu, max_steps, seed_id,
                lambda st: column_from_realization(st, real, mu))


def run_semilattice_replica(ell: float, lam: ScaledField, mu: ScaledField,
                            max_steps: int, master_seed: int, replica: int) -> RunRecord:
    """Replica entry point with the engine's (master seed, replica) stream contract."""
    return run_semilattice(ell, lam, mu, max_steps,
                           replica_stream(master_seed, replica), seed_id=replica)
