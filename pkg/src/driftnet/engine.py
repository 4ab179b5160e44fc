"""Batch simulation dispatcher.

Chooses between the compiled batch kernels (vertically homogeneous profiles;
per-column scalar field values suffice and are precomputed once) and the
exact per-replica Python path (arbitrary profiles, shared realizations).
Both honor the same determinism contract: results depend on (master seed,
replica index) only, never on thread count or batch partitioning.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .fields import EnvironmentProfile, Family, ScaledField
from .lattice import check_ell, run_diluted, run_pure
from .limits import ModelKind
from .records import RunRecord
from .rngcore import replica_stream
from .semilattice import run_semilattice


@dataclass
class BatchResult:
    """Replica outcomes as flat arrays; tau == -1 encodes censoring."""

    ell: float
    max_steps: int
    tau: np.ndarray
    tau_prime: np.ndarray
    T: np.ndarray
    T_prime: np.ndarray
    steps: np.ndarray

    @property
    def n(self) -> int:
        return self.tau.shape[0]

    @property
    def censored(self) -> np.ndarray:
        return self.tau < 0

    @property
    def censor_rate(self) -> float:
        return float(self.censored.mean()) if self.n else 0.0

    def record(self, r: int) -> RunRecord:
        t = int(self.tau[r])
        tp = int(self.tau_prime[r])
        return RunRecord(tau=None if t < 0 else t,
                         tau_prime=None if tp < 0 else tp,
                         T=float(self.T[r]), T_prime=float(self.T_prime[r]),
                         steps_used=int(self.steps[r]), seed_id=r)

    def tau_rescaled(self) -> tuple[np.ndarray, np.ndarray, float]:
        """(values, censored mask, censor threshold) of tau / ell^2."""
        vals = np.where(self.censored, self.max_steps, self.tau) / self.ell**2
        return vals, self.censored.copy(), self.max_steps / self.ell**2

    def T_rescaled(self) -> np.ndarray:
        return self.T / self.ell**3


def set_threads(n: int | None) -> None:
    if n is not None and n > 0:
        import numba

        numba.set_num_threads(n)


def column_values(field: ScaledField, n_cols: int) -> np.ndarray:
    if field.profile.kind is Family.CONSTANT:
        return np.full(n_cols, field.profile.params["c"])
    return np.array([field.column_value(i) for i in range(n_cols)])


def default_max_steps(ell: float) -> int:
    return int(50 * ell * ell)


def simulate_batch(model: ModelKind, ell: float, main_profile: EnvironmentProfile,
                   mu_profile: EnvironmentProfile, n_replicas: int, max_steps: int,
                   master_seed: int, anchor: tuple[float, float] = (0.0, 0.0),
                   threads: int | None = None, method: str = "auto") -> BatchResult:
    """Simulate n_replicas bounding walks of `model` at scale ell.

    main_profile is the intensity (semi-lattice) or thinning probability
    (lattice models); method is "fast" (compiled kernels), "reference"
    (exact Python path), or "auto".
    """
    if n_replicas < 0:
        raise ValueError("n_replicas must be nonnegative")
    if max_steps < 1:
        raise ValueError("max_steps must be >= 1")
    if model in (ModelKind.PURE_LATTICE, ModelKind.DILUTED_LATTICE):
        ell = check_ell(int(ell))
    homogeneous = main_profile.vertically_homogeneous and mu_profile.vertically_homogeneous
    if method == "auto":
        method = "fast" if homogeneous else "reference"
    if method == "fast" and not homogeneous:
        raise ValueError("fast path requires vertically homogeneous profiles")
    if method not in ("fast", "reference"):
        raise ValueError(f"unknown method {method!r}")

    main = ScaledField(main_profile, ell=float(ell), anchor=anchor)
    mu = ScaledField(mu_profile, ell=float(ell), anchor=anchor)

    if method == "reference":
        return _reference_batch(model, ell, main, mu, n_replicas, max_steps, master_seed)

    set_threads(threads)
    mu_cols = column_values(mu, max_steps)
    tau = np.empty(n_replicas, dtype=np.int64)
    tau_p = np.empty(n_replicas, dtype=np.int64)
    T = np.empty(n_replicas)
    T_p = np.empty(n_replicas)
    steps = np.empty(n_replicas, dtype=np.int64)
    seed = np.uint64(master_seed)
    if model is ModelKind.SEMI_LATTICE:
        lam_cols = column_values(main, max_steps)
        kernels.semilattice_batch(seed, n_replicas, float(ell), lam_cols, mu_cols,
                                  max_steps, tau, tau_p, T, T_p, steps)
    elif model is ModelKind.DILUTED_LATTICE:
        p_cols = column_values(main, max_steps)
        kernels.diluted_lattice_batch(seed, n_replicas, int(ell), p_cols, mu_cols,
                                      max_steps, tau, tau_p, T, T_p, steps)
    else:
        kernels.pure_lattice_batch(seed, n_replicas, int(ell), mu_cols,
                                   max_steps, tau, tau_p, T, T_p, steps)
    return BatchResult(ell=float(ell), max_steps=max_steps, tau=tau,
                       tau_prime=tau_p, T=T, T_prime=T_p, steps=steps)


def _reference_batch(model: ModelKind, ell, main: ScaledField, mu: ScaledField,
                     n: int, max_steps: int, master_seed: int) -> BatchResult:
    tau = np.empty(n, dtype=np.int64)
    tau_p = np.empty(n, dtype=np.int64)
    T = np.empty(n)
    T_p = np.empty(n)
    steps = np.empty(n, dtype=np.int64)
    for r in range(n):
        rng = replica_stream(master_seed, r)
        if model is ModelKind.SEMI_LATTICE:
            rec = run_semilattice(float(ell), main, mu, max_steps, rng, seed_id=r)
        elif model is ModelKind.DILUTED_LATTICE:
            rec = run_diluted(int(ell), main, mu, max_steps, rng, seed_id=r)
        else:
            rec = run_pure(int(ell), mu, max_steps, rng, seed_id=r)
        tau[r] = -1 if rec.tau is None else rec.tau
        tau_p[r] = -1 if rec.tau_prime is None else rec.tau_prime
        T[r] = rec.T
        T_p[r] = rec.T_prime
        steps[r] = rec.steps_used
    return BatchResult(ell=float(ell), max_steps=max_steps, tau=tau,
                       tau_prime=tau_p, T=T, T_prime=T_p, steps=steps)
